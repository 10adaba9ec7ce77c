#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "interpol/field.hpp"
#include "interpol/poly.hpp"
#include "interpol/protocol.hpp"

namespace interpol {

inline std::size_t checked_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
      throw std::overflow_error("coefficient array too large");
    r *= base;
  }
  return r;
}

/// Dense m-variate polynomial with degree < n_deg in each variable.
/// Coefficients are stored by digit tuple (d_1, ..., d_m) in row-major
/// order, d_1 most significant.
class MultivariatePolynomial {
 public:
  MultivariatePolynomial(const FieldContext& field, std::size_t variables, std::size_t degree_bound, Vector coeffs)
      : field_(field), variables_(variables), degree_bound_(degree_bound), coeffs_(std::move(coeffs)) {
    if (variables_ == 0 || degree_bound_ == 0) throw std::invalid_argument("need m >= 1 and n_deg >= 1");
    if (coeffs_.size() != checked_pow(degree_bound_, variables_))
      throw std::invalid_argument("coefficient array must hold n_deg^m entries");
    for (auto a : coeffs_)
      if (!field_.owns(a)) throw std::invalid_argument("coefficient from a different field");
  }

  static MultivariatePolynomial random(const FieldContext& field, std::size_t variables, std::size_t degree_bound,
                                       Xoshiro256& rng) {
    return {field, variables, degree_bound, field.sample_vector(rng, checked_pow(degree_bound, variables))};
  }

  const FieldContext& field() const { return field_; }
  std::size_t variables() const { return variables_; }
  std::size_t degree_bound() const { return degree_bound_; }
  const Vector& coeffs() const { return coeffs_; }

  FieldElement coeff(std::span<const std::size_t> digits) const {
    if (digits.size() != variables_) throw std::invalid_argument("digit tuple has wrong length");
    std::size_t idx = 0;
    for (auto d : digits) {
      if (d >= degree_bound_) throw std::out_of_range("digit exceeds degree bound");
      idx = idx * degree_bound_ + d;
    }
    return coeffs_[idx];
  }

 private:
  FieldContext field_;
  std::size_t variables_;
  std::size_t degree_bound_;
  Vector coeffs_;
};

/// Variables per side of the bilinear form; odd m gets a phantom last
/// variable that only ever appears with exponent 0.
inline std::size_t mv_half(std::size_t variables) { return (variables + 1) / 2; }

/// Delta with Delta[i][j] = a_{digits(i) ++ digits(j)}, both index sides
/// expanded base n_deg over m/2 digits. Size n_deg^{m/2} square.
inline CoeffMatrix mv_decompose(const MultivariatePolynomial& f) {
  const std::size_t n = f.degree_bound();
  const std::size_t side = checked_pow(n, mv_half(f.variables()));
  const bool phantom = f.variables() % 2 == 1;
  Matrix delta(f.field(), side, side);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      const std::size_t flat = i * side + j;
      if (!phantom) {
        delta(i, j) = f.coeffs()[flat];
      } else if (flat % n == 0) {
        delta(i, j) = f.coeffs()[flat / n];
      }
    }
  return {std::move(delta), side, 0};
}

/// Monomial vector over one group of variables, by digit recursion:
/// entry i is prod_j v_j^{b_{i,j}} with b_i the base-n expansion of i.
inline Vector mv_monomials(std::span<const FieldElement> vars, std::size_t n, FieldElement one) {
  Vector out{one};
  Vector powers;
  for (auto v : vars) {
    powers.assign(1, one);
    for (std::size_t d = 1; d < n; ++d) powers.push_back(powers.back() * v);
    Vector next;
    next.reserve(out.size() * n);
    for (auto e : out)
      for (auto pw : powers) next.push_back(e * pw);
    out = std::move(next);
  }
  return out;
}

/// (x0, x1) with f(inputs) = x0^T Delta x1.
inline std::pair<Vector, Vector> mv_input_vectors(std::span<const FieldElement> inputs, std::size_t degree_bound) {
  if (inputs.empty()) throw std::invalid_argument("need at least one input");
  const FieldElement one = pow(inputs.front(), 0);
  Vector padded(inputs.begin(), inputs.end());
  if (padded.size() % 2 == 1) padded.push_back(one);
  const std::size_t half = padded.size() / 2;
  auto all = std::span<const FieldElement>(padded);
  return {mv_monomials(all.first(half), degree_bound, one), mv_monomials(all.subspan(half), degree_bound, one)};
}

/// Direct evaluation: sum over every coefficient of a_d prod x_i^{d_i}.
inline FieldElement mv_reference_eval(const MultivariatePolynomial& f, std::span<const FieldElement> inputs) {
  if (inputs.size() != f.variables()) throw std::invalid_argument("wrong number of inputs");
  const std::size_t n = f.degree_bound();
  FieldElement acc = f.field().zero();
  std::vector<std::size_t> digits(f.variables());
  for (std::size_t idx = 0; idx < f.coeffs().size(); ++idx) {
    std::size_t rest = idx;
    for (std::size_t v = f.variables(); v-- > 0;) {
      digits[v] = rest % n;
      rest /= n;
    }
    FieldElement term = f.coeffs()[idx];
    for (std::size_t v = 0; v < f.variables(); ++v) term *= pow(inputs[v], digits[v]);
    acc += term;
  }
  return acc;
}

inline InitResult mv_init(const MultivariatePolynomial& f, std::size_t c, Xoshiro256& rng) {
  return init(mv_decompose(f), c, rng);
}

/// One verified evaluation: the server is asked for Delta x1, the user
/// checks it with the key and decodes x0 . w_hat.
inline RoundTranscript mv_eval_verified(Session& session, ServerStrategy& server, std::span<const FieldElement> inputs,
                                        std::size_t degree_bound) {
  OpCounter ops;
  std::pair<Vector, Vector> vecs;
  {
    CountingScope scope(ops, Phase::encode);
    vecs = mv_input_vectors(inputs, degree_bound);
  }
  if (vecs.second.size() != session.key.query_size())
    throw std::invalid_argument("inputs do not match the key's dimensions");
  return run_query(session, server, std::move(vecs.second), vecs.first, ops);
}

// Text form: "q=<modulus> m=<variables> n_deg=<bound>" then n_deg^m
// residues in row-major digit-tuple order, whitespace separated.

inline std::string to_string(const MultivariatePolynomial& f) {
  std::ostringstream os;
  os << "q=" << f.field().modulus() << " m=" << f.variables() << " n_deg=" << f.degree_bound() << '\n';
  for (std::size_t i = 0; i < f.coeffs().size(); ++i) os << (i ? " " : "") << f.coeffs()[i].value();
  os << '\n';
  return os.str();
}

inline MultivariatePolynomial parse_multivariate(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto header = [&](std::string_view key) -> std::uint64_t {
    std::string tok;
    if (!(in >> tok) || tok.rfind(std::string(key) + "=", 0) != 0)
      throw std::invalid_argument("expected " + std::string(key) + "=<value> in header");
    try {
      std::size_t used = 0;
      auto v = std::stoull(tok.substr(key.size() + 1), &used);
      if (used + key.size() + 1 != tok.size()) throw std::invalid_argument("junk");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad header field '" + tok + "'");
    }
  };
  const FieldContext field(header("q"));
  const std::size_t m = header("m");
  const std::size_t n = header("n_deg");
  Vector coeffs;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.front() == '-' || v >= field.modulus())
      throw std::invalid_argument("bad coefficient '" + tok + "'");
    coeffs.push_back(field.element(v));
  }
  return {field, m, n, std::move(coeffs)};
}

}  // namespace interpol
