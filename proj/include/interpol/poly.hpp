#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "interpol/field.hpp"

namespace interpol {

/// f(x) = a_0 + a_1 x + ... + a_{k-1} x^{k-1}. `degree_bound()` is k, the
/// declared length; trailing zero coefficients are allowed.
class Polynomial {
 public:
  Polynomial(const FieldContext& field, Vector coeffs) : field_(field), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("polynomial needs at least one coefficient");
    for (auto a : coeffs_)
      if (!field_.owns(a)) throw std::invalid_argument("coefficient from a different field");
  }

  static Polynomial random(const FieldContext& field, std::size_t degree_bound, Xoshiro256& rng) {
    return {field, field.sample_vector(rng, degree_bound)};
  }

  const FieldContext& field() const { return field_; }
  std::size_t degree_bound() const { return coeffs_.size(); }
  const Vector& coeffs() const { return coeffs_; }
  FieldElement operator[](std::size_t i) const { return coeffs_[i]; }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  FieldContext field_;
  Vector coeffs_;
};

/// The s x s matrix of chunked coefficients, Delta[i][j] = a_{i*s + j}, with
/// zero padding past the declared degree bound.
struct CoeffMatrix {
  Matrix delta;
  std::size_t s;
  std::size_t pad_count;
};

/// z = [1, x, ..., x^{s-1}] and p = [1, x^s, ..., x^{s(s-1)}], so that
/// f(x) = p . (Delta z).
struct PowerVectors {
  Vector z;
  Vector p;
};

/// Reference evaluation; the ground truth every other path is checked
/// against. k-1 multiplications and k-1 additions.
inline FieldElement horner_eval(const Polynomial& f, FieldElement x) {
  const auto& a = f.coeffs();
  FieldElement acc = a.back();
  for (std::size_t i = a.size() - 1; i-- > 0;) acc = acc * x + a[i];
  return acc;
}

inline std::size_t ceil_sqrt(std::size_t k) {
  std::size_t s = 0;
  while (s * s < k) ++s;
  return s;
}

/// Chunks f into an s x s matrix with the given chunk size (s*s >= k).
inline CoeffMatrix decompose(const Polynomial& f, std::size_t s) {
  const std::size_t k = f.degree_bound();
  if (s * s < k) throw std::invalid_argument("chunk size too small for polynomial");
  Matrix delta(f.field(), s, s);
  for (std::size_t t = 0; t < k; ++t) delta(t / s, t % s) = f[t];
  return {std::move(delta), s, s * s - k};
}

/// Chunks f with the smallest chunk size s = ceil(sqrt(k)).
inline CoeffMatrix decompose(const Polynomial& f) { return decompose(f, ceil_sqrt(f.degree_bound())); }

/// Running products for z and p; x^s is the only power taken by
/// square-and-multiply, so the cost is 2(s-1) + O(log s) multiplications.
inline PowerVectors power_vectors(FieldElement x, std::size_t s) {
  if (s == 0) throw std::invalid_argument("power vectors need s >= 1");
  const FieldElement one = pow(x, 0);
  PowerVectors pv;
  pv.z.reserve(s);
  pv.p.reserve(s);
  pv.z.push_back(one);
  for (std::size_t j = 1; j < s; ++j) pv.z.push_back(pv.z.back() * x);
  const FieldElement step = pow(x, s);
  pv.p.push_back(one);
  for (std::size_t j = 1; j < s; ++j) pv.p.push_back(pv.p.back() * step);
  return pv;
}

/// Exact M v with rows*cols multiplications.
inline Vector matvec(const Matrix& m, std::span<const FieldElement> v) {
  if (v.size() != m.cols())
    throw std::invalid_argument("matvec shape mismatch: " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " times " + std::to_string(v.size()));
  Vector out;
  out.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    if (row.empty()) {
      out.push_back(m.field().zero());
      continue;
    }
    FieldElement acc = row[0] * v[0];
    for (std::size_t j = 1; j < row.size(); ++j) acc += row[j] * v[j];
    out.push_back(acc);
  }
  return out;
}

/// Exact A B; used for one-time key material.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.field(), a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      if (a.cols() == 0) continue;
      FieldElement acc = a(i, 0) * b(0, j);
      for (std::size_t t = 1; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      out(i, j) = acc;
    }
  return out;
}

/// u . v with |u| multiplications.
inline FieldElement dot(std::span<const FieldElement> u, std::span<const FieldElement> v) {
  if (u.size() != v.size() || u.empty()) throw std::invalid_argument("dot shape mismatch");
  FieldElement acc = u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

// Text form: "q=<modulus> a_0 a_1 ... a_{k-1}" on a single line.

inline std::string to_string(const Polynomial& f) {
  std::ostringstream os;
  os << "q=" << f.field().modulus();
  for (auto a : f.coeffs()) os << ' ' << a.value();
  return os.str();
}

inline Polynomial parse_polynomial(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!(in >> header) || header.rfind("q=", 0) != 0)
    throw std::invalid_argument("polynomial text must start with q=<modulus>");
  std::uint64_t q = 0;
  try {
    std::size_t used = 0;
    q = std::stoull(header.substr(2), &used);
    if (used != header.size() - 2) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad modulus header '" + header + "'");
  }
  FieldContext field(q);
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
    if (used != tok.size() || tok.front() == '-')
      throw std::invalid_argument("bad coefficient '" + tok + "'");
    if (v >= q) throw std::invalid_argument("coefficient " + tok + " is not a residue mod q");
    coeffs.push_back(field.element(v));
  }
  return {field, std::move(coeffs)};
}

}  // namespace interpol
