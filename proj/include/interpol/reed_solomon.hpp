#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpol/field.hpp"

namespace interpol {

/// (n, t) Reed-Solomon code over row slices of a matrix. `t` is the number
/// of data slices. Evaluation points must be distinct and nonzero.
struct RSConfig {
  std::size_t n = 0;
  std::size_t t = 0;
  Vector points;
};

class RSUnrecoverable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void validate(const RSConfig& cfg, const FieldContext& field) {
  if (field.modulus() <= cfg.n)
    throw std::invalid_argument("Reed-Solomon needs q > n (q=" + std::to_string(field.modulus()) +
                                ", n=" + std::to_string(cfg.n) + ")");
  if (cfg.t == 0 || cfg.t > cfg.n) throw std::invalid_argument("Reed-Solomon needs 1 <= t <= n");
  if (cfg.points.size() != cfg.n) throw std::invalid_argument("Reed-Solomon needs n evaluation points");
  for (std::size_t i = 0; i < cfg.n; ++i) {
    if (!field.owns(cfg.points[i]) || cfg.points[i].is_zero())
      throw std::invalid_argument("evaluation points must be nonzero field elements");
    for (std::size_t j = 0; j < i; ++j)
      if (cfg.points[i] == cfg.points[j]) throw std::invalid_argument("evaluation points must be distinct");
  }
}

/// Points 1..n.
inline RSConfig make_rs_config(const FieldContext& field, std::size_t n, std::size_t t) {
  if (field.modulus() <= n)
    throw std::invalid_argument("Reed-Solomon needs q > n (q=" + std::to_string(field.modulus()) +
                                ", n=" + std::to_string(n) + ")");
  RSConfig cfg{n, t, {}};
  for (std::size_t i = 1; i <= n; ++i) cfg.points.push_back(field.element(i));
  validate(cfg, field);
  return cfg;
}

namespace detail {

/// Lagrange basis over `nodes` (indices into cfg.points), evaluated at `at`.
inline FieldElement lagrange_basis(const RSConfig& cfg, std::span<const std::size_t> nodes, std::size_t which,
                                   FieldElement at) {
  FieldElement num = pow(at, 0);
  FieldElement den = num;
  const FieldElement xi = cfg.points[nodes[which]];
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == which) continue;
    const FieldElement xk = cfg.points[nodes[k]];
    num *= at - xk;
    den *= xi - xk;
  }
  return num * inv(den);
}

/// Coefficient matrix mapping symbols at `from` to symbols at `to`. A
/// codeword symbol at point a is a*Q(a) for a polynomial Q of degree < t,
/// so symbol_to = sum_i symbol_i * (a_to / a_i) * L_i(a_to).
inline Matrix transfer_matrix(const RSConfig& cfg, std::span<const std::size_t> from, std::span<const std::size_t> to) {
  const FieldContext field(cfg.points.front().modulus());
  Matrix m(field, to.size(), from.size());
  for (std::size_t r = 0; r < to.size(); ++r) {
    const FieldElement at = cfg.points[to[r]];
    for (std::size_t i = 0; i < from.size(); ++i)
      m(r, i) = at * inv(cfg.points[from[i]]) * lagrange_basis(cfg, from, i, at);
  }
  return m;
}

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

/// out[r] = sum_i m(r, i) * symbols[i], symbols being equal-length vectors.
inline std::vector<Vector> combine(const Matrix& m, std::span<const Vector* const> symbols) {
  std::vector<Vector> out;
  const std::size_t len = symbols.front()->size();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Vector acc(len, m.field().zero());
    for (std::size_t i = 0; i < m.cols(); ++i)
      for (std::size_t e = 0; e < len; ++e) acc[e] += m(r, i) * (*symbols[i])[e];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace detail

/// n x t generator: coded symbol l = sum_m G(l, m) * data_m. The code is
/// systematic (first t rows are the identity); codewords are the values at
/// the points of polynomials of degree <= t with zero constant term.
inline Matrix rs_generator(const RSConfig& cfg) {
  const auto data = detail::iota(cfg.t);
  const auto all = detail::iota(cfg.n);
  return detail::transfer_matrix(cfg, data, all);
}

/// Splits Delta into t equal row slices and returns the n coded slices.
inline std::vector<Matrix> rs_encode(const Matrix& delta, const RSConfig& cfg) {
  validate(cfg, delta.field());
  if (delta.rows() % cfg.t != 0)
    throw std::invalid_argument("matrix height must be a multiple of the data-shard count");
  const std::size_t h = delta.rows() / cfg.t;
  const Matrix g = rs_generator(cfg);
  std::vector<Matrix> coded;
  for (std::size_t l = 0; l < cfg.n; ++l) {
    Matrix slice(delta.field(), h, delta.cols());
    for (std::size_t m = 0; m < cfg.t; ++m) {
      const FieldElement coef = g(l, m);
      if (coef.is_zero()) continue;
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t col = 0; col < delta.cols(); ++col) slice(r, col) += coef * delta(m * h + r, col);
    }
    coded.push_back(std::move(slice));
  }
  return coded;
}

/// Encodes t data symbols (equal-length vectors) into n coded symbols.
inline std::vector<Vector> rs_encode_symbols(std::span<const Vector> data, const RSConfig& cfg) {
  if (data.size() != cfg.t) throw std::invalid_argument("need exactly t data symbols");
  std::vector<const Vector*> ptrs;
  for (const auto& d : data) ptrs.push_back(&d);
  return detail::combine(rs_generator(cfg), ptrs);
}

/// Erasure decoding. `shards[l]` is the result from coded slice l, or empty
/// if erased. Returns the t data results stacked (i.e. Delta z).
inline Vector rs_recover(std::span<const std::optional<Vector>> shards, const RSConfig& cfg) {
  if (shards.size() != cfg.n) throw std::invalid_argument("need one entry per coded shard");
  std::vector<std::size_t> survivors;
  std::vector<const Vector*> symbols;
  for (std::size_t l = 0; l < cfg.n && survivors.size() < cfg.t; ++l)
    if (shards[l]) {
      survivors.push_back(l);
      symbols.push_back(&*shards[l]);
    }
  if (survivors.size() < cfg.t)
    throw RSUnrecoverable(std::to_string(cfg.n - survivors.size()) + " erasures exceed the " +
                          std::to_string(cfg.n - cfg.t) + " the code can fill");
  for (const auto* s : symbols)
    if (s->size() != symbols.front()->size()) throw std::invalid_argument("shard results differ in length");
  const auto data = detail::iota(cfg.t);
  const Matrix m = detail::transfer_matrix(cfg, survivors, data);
  Vector out;
  for (auto& piece : detail::combine(m, symbols)) out.insert(out.end(), piece.begin(), piece.end());
  return out;
}

/// Errors a decoder without location information can always correct.
inline std::size_t rs_unique_radius(const RSConfig& cfg) { return (cfg.n - cfg.t + 2) / 2 - 1; }

/// Bounded-distance decoding with no knowledge of which shards are bad:
/// returns the unique codeword within rs_unique_radius of `received`, or
/// nothing. Tries every t-subset as an information set, so only for small n.
inline std::optional<Vector> rs_decode_unique(std::span<const Vector> received, const RSConfig& cfg) {
  if (received.size() != cfg.n) throw std::invalid_argument("need one entry per coded shard");
  const std::size_t radius = rs_unique_radius(cfg);
  std::vector<std::size_t> subset(cfg.t);
  const auto all = detail::iota(cfg.n);
  const auto data = detail::iota(cfg.t);
  // Lexicographic enumeration of t-subsets of [0, n).
  for (std::size_t i = 0; i < cfg.t; ++i) subset[i] = i;
  for (;;) {
    std::vector<const Vector*> symbols;
    for (auto l : subset) symbols.push_back(&received[l]);
    auto codeword = detail::combine(detail::transfer_matrix(cfg, subset, all), symbols);
    std::size_t disagreements = 0;
    for (std::size_t l = 0; l < cfg.n; ++l)
      if (codeword[l] != received[l]) ++disagreements;
    if (disagreements <= radius) {
      Vector out;
      for (std::size_t m = 0; m < cfg.t; ++m) out.insert(out.end(), codeword[m].begin(), codeword[m].end());
      return out;
    }
    std::size_t i = cfg.t;
    while (i > 0 && subset[i - 1] == cfg.n - cfg.t + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < cfg.t; ++j) subset[j] = subset[j - 1] + 1;
  }
  return std::nullopt;
}

}  // namespace interpol
