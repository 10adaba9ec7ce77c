#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "interpol/op_counter.hpp"
#include "interpol/random.hpp"

namespace interpol {

/// Deterministic Miller-Rabin, exact for every 64-bit input.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  auto mulmod = [n](std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % n);
  };
  auto powmod = [&](std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, b = mulmod(b, b))
      if (e & 1) r = mulmod(r, b);
    return r;
  };
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

class FieldContext;

/// Residue modulo a prime. Carries its modulus so that mixing elements of
/// different fields is caught instead of silently producing garbage.
class FieldElement {
 public:
  std::uint64_t value() const { return value_; }
  std::uint64_t modulus() const { return modulus_; }
  bool is_zero() const { return value_ == 0; }

  friend FieldElement operator+(FieldElement a, FieldElement b) {
    check_same(a, b);
    detail::note_add();
    std::uint64_t v = a.value_ + b.value_;
    if (v >= a.modulus_) v -= a.modulus_;
    return {v, a.modulus_};
  }
  friend FieldElement operator-(FieldElement a, FieldElement b) {
    check_same(a, b);
    detail::note_add();
    std::uint64_t v = a.value_ >= b.value_ ? a.value_ - b.value_ : a.value_ + a.modulus_ - b.value_;
    return {v, a.modulus_};
  }
  friend FieldElement operator-(FieldElement a) {
    detail::note_add();
    return {a.value_ == 0 ? 0 : a.modulus_ - a.value_, a.modulus_};
  }
  friend FieldElement operator*(FieldElement a, FieldElement b) {
    check_same(a, b);
    detail::note_mul();
    auto wide = static_cast<unsigned __int128>(a.value_) * b.value_;
    return {static_cast<std::uint64_t>(wide % a.modulus_), a.modulus_};
  }
  FieldElement& operator+=(FieldElement o) { return *this = *this + o; }
  FieldElement& operator-=(FieldElement o) { return *this = *this - o; }
  FieldElement& operator*=(FieldElement o) { return *this = *this * o; }

  /// Comparison is structural and never counted.
  friend bool operator==(const FieldElement&, const FieldElement&) = default;

  friend std::ostream& operator<<(std::ostream& os, FieldElement a) { return os << a.value_; }

 private:
  friend class FieldContext;
  friend FieldElement pow(FieldElement, std::uint64_t);
  friend FieldElement inv(FieldElement);
  FieldElement(std::uint64_t v, std::uint64_t q) : value_(v), modulus_(q) {}

  static void check_same(FieldElement a, FieldElement b) {
    if (a.modulus_ != b.modulus_)
      throw std::invalid_argument("field element context mismatch: " + std::to_string(a.modulus_) +
                                  " vs " + std::to_string(b.modulus_));
  }

  std::uint64_t value_;
  std::uint64_t modulus_;
};

/// Square-and-multiply; costs O(log e) counted multiplications.
inline FieldElement pow(FieldElement base, std::uint64_t e);

/// Multiplicative inverse via extended Euclid. Throws std::domain_error on 0.
inline FieldElement inv(FieldElement a);

using Vector = std::vector<FieldElement>;

/// Dense row-major matrix over one prime field.
class Matrix;

/// The prime field F_q. Cheap to copy; the modulus is checked once at
/// construction.
class FieldContext {
 public:
  static constexpr std::uint64_t kMersenne61 = (1ULL << 61) - 1;
  static constexpr std::uint64_t kMaxModulus = 1ULL << 62;

  explicit FieldContext(std::uint64_t q = kMersenne61) : q_(q) {
    if (q >= kMaxModulus) throw std::invalid_argument("field modulus must be below 2^62");
    if (!is_prime_u64(q)) throw std::invalid_argument("field modulus " + std::to_string(q) + " is not prime");
  }

  std::uint64_t modulus() const { return q_; }

  FieldElement element(std::uint64_t v) const { return {v % q_, q_}; }
  /// Residue of a signed integer, e.g. -1 -> q-1.
  FieldElement from_signed(std::int64_t v) const {
    auto m = static_cast<std::int64_t>(v % static_cast<std::int64_t>(q_));
    if (m < 0) m += static_cast<std::int64_t>(q_);
    return {static_cast<std::uint64_t>(m), q_};
  }
  FieldElement zero() const { return {0, q_}; }
  FieldElement one() const { return {1 % q_, q_}; }

  bool owns(FieldElement a) const { return a.modulus() == q_; }

  FieldElement add(FieldElement a, FieldElement b) const { return a + b; }
  FieldElement sub(FieldElement a, FieldElement b) const { return a - b; }
  FieldElement mul(FieldElement a, FieldElement b) const { return a * b; }
  FieldElement inverse(FieldElement a) const { return inv(a); }
  FieldElement power(FieldElement a, std::uint64_t e) const { return interpol::pow(a, e); }

  FieldElement sample_uniform(Xoshiro256& rng) const { return {rng.uniform_below(q_), q_}; }
  FieldElement sample_nonzero(Xoshiro256& rng) const { return {1 + rng.uniform_below(q_ - 1), q_}; }

  Vector zeros(std::size_t n) const { return Vector(n, zero()); }
  Vector sample_vector(Xoshiro256& rng, std::size_t n) const {
    Vector v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(sample_uniform(rng));
    return v;
  }
  Vector elements(std::span<const std::uint64_t> values) const {
    Vector v;
    v.reserve(values.size());
    for (auto x : values) v.push_back(element(x));
    return v;
  }
  Vector elements(std::initializer_list<std::uint64_t> values) const {
    return elements(std::span<const std::uint64_t>(values.begin(), values.size()));
  }

  inline Matrix sample_matrix(Xoshiro256& rng, std::size_t rows, std::size_t cols) const;

  friend bool operator==(const FieldContext&, const FieldContext&) = default;

 private:
  std::uint64_t q_;
};

inline FieldElement pow(FieldElement base, std::uint64_t e) {
  if (e == 0) return {1 % base.modulus(), base.modulus()};
  // Start from the top set bit so pow(x, 1) costs nothing.
  int top = 63 - __builtin_clzll(e);
  FieldElement result = base;
  for (int bit = top - 1; bit >= 0; --bit) {
    result = result * result;
    if ((e >> bit) & 1) result = result * base;
  }
  return result;
}

inline FieldElement inv(FieldElement a) {
  if (a.is_zero()) throw std::domain_error("inverse of zero");
  detail::note_inv();
  const auto q = static_cast<__int128>(a.modulus());
  __int128 t = 0, new_t = 1;
  __int128 r = q, new_r = static_cast<__int128>(a.value());
  while (new_r != 0) {
    __int128 quotient = r / new_r;
    __int128 tmp = t - quotient * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - quotient * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (t < 0) t += q;
  return {static_cast<std::uint64_t>(t), a.modulus()};
}

class Matrix {
 public:
  Matrix(const FieldContext& field, std::size_t rows, std::size_t cols)
      : field_(field), rows_(rows), cols_(cols), data_(rows * cols, field.zero()) {}

  /// Builds from nested rows of residues; all rows must have equal length.
  static Matrix from_rows(const FieldContext& field,
                          std::initializer_list<std::initializer_list<std::uint64_t>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(field, r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw std::invalid_argument("ragged matrix rows");
      std::size_t j = 0;
      for (auto v : row) m(i, j++) = field.element(v);
      ++i;
    }
    return m;
  }

  const FieldContext& field() const { return field_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  FieldElement& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const FieldElement& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const FieldElement> row(std::size_t i) const {
    return std::span<const FieldElement>(data_).subspan(i * cols_, cols_);
  }
  std::span<const FieldElement> data() const { return data_; }

  /// Rows [first, first + count) as a new matrix.
  Matrix row_block(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw std::out_of_range("row block out of range");
    Matrix m(field_, count, cols_);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
              data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_), m.data_.begin());
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  FieldContext field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<FieldElement> data_;
};

inline Matrix FieldContext::sample_matrix(Xoshiro256& rng, std::size_t rows, std::size_t cols) const {
  Matrix m(*this, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = sample_uniform(rng);
  return m;
}

}  // namespace interpol
