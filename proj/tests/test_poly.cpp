#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "interpol/field.hpp"
#include "interpol/poly.hpp"
#include "interpol/random.hpp"

using namespace interpol;

namespace {

// Oracle: sum of a_i x^i with each power computed from scratch.
FieldElement term_sum(const Polynomial& f, FieldElement x) {
  FieldElement acc = f.field().zero();
  for (std::size_t i = 0; i < f.degree_bound(); ++i) {
    FieldElement xi = f.field().one();
    for (std::size_t e = 0; e < i; ++e) xi = xi * x;
    acc = acc + f[i] * xi;
  }
  return acc;
}

}  // namespace

TEST(Poly, HornerExample) {
  FieldContext f(7);
  Polynomial p(f, f.elements({1, 2, 0, 3}));
  EXPECT_EQ(horner_eval(p, f.element(2)).value(), 1u);
}

TEST(Poly, HornerMatchesTermSum) {
  Xoshiro256 rng(9);
  for (std::uint64_t q : std::vector<std::uint64_t>{2ULL, 5ULL, 101ULL, FieldContext::kMersenne61}) {
    FieldContext f(q);
    for (std::size_t k = 1; k <= 30; ++k) {
      auto p = Polynomial::random(f, k, rng);
      auto x = f.sample_uniform(rng);
      ASSERT_EQ(horner_eval(p, x), term_sum(p, x));
    }
  }
}

TEST(Poly, CeilSqrt) {
  EXPECT_EQ(ceil_sqrt(1), 1u);
  EXPECT_EQ(ceil_sqrt(2), 2u);
  EXPECT_EQ(ceil_sqrt(4), 2u);
  EXPECT_EQ(ceil_sqrt(5), 3u);
  EXPECT_EQ(ceil_sqrt(10000), 100u);
  EXPECT_EQ(ceil_sqrt(10001), 101u);
  for (std::size_t k = 1; k < 5000; ++k) {
    const auto s = ceil_sqrt(k);
    ASSERT_GE(s * s, k);
    ASSERT_LT((s - 1) * (s - 1), k);
  }
}

TEST(Poly, DecomposeLayoutAndPadding) {
  FieldContext f(7);
  Polynomial p(f, f.elements({1, 2, 3, 4, 5}));
  auto cm = decompose(p);
  ASSERT_EQ(cm.s, 3u);
  EXPECT_EQ(cm.pad_count, 4u);
  EXPECT_EQ(cm.delta(0, 0).value(), 1u);
  EXPECT_EQ(cm.delta(0, 1).value(), 2u);
  EXPECT_EQ(cm.delta(0, 2).value(), 3u);
  EXPECT_EQ(cm.delta(1, 0).value(), 4u);
  EXPECT_EQ(cm.delta(1, 1).value(), 5u);
  EXPECT_TRUE(cm.delta(2, 2).is_zero());
  EXPECT_THROW(decompose(p, 2), std::invalid_argument);
}

TEST(Poly, SpecMatvecExample) {
  FieldContext f(7);
  auto delta = Matrix::from_rows(f, {{1, 2}, {3, 4}});
  auto w = matvec(delta, f.elements({1, 3}));
  EXPECT_EQ(w, f.elements({0, 1}));
}

TEST(Poly, PowerVectorsExample) {
  FieldContext f(7);
  auto pv = power_vectors(f.element(3), 2);
  EXPECT_EQ(pv.z, f.elements({1, 3}));
  EXPECT_EQ(pv.p, f.elements({1, 2}));
}

TEST(Poly, BilinearIdentityMatchesHorner) {
  Xoshiro256 rng(17);
  for (std::uint64_t q : std::vector<std::uint64_t>{2ULL, 3ULL, 17ULL, FieldContext::kMersenne61}) {
    FieldContext f(q);
    for (std::size_t k = 1; k <= 50; ++k) {
      auto p = Polynomial::random(f, k, rng);
      auto cm = decompose(p);
      for (int t = 0; t < 3; ++t) {
        auto x = f.sample_uniform(rng);
        auto pv = power_vectors(x, cm.s);
        ASSERT_EQ(dot(pv.p, matvec(cm.delta, pv.z)), horner_eval(p, x)) << "q=" << q << " k=" << k;
      }
    }
  }
}

TEST(Poly, PowerVectorsAtZero) {
  FieldContext f(5);
  auto pv = power_vectors(f.zero(), 3);
  EXPECT_EQ(pv.z, f.elements({1, 0, 0}));
  EXPECT_EQ(pv.p, f.elements({1, 0, 0}));
}

TEST(Poly, ShapeMismatchesThrow) {
  FieldContext f(7);
  auto m = Matrix::from_rows(f, {{1, 2}, {3, 4}});
  EXPECT_THROW(matvec(m, f.elements({1, 2, 3})), std::invalid_argument);
  EXPECT_THROW(dot(f.elements({1}), f.elements({1, 2})), std::invalid_argument);
  EXPECT_THROW(Polynomial(f, {}), std::invalid_argument);
}

TEST(Poly, TextRoundTrip) {
  Xoshiro256 rng(4);
  FieldContext f(101);
  auto p = Polynomial::random(f, 13, rng);
  auto back = parse_polynomial(to_string(p));
  EXPECT_EQ(back.coeffs(), p.coeffs());
  EXPECT_EQ(back.field().modulus(), 101u);
  EXPECT_THROW(parse_polynomial("q=7 1 2 9"), std::invalid_argument);
  EXPECT_THROW(parse_polynomial("q=8 1"), std::invalid_argument);
  EXPECT_THROW(parse_polynomial("1 2 3"), std::invalid_argument);
}
