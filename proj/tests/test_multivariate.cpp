#include <gtest/gtest.h>

#include <stdexcept>
#include <vector>

#include "interpol/adversary.hpp"
#include "interpol/multivariate.hpp"
#include "interpol/protocol.hpp"
#include "interpol/random.hpp"

using namespace interpol;

namespace {

// Oracle: walk every exponent tuple with an odometer and add
// a_d * prod x_i^{d_i}, each power by repeated multiplication.
FieldElement term_sum(const MultivariatePolynomial& f, const Vector& x) {
  const std::size_t m = f.variables(), n = f.degree_bound();
  std::vector<std::size_t> d(m, 0);
  FieldElement acc = f.field().zero();
  for (;;) {
    FieldElement term = f.coeff(d);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t e = 0; e < d[i]; ++e) term = term * x[i];
    acc = acc + term;
    std::size_t i = m;
    while (i > 0 && d[i - 1] == n - 1) d[--i] = 0;
    if (i == 0) break;
    ++d[i - 1];
  }
  return acc;
}

}  // namespace

TEST(Multivariate, TwoVariableLayout) {
  FieldContext f(101);
  // Coefficients a_{d1 d2} stored with d1 most significant: a00 a01 a10 a11.
  MultivariatePolynomial p(f, 2, 2, f.elements({10, 20, 30, 40}));
  auto cm = mv_decompose(p);
  EXPECT_EQ(cm.delta, Matrix::from_rows(f, {{10, 20}, {30, 40}}));
}

TEST(Multivariate, SingleTermHasOneEntry) {
  FieldContext f(17);
  MultivariatePolynomial p(f, 2, 2, f.elements({0, 0, 0, 1}));  // x1 * x2
  auto cm = mv_decompose(p);
  EXPECT_EQ(cm.delta, Matrix::from_rows(f, {{0, 0}, {0, 1}}));
}

TEST(Multivariate, InputVectorsHandExample) {
  FieldContext f(7);
  auto [x0, x1] = mv_input_vectors(f.elements({3, 5}), 2);
  EXPECT_EQ(x0, f.elements({1, 3}));
  EXPECT_EQ(x1, f.elements({1, 5}));
}

TEST(Multivariate, AllOnesInputsGiveOnesVectors) {
  FieldContext f(17);
  auto [x0, x1] = mv_input_vectors(f.elements({1, 1, 1, 1}), 3);
  EXPECT_EQ(x0, Vector(9, f.one()));
  EXPECT_EQ(x1, Vector(9, f.one()));
}

TEST(Multivariate, InputVectorEntriesMatchPowOracle) {
  FieldContext f(101);
  Xoshiro256 rng(1);
  auto in = f.sample_vector(rng, 4);
  auto [x0, x1] = mv_input_vectors(in, 3);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(x0[i], pow(in[0], i / 3) * pow(in[1], i % 3));
    EXPECT_EQ(x1[i], pow(in[2], i / 3) * pow(in[3], i % 3));
  }
}

TEST(Multivariate, BilinearIdentityExhaustiveSmall) {
  FieldContext f(5);
  Xoshiro256 rng(2);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      auto p = MultivariatePolynomial::random(f, 2, n, rng);
      auto cm = mv_decompose(p);
      for (std::uint64_t a = 0; a < 5; ++a)
        for (std::uint64_t b = 0; b < 5; ++b) {
          Vector in = f.elements({a, b});
          auto [x0, x1] = mv_input_vectors(in, n);
          ASSERT_EQ(dot(x0, matvec(cm.delta, x1)), term_sum(p, in));
        }
    }
  }
}

TEST(Multivariate, BilinearIdentityRandomFourAndOddVariables) {
  FieldContext f(FieldContext::kMersenne61);
  Xoshiro256 rng(3);
  for (std::size_t m : {1u, 3u, 4u, 5u}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto p = MultivariatePolynomial::random(f, m, 3, rng);
      auto cm = mv_decompose(p);
      auto in = f.sample_vector(rng, m);
      auto [x0, x1] = mv_input_vectors(in, 3);
      ASSERT_EQ(dot(x0, matvec(cm.delta, x1)), term_sum(p, in)) << "m=" << m;
      ASSERT_EQ(mv_reference_eval(p, in), term_sum(p, in));
    }
  }
}

TEST(Multivariate, VerifiedEvaluationHonestAndForged) {
  FieldContext f(17);
  Xoshiro256 rng(4);
  int rejected = 0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    auto p = MultivariatePolynomial::random(f, 4, 3, rng);
    auto ir = mv_init(p, 2, rng);
    auto in = f.sample_vector(rng, 4);
    Session s(ir.key, ir.setup);
    HonestServer honest;
    auto t = mv_eval_verified(s, honest, in, 3);
    ASSERT_TRUE(t.ver());
    ASSERT_EQ(*t.dec, term_sum(p, in));
    Session s2(ir.key, ir.setup);
    FixedOffsetServer forger(derive_seed(5, i));
    rejected += !mv_eval_verified(s2, forger, in, 3).ver();
  }
  // Forgeries pass w.p. 1/289 each.
  EXPECT_GE(rejected, trials - 5);
}

TEST(Multivariate, ConstantPolynomial) {
  FieldContext f(17);
  Vector coeffs(9, f.zero());
  coeffs[0] = f.element(6);
  MultivariatePolynomial p(f, 2, 3, coeffs);
  Xoshiro256 rng(5);
  auto ir = mv_init(p, 1, rng);
  Session s(ir.key, ir.setup);
  HonestServer honest;
  EXPECT_EQ(mv_eval_verified(s, honest, f.sample_vector(rng, 2), 3).dec->value(), 6u);
}

TEST(Multivariate, CounterScaling) {
  FieldContext f(17);
  Xoshiro256 rng(6);
  auto measure = [&](std::size_t m) {
    auto p = MultivariatePolynomial::random(f, m, 3, rng);
    auto ir = mv_init(p, 2, rng);
    Session s(ir.key, ir.setup);
    HonestServer honest;
    return mv_eval_verified(s, honest, f.sample_vector(rng, m), 3).ops;
  };
  auto o2 = measure(2), o4 = measure(4);
  EXPECT_EQ(o2.at(Phase::serve).muls, 9u);
  EXPECT_EQ(o4.at(Phase::serve).muls, 81u);
  const double ratio = static_cast<double>(o4.user().muls) / static_cast<double>(o2.user().muls);
  EXPECT_NEAR(ratio, 3.0, 0.45);
}

TEST(Multivariate, TextRoundTripAndValidation) {
  FieldContext f(101);
  Xoshiro256 rng(7);
  auto p = MultivariatePolynomial::random(f, 3, 2, rng);
  auto back = parse_multivariate(to_string(p));
  EXPECT_EQ(back.coeffs(), p.coeffs());
  EXPECT_EQ(back.variables(), 3u);
  EXPECT_THROW(parse_multivariate("q=101 m=2 n_deg=2 1 2 3"), std::invalid_argument);
  EXPECT_THROW(MultivariatePolynomial(f, 0, 2, {}), std::invalid_argument);
  EXPECT_THROW(mv_reference_eval(p, f.elements({1})), std::invalid_argument);
}
