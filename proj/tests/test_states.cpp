#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qtomo/error.hpp"
#include "qtomo/states.hpp"

using namespace qtomo;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(derive_seed(7, 3), 7 ^ mix64(3));
}

TEST(Rng, MomentsOfVariates) {
  Rng rng(11);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential();
  }
  // Five standard errors.
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(se / n, 1.0, 5 / std::sqrt(n));
}

TEST(DensityMatrixType, Validation) {
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  bad(0, 0) = -1.0;
  EXPECT_THROW(DensityMatrix{bad}, DomainError);
  ComplexMatrix nonherm = ComplexMatrix::Identity(2, 2);
  nonherm(0, 1) = 0.3;
  EXPECT_THROW(DensityMatrix{nonherm}, DomainError);
  EXPECT_THROW(DensityMatrix{ComplexMatrix::Zero(2, 2)}, DomainError);
  const DensityMatrix ok(ComplexMatrix::Identity(3, 3) * 5.0);
  EXPECT_DOUBLE_EQ(ok.trace(), 15.0);
  EXPECT_NEAR(ok.normalized().trace(), 1.0, 1e-15);
}

TEST(HaarPure, TraceAndPurity) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix s = haar_pure(2 + i % 5, rng);
    EXPECT_NEAR(s.trace(), 1.0, 1e-12);
    EXPECT_NEAR(purity(s), 1.0, 1e-12);
  }
}

TEST(HaarPure, QubitAverageIsMaximallyMixed) {
  Rng rng(2);
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += haar_pure(2, rng).matrix();
  sum /= n;
  // Bloch vector of the average state.
  const double x = 2 * sum(0, 1).real(), y = -2 * sum(0, 1).imag(), z = (sum(0, 0) - sum(1, 1)).real();
  EXPECT_LT(std::sqrt(x * x + y * y + z * z), 0.02);
}

TEST(HaarPure, FirstComponentHasMeanQuarter) {
  Rng rng(3);
  const int n = 10000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double p = std::norm(haar_vector(4, rng)(0));
    s += p;
    s2 += p * p;
  }
  EXPECT_NEAR(s / n, 0.25, 0.01);
  // |<0|psi>|^2 is Beta(1, 3): second moment 2/(d(d+1)) = 0.1.
  EXPECT_NEAR(s2 / n, 0.1, 0.01);
}

TEST(HaarUnitary, IsUnitary) {
  Rng rng(4);
  for (int d : {2, 3, 4, 7}) {
    const ComplexMatrix u = haar_unitary(d, rng);
    EXPECT_LT((u.adjoint() * u - ComplexMatrix::Identity(d, d)).norm(), 1e-12);
  }
}

TEST(WernerLike, Limits) {
  Rng rng(5);
  EXPECT_LT((werner_like(3, 0.0, rng).matrix() - ComplexMatrix::Identity(3, 3) / 3.0).norm(), 1e-15);
  EXPECT_NEAR(purity(werner_like(3, 1.0, rng)), 1.0, 1e-12);
  const DensityMatrix half = werner_like(2, 0.5, rng);
  const RealVector ev = half.eigenvalues();
  EXPECT_NEAR(ev[0], 0.75, 1e-12);
  EXPECT_NEAR(ev[1], 0.25, 1e-12);
  EXPECT_NEAR(purity(half), 5.0 / 8.0, 1e-12);
  EXPECT_THROW(werner_like(2, 1.5, rng), DomainError);
}

TEST(WernerTwoQubit, Limits) {
  Rng rng(6);
  EXPECT_LT((werner_two_qubit(0.0, rng).matrix() - ComplexMatrix::Identity(4, 4) / 4.0).norm(), 1e-15);

  const ComplexMatrix bell = werner_two_qubit(1.0, rng).matrix();
  // Partial traces.
  ComplexMatrix ra = ComplexMatrix::Zero(2, 2), rb = ComplexMatrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int b = 0; b < 2; ++b) {
        ra(a, a2) += bell(2 * a + b, 2 * a2 + b);
        rb(a, a2) += bell(2 * b + a, 2 * b + a2);
      }
  EXPECT_LT((ra - ComplexMatrix::Identity(2, 2) / 2.0).norm(), 1e-12);
  EXPECT_LT((rb - ComplexMatrix::Identity(2, 2) / 2.0).norm(), 1e-12);

  const RealVector ev = werner_two_qubit(1.0 / 3.0, rng).eigenvalues();
  EXPECT_NEAR(ev[0], 0.5, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(ev[k], 1.0 / 6.0, 1e-12);
}

TEST(RankBiased, RanksUniformAndStatesValid) {
  Rng rng(7);
  const int n = 100000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    const DensityMatrix s = rank_biased_random(4, rng);
    const int l = effective_rank(s, 1e-12);
    ASSERT_GE(l, 1);
    ++counts[static_cast<size_t>(l - 1)];
    if (i < 2000) {
      ASSERT_NEAR(s.trace(), 1.0, 1e-12);
      ASSERT_GE(s.eigenvalues().minCoeff(), -1e-12);
      if (l == 1) ASSERT_NEAR(purity(s), 1.0, 1e-12);
    }
  }
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.01);
}

TEST(Purity, Examples) {
  EXPECT_NEAR(purity(maximally_mixed(4)), 0.25, 1e-15);
  ComplexVector psi(3);
  psi << Complex(1, 1), 2, Complex(0, -1);
  EXPECT_NEAR(purity(pure_state(psi)), 1.0, 1e-14);
  ComplexMatrix half = ComplexMatrix::Zero(4, 4);
  half(0, 0) = half(1, 1) = 0.5;
  EXPECT_NEAR(purity(DensityMatrix(half)), 0.5, 1e-15);
}

TEST(Fidelity, Examples) {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix s = rank_biased_random(4, rng);
    EXPECT_NEAR(fidelity(s, s), 1.0, 1e-7);
  }
  ComplexVector e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;
  EXPECT_NEAR(fidelity(pure_state(e0), pure_state(e1)), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(pure_state(e0), maximally_mixed(2)), 0.5, 1e-12);
  // Pure-state formula <psi|sigma|psi> on random inputs.
  for (int i = 0; i < 20; ++i) {
    const ComplexVector psi = haar_vector(3, rng);
    const DensityMatrix sigma = werner_like(3, 0.4, rng);
    EXPECT_NEAR(fidelity(pure_state(psi), sigma), psi.dot(sigma.matrix() * psi).real(), 1e-7);
  }
}

TEST(EffectiveRank, Examples) {
  EXPECT_EQ(effective_rank(maximally_mixed(4)), 4);
  ComplexVector psi(4);
  psi << 1, 0, 0, 0;
  EXPECT_EQ(effective_rank(pure_state(psi)), 1);
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 0.7;
  m(1, 1) = 0.3 - 5e-7;
  m(2, 2) = 5e-7;
  EXPECT_EQ(effective_rank(DensityMatrix(m), 1e-6), 2);
  // The threshold applies after normalisation.
  EXPECT_EQ(effective_rank(DensityMatrix(m * 1000.0), 1e-6), 2);
}

TEST(Ensemble, SpecValidationAndDraw) {
  StateEnsembleSpec spec;
  spec.kind = EnsembleKind::werner_two_qubit;
  spec.dim = 2;
  EXPECT_THROW(spec.validate(), DomainError);
  spec.dim = 4;
  spec.p_min = 0.2;
  spec.p_max = 0.2;
  Rng rng(9);
  const EnsembleDraw d = draw_state(spec, rng);
  EXPECT_DOUBLE_EQ(d.p, 0.2);
  EXPECT_EQ(ensemble_kind_from_string(to_string(EnsembleKind::rank_biased)), EnsembleKind::rank_biased);
  EXPECT_THROW(ensemble_kind_from_string("ghz"), DomainError);
}
