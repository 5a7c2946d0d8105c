#include <gtest/gtest.h>

#include <random>

#include "heunmono/linalg2c.hpp"
#include "oracles.hpp"

using namespace heunmono;

namespace {

std::mt19937_64 rng(20240611);

Complex rc() {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}
Mat2 rmat() { return {rc(), rc(), rc(), rc()}; }

const Mat2 kShear{1.0, 1.0, 0.0, 1.0};
const Mat2 kShearI{1.0, kI, 0.0, 1.0};

}  // namespace

TEST(Mul, IdentityTimesIdentity) { EXPECT_EQ(Mat2::identity() * Mat2::identity(), Mat2::identity()); }

TEST(Mul, ShearProduct) {
  const Mat2 expected{1.0, Complex(1, 1), 0.0, 1.0};
  EXPECT_LT(max_abs_diff(mul(kShear, kShearI), expected), 1e-15);
  EXPECT_LT(max_abs_diff(mul(kShear, kShearI), oracle::product(kShear, kShearI)), 1e-15);
}

TEST(Mul, MatchesIndexSums) {
  for (int i = 0; i < 100; ++i) {
    const Mat2 a = rmat(), b = rmat();
    EXPECT_LT(max_abs_diff(a * b, oracle::product(a, b)), 1e-13);
  }
}

TEST(Inverse, RandomRoundTrip) {
  for (int i = 0; i < 100; ++i) {
    const Mat2 p = rmat();
    if (std::abs(det(p)) < 1e-3) continue;
    EXPECT_LT(max_abs_diff(p * inverse(p), Mat2::identity()), 1e-12 * (1.0 + norm(p) * norm(inverse(p))));
    EXPECT_LT(max_abs_diff(inverse(p) * p, Mat2::identity()), 1e-12 * (1.0 + norm(p) * norm(inverse(p))));
  }
}

TEST(Inverse, SingularThrows) {
  try {
    inverse(Mat2{1.0, 2.0, 2.0, 4.0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMatrix);
  }
}

TEST(DetTrace, Identity) {
  EXPECT_EQ(det(Mat2::identity()), Complex(1.0));
  EXPECT_EQ(trace(Mat2::identity()), Complex(2.0));
}

TEST(DetTrace, DiagonalUnimodular) {
  const Complex l(0.7, -1.3);
  EXPECT_LT(std::abs(det(Mat2::diag(l, 1.0 / l)) - 1.0), 1e-15);
}

TEST(DetTrace, ParabolicFamilyHasTraceTwo) {
  for (int i = 0; i < 20; ++i) {
    const Complex s = rc();
    const Mat2 q{1.0 + 2.0 * s, s * s, -4.0, 1.0 - 2.0 * s};
    EXPECT_LT(std::abs(trace(q) - 2.0), 1e-14);
    EXPECT_LT(std::abs(det(q) - 1.0), 1e-12 * (1.0 + std::norm(s)));
  }
}

TEST(Eigen, Diagonal) {
  const EigenPair e = eigen(Mat2::diag(2.0, 3.0));
  EXPECT_FALSE(e.defective);
  const double d1 = std::abs(e.lambda1 - 2.0) + std::abs(e.lambda2 - 3.0);
  const double d2 = std::abs(e.lambda1 - 3.0) + std::abs(e.lambda2 - 2.0);
  EXPECT_LT(std::min(d1, d2), 1e-14);
}

TEST(Eigen, ShearIsDefective) {
  const EigenPair e = eigen(kShear);
  EXPECT_TRUE(e.defective);
  EXPECT_LT(std::abs(e.lambda1 - 1.0), 1e-12);
  EXPECT_LT(std::abs(e.lambda2 - 1.0), 1e-12);
  EXPECT_LT(std::abs(e.v1[1]), 1e-14);
}

TEST(Eigen, RotationByQuarterTurn) {
  const EigenPair e = eigen(Mat2{0.0, 1.0, -1.0, 0.0});
  const auto roots = oracle::char_roots(0.0, 1.0);  // lambda^2 + 1
  const double d1 = std::abs(e.lambda1 - roots[0]) + std::abs(e.lambda2 - roots[1]);
  const double d2 = std::abs(e.lambda1 - roots[1]) + std::abs(e.lambda2 - roots[0]);
  EXPECT_LT(std::min(d1, d2), 1e-14);
}

TEST(Eigen, ScalarIsNotDefective) {
  const EigenPair e = eigen(Mat2::scalar(Complex(0.3, 0.4)));
  EXPECT_FALSE(e.defective);
}

TEST(Eigen, RandomEigenvectors) {
  for (int i = 0; i < 200; ++i) {
    const Mat2 a = rmat();
    const EigenPair e = eigen(a);
    if (e.defective) continue;
    for (auto [l, v] : {std::pair{e.lambda1, e.v1}, std::pair{e.lambda2, e.v2}}) {
      const Vec2 av = a * v;
      EXPECT_LT(std::abs(av[0] - l * v[0]) + std::abs(av[1] - l * v[1]), 1e-10 * norm(a));
      EXPECT_NEAR(norm2(v), 1.0, 1e-14);
    }
    EXPECT_LT(std::abs(e.lambda1 + e.lambda2 - trace(a)), 1e-8);
    EXPECT_LT(std::abs(e.lambda1 * e.lambda2 - det(a)), 1e-8);
  }
}

TEST(Eigen, StableForNearlyCancellingRoots) {
  // lambda^2 - 1e8 lambda + 1: the small root 1e-8 is lost by the naive formula.
  const Mat2 a{1e8, 1.0, -1.0, 0.0};
  const EigenPair e = eigen(a);
  const Complex small = std::abs(e.lambda1) < std::abs(e.lambda2) ? e.lambda1 : e.lambda2;
  EXPECT_NEAR(small.real(), 1e-8, 1e-20);
}

TEST(JordanNormalizer, BringsToJordanForm) {
  for (int i = 0; i < 50; ++i) {
    const Complex lam = rc();
    const Mat2 t = rmat();
    if (std::abs(det(t)) < 1e-2) continue;
    const Mat2 a = t * Mat2{lam, 1.0, 0.0, lam} * inverse(t);
    const Mat2 j = conjugate(a, jordan_normalizer(a));
    EXPECT_LT(max_abs_diff(j, Mat2{lam, 1.0, 0.0, lam}), 1e-9 * (1.0 + norm(a)));
  }
}

TEST(Conjugate, IdentityAndInvariants) {
  const Mat2 a = rmat();
  EXPECT_LT(max_abs_diff(conjugate(a, Mat2::identity()), a), 1e-15);
  for (int i = 0; i < 50; ++i) {
    const Mat2 t = rmat();
    if (std::abs(det(t)) < 1e-2) continue;
    const Mat2 c = conjugate(a, t);
    EXPECT_LT(std::abs(trace(c) - trace(a)), 1e-10 * (1.0 + norm(t) * norm(inverse(t)) * norm(a)));
    EXPECT_LT(std::abs(det(c) - det(a)), 1e-10 * (1.0 + norm(t) * norm(inverse(t)) * std::norm(norm(a))));
  }
}

TEST(Conjugate, DiagonalScalingKeepsDiagonals) {
  // T = diag(t^{-1/2}, t^{1/2}) fixes diagonal matrices and the diagonal of
  // any other matrix, and rescales the off-diagonal entries reciprocally.
  const Complex l(2.0, 0.5), t(0.3, 1.7);
  const Mat2 tt = Mat2::diag(1.0 / std::sqrt(t), std::sqrt(t));
  const Mat2 d = Mat2::diag(l, 1.0 / l);
  EXPECT_LT(max_abs_diff(conjugate(d, tt), d), 1e-14);
  const Mat2 q = rmat();
  const Mat2 c = conjugate(q, tt);
  EXPECT_LT(std::abs(c.a11 - q.a11) + std::abs(c.a22 - q.a22), 1e-14);
  EXPECT_LT(std::abs(c.a12 * c.a21 - q.a12 * q.a21), 1e-13);
  EXPECT_LT(std::abs(c.a12 - q.a12 * t), 1e-13);
}

TEST(FormAction, Identity) {
  const HermitianForm h{2.0, Complex(0.5, -1.0), -3.0};
  const HermitianForm out = form_action(Mat2::identity(), h);
  EXPECT_DOUBLE_EQ(out.h11, h.h11);
  EXPECT_DOUBLE_EQ(out.h22, h.h22);
  EXPECT_EQ(out.h12, h.h12);
}

TEST(FormAction, RealUnimodularPreservesStandardIndefinite) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    double a = n(rng), b = n(rng), c = n(rng), d = n(rng);
    double dt = a * d - b * c;
    if (std::abs(dt) < 0.1) continue;
    if (dt < 0) {
      std::swap(a, b);
      std::swap(c, d);
      dt = -dt;
    }
    const double s = 1.0 / std::sqrt(dt);
    const Mat2 g{a * s, b * s, c * s, d * s};
    EXPECT_LT(form_residual(g, HermitianForm::standard_indefinite()), 1e-12 * std::norm(norm(g)));
  }
}

TEST(FormAction, ScalarPhaseCancels) {
  const HermitianForm h{1.0, Complex(0.2, 0.3), -0.5};
  EXPECT_LT(form_residual(Mat2::scalar(std::polar(1.0, 1.1)), h), 1e-15);
}

TEST(FormAction, DeterminantScalesByModulusSquared) {
  const HermitianForm h{1.5, Complex(0.2, -0.7), -0.4};
  for (int i = 0; i < 20; ++i) {
    const Mat2 g = rmat();
    EXPECT_NEAR(form_action(g, h).det(), std::norm(det(g)) * h.det(), 1e-10 * (1.0 + std::pow(norm(g), 4)));
  }
}

TEST(FormAction, Composes) {
  const HermitianForm h{1.5, Complex(0.2, -0.7), -0.4};
  for (int i = 0; i < 20; ++i) {
    const Mat2 g1 = rmat(), g2 = rmat();
    const HermitianForm a = form_action(g2, form_action(g1, h));
    const HermitianForm b = form_action(g1 * g2, h);
    const double scale = 1.0 + std::norm(norm(g1) * norm(g2));
    EXPECT_NEAR(a.h11, b.h11, 1e-10 * scale);
    EXPECT_NEAR(a.h22, b.h22, 1e-10 * scale);
    EXPECT_LT(std::abs(a.h12 - b.h12), 1e-10 * scale);
  }
}

TEST(HermitianForm, PullBackTransportsPreservation) {
  // g0 preserves H0; g = t g0 t^{-1} preserves pull_back(H0, t).
  const Mat2 g0{2.0, 1.0, 3.0, 2.0};
  const Mat2 t{Complex(1, 1), 0.5, Complex(0, -2), 1.0};
  const Mat2 g = t * g0 * inverse(t);
  EXPECT_LT(form_residual(g, pull_back(HermitianForm::standard_indefinite(), t)), 1e-12);
}

TEST(HermitianForm, Nondegeneracy) {
  EXPECT_TRUE(HermitianForm::identity().is_nondegenerate());
  EXPECT_TRUE(HermitianForm::standard_indefinite().is_nondegenerate());
  EXPECT_FALSE((HermitianForm{1.0, 1.0, 1.0}).is_nondegenerate());
}

TEST(SqrtDetRescale, Cases) {
  const Mat2 unimodular{2.0, 1.0, 3.0, 2.0};
  EXPECT_LT(max_abs_diff(sqrt_det_rescale(unimodular), unimodular), 1e-15);
  const Mat2 r = sqrt_det_rescale(Mat2::diag(Complex(0, 2), Complex(0, 2)));
  EXPECT_LT(max_abs_diff(r, Mat2::identity()), 1e-15);
  for (int i = 0; i < 50; ++i) {
    const Mat2 g = rmat();
    const Mat2 s = sqrt_det_rescale(g);
    EXPECT_LT(std::abs(det(s) - 1.0), 1e-12);
    const Mat2 ss = sqrt_det_rescale(s);
    EXPECT_LT(std::min(max_abs_diff(ss, s), max_abs_diff(ss, -s)), 1e-12 * norm(s));
  }
}

TEST(DetTrace, Multiplicative) {
  for (int i = 0; i < 100; ++i) {
    const Mat2 a = rmat(), b = rmat();
    EXPECT_LT(std::abs(det(a * b) - det(a) * det(b)), 1e-10 * (1.0 + std::norm(norm(a) * norm(b))));
  }
}
