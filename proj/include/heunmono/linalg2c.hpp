#pragma once

// Dense 2x2 complex linear algebra. Everything here is small, inline and
// value-typed; monodromy matrices, generators and Hermitian forms all flow
// through these types.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <ostream>

#include "heunmono/error.hpp"

namespace heunmono {

using Complex = std::complex<double>;
using Vec2 = std::array<Complex, 2>;

inline constexpr Complex kI{0.0, 1.0};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double norm2(const Vec2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

struct Mat2 {
  Complex a11{}, a12{}, a21{}, a22{};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 scalar(Complex s) { return {s, 0.0, 0.0, s}; }
  static constexpr Mat2 diag(Complex d1, Complex d2) { return {d1, 0.0, 0.0, d2}; }
  // Matrix whose columns are c1 and c2.
  static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
    return {c1[0], c2[0], c1[1], c2[1]};
  }

  Vec2 col(int j) const { return j == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }

  Mat2 adjoint() const { return {std::conj(a11), std::conj(a21), std::conj(a12), std::conj(a22)}; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }

  bool finite() const { return is_finite(a11) && is_finite(a12) && is_finite(a21) && is_finite(a22); }

  Mat2& operator+=(const Mat2& o) {
    a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22;
    return *this;
  }
  Mat2& operator*=(Complex s) {
    a11 *= s; a12 *= s; a21 *= s; a22 *= s;
    return *this;
  }

  friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend Mat2 operator-(const Mat2& a) { return {-a.a11, -a.a12, -a.a21, -a.a22}; }
  friend Mat2 operator*(Mat2 a, Complex s) { return a *= s; }
  friend Mat2 operator*(Complex s, Mat2 a) { return a *= s; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a.a11 * v[0] + a.a12 * v[1], a.a21 * v[0] + a.a22 * v[1]};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Mat2& m) {
  return os << "[[" << m.a11 << ", " << m.a12 << "], [" << m.a21 << ", " << m.a22 << "]]";
}

inline Mat2 mul(const Mat2& a, const Mat2& b) { return a * b; }
inline Complex det(const Mat2& a) { return a.a11 * a.a22 - a.a12 * a.a21; }
inline Complex trace(const Mat2& a) { return a.a11 + a.a22; }

// Frobenius norm.
inline double norm(const Mat2& a) {
  return std::sqrt(std::norm(a.a11) + std::norm(a.a12) + std::norm(a.a21) + std::norm(a.a22));
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a21 - b.a21),
                   std::abs(a.a22 - b.a22)});
}

inline Mat2 inverse(const Mat2& a, double singular_tol = 1e-14) {
  const Complex d = det(a);
  if (std::abs(d) <= singular_tol) throw Error(ErrorCode::SingularMatrix, "inverse: matrix is singular");
  const Complex inv = 1.0 / d;
  return {a.a22 * inv, -a.a12 * inv, -a.a21 * inv, a.a11 * inv};
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

// True when a is a multiple of the identity, relative to its own size.
inline bool is_scalar(const Mat2& a, double tol = 1e-8) {
  const double scale = std::max(1.0, norm(a));
  return std::abs(a.a12) <= tol * scale && std::abs(a.a21) <= tol * scale &&
         std::abs(a.a11 - a.a22) <= tol * scale;
}

/// Returns t^{-1} a t.
inline Mat2 conjugate(const Mat2& a, const Mat2& t) { return inverse(t) * a * t; }

/// Returns g / sqrt(det g) on the principal branch. The result is only
/// meaningful up to sign; consumers must be even in that sign.
inline Mat2 sqrt_det_rescale(const Mat2& g, double singular_tol = 1e-14) {
  const Complex d = det(g);
  if (std::abs(d) <= singular_tol) throw Error(ErrorCode::SingularMatrix, "sqrt_det_rescale: matrix is singular");
  return g * (1.0 / std::sqrt(d));
}

// ---------------------------------------------------------------------------
// Hermitian forms

/// Nondegenerate 2x2 Hermitian matrix [[h11, h12], [conj(h12), h22]]. Storage
/// makes H = H^dagger hold exactly; nondegeneracy is checked by callers that
/// construct forms from data (see `is_nondegenerate`).
struct HermitianForm {
  double h11 = 1.0;
  Complex h12{};
  double h22 = 1.0;

  static constexpr HermitianForm identity() { return {1.0, 0.0, 1.0}; }
  // H0 = [[0, i], [-i, 0]], the form whose unitary group is S^1 x SL(2,R).
  static constexpr HermitianForm standard_indefinite() { return {0.0, kI, 0.0}; }

  static HermitianForm from_matrix(const Mat2& m) {
    return {m.a11.real(), 0.5 * (m.a12 + std::conj(m.a21)), m.a22.real()};
  }

  Mat2 matrix() const { return {h11, h12, std::conj(h12), h22}; }
  double det() const { return h11 * h22 - std::norm(h12); }
  double norm() const { return std::sqrt(h11 * h11 + h22 * h22 + 2.0 * std::norm(h12)); }
  bool is_nondegenerate(double tol = 1e-10) const { return std::abs(det()) > tol; }

  HermitianForm scaled(double s) const { return {h11 * s, h12 * s, h22 * s}; }
};

inline std::ostream& operator<<(std::ostream& os, const HermitianForm& h) {
  return os << "H[" << h.h11 << ", " << h.h12 << ", " << h.h22 << "]";
}

/// Returns g^dagger h g.
inline HermitianForm form_action(const Mat2& g, const HermitianForm& h) {
  return HermitianForm::from_matrix(g.adjoint() * h.matrix() * g);
}

/// Relative amount by which g fails to preserve h.
inline double form_residual(const Mat2& g, const HermitianForm& h) {
  const Mat2 moved = g.adjoint() * h.matrix() * g;
  return norm(moved - h.matrix()) / h.norm();
}

/// Pullback of a form through a change of basis: if t^{-1} g t preserves h,
/// then g preserves the returned form.
inline HermitianForm pull_back(const HermitianForm& h, const Mat2& t) {
  const Mat2 ti = inverse(t);
  return HermitianForm::from_matrix(ti.adjoint() * h.matrix() * ti);
}

// ---------------------------------------------------------------------------
// Eigen-decomposition

struct EigenPair {
  Complex lambda1{}, lambda2{};
  Vec2 v1{}, v2{};
  bool defective = false;
};

namespace detail {

inline Vec2 normalized(Vec2 v) {
  const double n = norm2(v);
  return {v[0] / n, v[1] / n};
}

// Unit vector spanning ker(a - lambda I), assuming that kernel is nontrivial
// and the matrix a - lambda I is not (numerically) zero.
inline Vec2 null_vector(const Mat2& a, Complex lambda) {
  const Complex p1 = a.a11 - lambda, q1 = a.a12;
  const Complex p2 = a.a21, q2 = a.a22 - lambda;
  const double r1 = std::norm(p1) + std::norm(q1);
  const double r2 = std::norm(p2) + std::norm(q2);
  if (r1 >= r2) return normalized({-q1, p1});
  return normalized({-q2, p2});
}

}  // namespace detail

/// Eigenvalues from the characteristic polynomial using the cancellation-free
/// form of the quadratic formula, with unit eigenvectors. Coincident
/// eigenvalues with a one-dimensional eigenspace set `defective`, in which
/// case v1 == v2.
inline EigenPair eigen(const Mat2& a, double tol = 1e-8) {
  const Complex tr = trace(a);
  const Complex d = det(a);
  const Complex disc = std::sqrt(tr * tr - 4.0 * d);
  const Complex big = std::abs(tr + disc) >= std::abs(tr - disc) ? tr + disc : tr - disc;

  EigenPair out;
  if (std::abs(big) == 0.0) {
    out.lambda1 = out.lambda2 = 0.0;
  } else {
    out.lambda1 = 0.5 * big;
    out.lambda2 = d / out.lambda1;
  }

  const double scale = 1.0 + norm(a);
  if (std::abs(out.lambda1 - out.lambda2) <= tol * scale) {
    const Complex mid = 0.5 * tr;
    const Mat2 shifted = a - Mat2::scalar(mid);
    if (norm(shifted) <= tol * scale) {
      out.v1 = {1.0, 0.0};
      out.v2 = {0.0, 1.0};
    } else {
      out.defective = true;
      out.v1 = out.v2 = detail::null_vector(a, mid);
    }
    return out;
  }
  out.v1 = detail::null_vector(a, out.lambda1);
  out.v2 = detail::null_vector(a, out.lambda2);
  return out;
}

/// Basis t with t^{-1} a t = [[lambda, 1], [0, lambda]] for a non-scalar
/// matrix with a double eigenvalue.
inline Mat2 jordan_normalizer(const Mat2& a) {
  const Complex lambda = 0.5 * trace(a);
  const Mat2 n = a - Mat2::scalar(lambda);
  // Pick w outside ker(n); then v = n w spans ker(n) because n^2 = 0.
  Vec2 w{0.0, 1.0};
  if (norm2(n * w) < norm2(n * Vec2{1.0, 0.0})) w = {1.0, 0.0};
  const Vec2 v = n * w;
  return Mat2::from_columns(v, w);
}

}  // namespace heunmono
