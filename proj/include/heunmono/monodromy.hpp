#pragma once

// Monodromy of second-order linear ODEs y'' + p(z) y' + q(z) y = 0 by
// fixed-step RK4 transport of a fundamental matrix along closed contours.
//
// Convention: the fundamental matrix Phi = [[y1, y2], [y1', y2']] starts at the
// identity at the base point and the monodromy of a loop is Phi at the end of
// the loop. It maps initial data at the base point to the initial data of the
// continued solutions. Traversing loop A and then loop B gives M_B * M_A; only
// traces, determinants and conjugation-invariant quantities are consumed
// downstream, so this matches the row-vector convention up to conjugation and
// transpose-inverse.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "heunmono/elliptic.hpp"
#include "heunmono/error.hpp"
#include "heunmono/heun_params.hpp"
#include "heunmono/linalg2c.hpp"

namespace heunmono {

inline constexpr double kDefaultStep = 4e-4;
inline constexpr double kDefaultRadius = 0.2;
inline constexpr Complex kDefaultBase{0.0, 1.0};
inline constexpr double kMinPoleDistance = 0.02;

// ---------------------------------------------------------------------------
// Contours

/// Straight segment z0 -> z1, or a circular arc about `center`.
struct PathPiece {
  enum class Kind { Line, Arc } kind = Kind::Line;
  Complex z0{}, z1{};
  Complex center{};
  double radius = 0.0, start_angle = 0.0, sweep = 0.0;

  static PathPiece line(Complex from, Complex to) { return {Kind::Line, from, to, {}, 0.0, 0.0, 0.0}; }
  static PathPiece arc(Complex c, double r, double start, double sweep) {
    return {Kind::Arc, {}, {}, c, r, start, sweep};
  }

  /// Point at parameter t in [0, 1].
  Complex at(double t) const {
    if (kind == Kind::Line) return z0 + (z1 - z0) * t;
    return center + radius * std::exp(kI * (start_angle + sweep * t));
  }
  /// dz/dt.
  Complex velocity(double t) const {
    if (kind == Kind::Line) return z1 - z0;
    return kI * sweep * radius * std::exp(kI * (start_angle + sweep * t));
  }
  double length() const { return kind == Kind::Line ? std::abs(z1 - z0) : std::abs(sweep) * radius; }
  Complex start() const { return at(0.0); }
  Complex end() const { return at(1.0); }

  /// Smallest distance from a point of the piece to w.
  double distance_to(Complex w) const {
    if (kind == Kind::Line) {
      const Complex d = z1 - z0;
      const double len2 = std::norm(d);
      const double t = len2 == 0.0 ? 0.0 : std::clamp(((w - z0) * std::conj(d)).real() / len2, 0.0, 1.0);
      return std::abs(z0 + d * t - w);
    }
    const Complex rel = w - center;
    if (std::abs(sweep) >= 2.0 * M_PI - 1e-12 || std::abs(rel) == 0.0) return std::abs(std::abs(rel) - radius);
    // Angle of w measured along the sweep direction from the start angle.
    double phi = std::arg(rel) - start_angle;
    if (sweep < 0.0) phi = -phi;
    phi = std::fmod(phi, 2.0 * M_PI);
    if (phi < 0.0) phi += 2.0 * M_PI;
    if (phi <= std::abs(sweep)) return std::abs(std::abs(rel) - radius);
    return std::min(std::abs(start() - w), std::abs(end() - w));
  }
};

struct Contour {
  Complex base{};
  std::vector<PathPiece> pieces;
  double step = kDefaultStep;

  Complex end() const { return pieces.empty() ? base : pieces.back().end(); }
  double length() const {
    double s = 0.0;
    for (const PathPiece& p : pieces) s += p.length();
    return s;
  }
  double distance_to(Complex w) const {
    double d = std::abs(base - w);
    for (const PathPiece& p : pieces) d = std::min(d, p.distance_to(w));
    return d;
  }

  /// Throws unless the path is closed, the step is usable, and every point
  /// keeps at least `min_distance` from each singularity.
  void validate(std::span<const Complex> singularities, double min_distance = kMinPoleDistance) const {
    if (!(step > 1e-12) || !std::isfinite(step)) throw Error(ErrorCode::StepUnderflow, "contour: step too small");
    if (std::abs(end() - base) > 1e-12) throw Error(ErrorCode::InvalidInput, "contour: path is not closed");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
      if (std::abs(pieces[i].end() - pieces[i + 1].start()) > 1e-12)
        throw Error(ErrorCode::InvalidInput, "contour: pieces are not joined");
    for (Complex s : singularities)
      if (distance_to(s) < min_distance)
        throw Error(ErrorCode::PoleProximity, "contour: path passes too close to a singular point");
  }
};

/// Base -> rightmost point of the circle |z - pole| = radius, once around
/// counter-clockwise, and back along the same segment.
inline Contour standard_contour(Complex pole, Complex base = kDefaultBase, double radius = kDefaultRadius,
                                double step = kDefaultStep) {
  if (!(radius > 0.0) || std::abs(pole - base) <= radius)
    throw Error(ErrorCode::ContourTooLarge, "standard_contour: base point lies inside the circle");
  const Complex touch = pole + radius;
  Contour c;
  c.base = base;
  c.step = step;
  c.pieces = {PathPiece::line(base, touch), PathPiece::arc(pole, radius, 0.0, 2.0 * M_PI),
              PathPiece::line(touch, base)};
  return c;
}

/// Winding number of the contour about w, from accumulated argument changes.
inline int winding_number(const Contour& c, Complex w, int samples_per_piece = 2000) {
  double total = 0.0;
  Complex prev = c.base - w;
  for (const PathPiece& p : c.pieces)
    for (int k = 1; k <= samples_per_piece; ++k) {
      const Complex cur = p.at(static_cast<double>(k) / samples_per_piece) - w;
      total += std::arg(cur / prev);
      prev = cur;
    }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// ---------------------------------------------------------------------------
// Transport

/// Coefficients of y'' + p y' + q y = 0 at a point.
struct OdeCoefficients {
  Complex p{}, q{};
};

namespace detail {

// Phi' = A Phi with A = v [[0, 1], [-q, -p]] and v = dz/dt.
inline Mat2 apply_companion(Complex v, const OdeCoefficients& c, const Mat2& phi) {
  return {v * phi.a21, v * phi.a22, -v * (c.q * phi.a11 + c.p * phi.a21), -v * (c.q * phi.a12 + c.p * phi.a22)};
}

inline int steps_for(const PathPiece& piece, double step) {
  return std::max(1, static_cast<int>(std::ceil(piece.length() / step)));
}

}  // namespace detail

/// Fundamental matrix at the end of the contour for the equation with
/// coefficients `coeffs(z) -> OdeCoefficients`, starting from the identity.
template <class Coeffs>
Mat2 transport(const Contour& contour, const Coeffs& coeffs) {
  if (!(contour.step > 1e-12) || !std::isfinite(contour.step))
    throw Error(ErrorCode::StepUnderflow, "transport: step too small");
  Mat2 phi = Mat2::identity();
  for (const PathPiece& piece : contour.pieces) {
    const int n = detail::steps_for(piece, contour.step);
    const double h = 1.0 / n;
    for (int k = 0; k < n; ++k) {
      const double t = k * h;
      const OdeCoefficients c0 = coeffs(piece.at(t));
      const OdeCoefficients cm = coeffs(piece.at(t + 0.5 * h));
      const OdeCoefficients c1 = coeffs(piece.at(t + h));
      const Complex v0 = piece.velocity(t), vm = piece.velocity(t + 0.5 * h), v1 = piece.velocity(t + h);
      const Mat2 k1 = detail::apply_companion(v0, c0, phi);
      const Mat2 k2 = detail::apply_companion(vm, cm, phi + k1 * (0.5 * h));
      const Mat2 k3 = detail::apply_companion(vm, cm, phi + k2 * (0.5 * h));
      const Mat2 k4 = detail::apply_companion(v1, c1, phi + k3 * h);
      phi += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Heun's equation

/// Throws PoleProximity within 1e-6 of a finite singular point.
inline OdeCoefficients heun_coefficients(Complex z, const HeunParams& p) {
  const Complex z1 = z - 1.0, za = z - p.a;
  if (std::abs(z) < 1e-6 || std::abs(z1) < 1e-6 || std::abs(za) < 1e-6)
    throw Error(ErrorCode::PoleProximity, "heun: evaluation at a singular point");
  return {p.gamma / z + p.delta / z1 + p.epsilon / za, (p.alpha * p.beta * z - 0.25 * p.B) / (z * z1 * za)};
}

/// (y', y'') for the state (y, y').
inline Vec2 heun_rhs(Complex z, const Vec2& state, const HeunParams& p) {
  const OdeCoefficients c = heun_coefficients(z, p);
  return {state[1], -c.p * state[1] - c.q * state[0]};
}

inline Mat2 transport(const Contour& contour, const HeunParams& p) {
  contour.validate(std::array<Complex, 3>{0.0, 1.0, p.a});
  return transport(contour, [&p](Complex z) { return heun_coefficients(z, p); });
}

struct MonodromyOptions {
  Complex base = kDefaultBase;
  double radius = kDefaultRadius;
  double step = kDefaultStep;
  double exponent_tol = 1e-4;
  double unimodular_tol = 1e-6;
  bool validate_exponents = true;
};

/// The three loops about 0, 1 and a, checked against the other singular points.
inline std::array<Contour, 3> heun_contours(const HeunParams& p, const MonodromyOptions& opt = {}) {
  const std::array<Complex, 3> poles{0.0, 1.0, p.a};
  std::array<Contour, 3> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j)
      if (j != i && std::abs(poles[j] - poles[i]) <= opt.radius + kMinPoleDistance)
        throw Error(ErrorCode::ContourTooLarge, "heun_contours: another singular point lies inside the loop");
    out[i] = standard_contour(poles[i], opt.base, opt.radius, opt.step);
    out[i].validate(poles);
  }
  return out;
}

/// Transport tables for Heun's equation with every parameter but B fixed. The
/// coefficients are affine in B, so the path-dependent parts are evaluated
/// once per stage point and reused for every accessory parameter.
class HeunLoopTable {
 public:
  HeunLoopTable(const Contour& contour, const HeunParams& p) {
    contour.validate(std::array<Complex, 3>{0.0, 1.0, p.a});
    for (const PathPiece& piece : contour.pieces) {
      const int n = detail::steps_for(piece, contour.step);
      const double h = 1.0 / n;
      Segment seg;
      seg.h = h;
      seg.stages.reserve(2 * n + 1);
      for (int k = 0; k <= 2 * n; ++k) {
        const double t = 0.5 * h * k;
        const Complex z = piece.at(t), v = piece.velocity(t);
        const Complex z1 = z - 1.0, za = z - p.a;
        const Complex inv = 1.0 / (z * z1 * za);
        seg.stages.push_back({v, v * (p.gamma / z + p.delta / z1 + p.epsilon / za), v * p.alpha * p.beta * z * inv,
                              v * 0.25 * inv});
      }
      segments_.push_back(std::move(seg));
    }
  }

  Mat2 transport(Complex B) const {
    Mat2 phi = Mat2::identity();
    for (const Segment& seg : segments_) {
      const double h = seg.h;
      const std::size_t n = (seg.stages.size() - 1) / 2;
      for (std::size_t k = 0; k < n; ++k) {
        const Stage& s0 = seg.stages[2 * k];
        const Stage& sm = seg.stages[2 * k + 1];
        const Stage& s1 = seg.stages[2 * k + 2];
        const Mat2 k1 = apply(s0, B, phi);
        const Mat2 k2 = apply(sm, B, phi + k1 * (0.5 * h));
        const Mat2 k3 = apply(sm, B, phi + k2 * (0.5 * h));
        const Mat2 k4 = apply(s1, B, phi + k3 * h);
        phi += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
      }
    }
    return phi;
  }

 private:
  // v, v p(z), v alpha beta z / D(z), v / (4 D(z)) with D = z (z-1) (z-a).
  struct Stage {
    Complex v, vp, vq0, vqb;
  };
  struct Segment {
    double h = 0.0;
    std::vector<Stage> stages;
  };

  static Mat2 apply(const Stage& s, Complex B, const Mat2& phi) {
    const Complex vq = s.vq0 - B * s.vqb;
    return {s.v * phi.a21, s.v * phi.a22, -(vq * phi.a11 + s.vp * phi.a21), -(vq * phi.a12 + s.vp * phi.a22)};
  }

  std::vector<Segment> segments_;
};

struct MonodromyTriple {
  Mat2 P, Q, R;     // loops about 0, 1, a
  Mat2 P0, Q0, R0;  // exp(pi i gamma) P, exp(pi i delta) Q, exp(pi i epsilon) R
  Complex base{};
  // Distance of the eigenvalues of P, Q, R from {1, exp(-2 pi i g)}.
  std::array<double, 3> exponent_residuals{};

  /// Loop about all three finite singular points (the inverse loop about
  /// infinity), traversed in the order P, Q, R.
  Mat2 total() const { return R * Q * P; }
};

/// Distance between the eigenvalue pair of m and {1, lambda}, minimized over
/// the two pairings.
inline double eigenvalue_residual(const Mat2& m, Complex lambda) {
  const EigenPair ep = eigen(m);
  const double d1 = std::max(std::abs(ep.lambda1 - 1.0), std::abs(ep.lambda2 - lambda));
  const double d2 = std::max(std::abs(ep.lambda2 - 1.0), std::abs(ep.lambda1 - lambda));
  return std::min(d1, d2);
}

/// Finishes a triple from raw loop matrices: rescaling and exponent checks.
inline MonodromyTriple assemble_triple(const Mat2& P, const Mat2& Q, const Mat2& R, const HeunParams& p,
                                       const MonodromyOptions& opt) {
  MonodromyTriple t;
  t.P = P;
  t.Q = Q;
  t.R = R;
  t.base = opt.base;
  const auto phase = [](Complex g) { return std::exp(M_PI * kI * g); };
  t.P0 = P * phase(p.gamma);
  t.Q0 = Q * phase(p.delta);
  t.R0 = R * phase(p.epsilon);
  const auto lam = p.nontrivial_eigenvalues();
  t.exponent_residuals = {eigenvalue_residual(P, lam[0]), eigenvalue_residual(Q, lam[1]),
                          eigenvalue_residual(R, lam[2])};
  if (opt.validate_exponents) {
    for (double r : t.exponent_residuals)
      if (!(r <= opt.exponent_tol))
        throw Error(ErrorCode::ExponentMismatch, "monodromy_triple: local exponents not reproduced");
    for (const Mat2* m : {&t.P0, &t.Q0, &t.R0})
      if (!(std::abs(det(*m) - 1.0) <= opt.unimodular_tol))
        throw Error(ErrorCode::ExponentMismatch, "monodromy_triple: rescaled matrix is not unimodular");
  }
  return t;
}

/// Monodromy of Heun's equation about 0, 1 and a from the common base point.
inline MonodromyTriple monodromy_triple(const HeunParams& p, const MonodromyOptions& opt = {}) {
  p.validate();
  const auto contours = heun_contours(p, opt);
  std::array<Mat2, 3> m;
  for (int i = 0; i < 3; ++i) m[i] = HeunLoopTable(contours[i], p).transport(p.B);
  return assemble_triple(m[0], m[1], m[2], p, opt);
}

/// tr(M) / sqrt(det M) for the loop about all finite singular points, with
/// the square root taken on the branch exp(-pi i (alpha + beta)) fixed by the
/// exponents at infinity; equals 2 cos(pi (alpha - beta)).
inline Complex infinity_trace_ratio(const MonodromyTriple& t, const HeunParams& p) {
  return trace(t.total()) * std::exp(M_PI * kI * (p.alpha + p.beta));
}

// ---------------------------------------------------------------------------
// Darboux form

/// (u', u'') with u'' = (sum_i m_i (m_i + 1) wp(z - omega_i) + B') u.
inline Vec2 darboux_rhs(Complex z, const Vec2& state, const DarbouxParams& m, Complex B1, const EllipticData& d) {
  Complex pot = B1;
  for (int i = 0; i < 4; ++i) {
    const Complex c = m.m[i] * (m.m[i] + 1.0);
    if (c != 0.0) pot += c * wp(z - d.half_period(i), d);
  }
  return {state[1], pot * state[0]};
}

/// Coefficients of the Darboux equation written as y'' + p y' + q y = 0.
inline OdeCoefficients darboux_coefficients(Complex z, const DarbouxParams& m, Complex B1, const EllipticData& d) {
  const Vec2 r = darboux_rhs(z, {1.0, 0.0}, m, B1, d);
  return {0.0, -r[1]};
}

}  // namespace heunmono
