#pragma once

// Weierstrass elliptic functions for the curve attached to Heun's equation.
//
// The singular points {0, 1, a} of the algebraic equation become the branch
// values of wp through the shift wp(z) = x - (1 + a)/3, which puts the curve in
// the form wp'^2 = 4 x (x - 1) (x - a) with e1 + e2 + e3 = 0. Periods come
// from complete elliptic integrals evaluated by the arithmetic-geometric mean;
// wp, wp' and zeta are evaluated from their Laurent series near the origin and
// carried back out by the duplication formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "heunmono/error.hpp"
#include "heunmono/heun_params.hpp"
#include "heunmono/linalg2c.hpp"

namespace heunmono {

inline constexpr int kLaurentTerms = 24;

struct EllipticData {
  Complex a{};
  // Reduced, positively oriented half-periods: |omega1| <= |omega2|,
  // Im(omega2 / omega1) > 0, omega3 = omega1 + omega2.
  Complex omega1{}, omega2{}, omega3{};
  // Branch values e_i = wp(omega_i).
  Complex e1{}, e2{}, e3{};
  // Quasi-periods eta_i = zeta(omega_i), so zeta(z + 2 omega_i) = zeta(z) + 2 eta_i.
  Complex eta1{}, eta2{};
  // Area of the fundamental parallelogram of the full lattice, 4 Im(conj(omega1) omega2).
  double area = 0.0;
  Complex g2{}, g3{};
  // wp = x + x_offset maps the algebraic variable onto wp.
  Complex x_offset{};
  // wp(z) = 1/z^2 + sum_{k>=2} laurent[k] z^{2k-2}.
  std::array<Complex, kLaurentTerms + 1> laurent{};

  Complex wp_of_x(Complex x) const { return x + x_offset; }
  Complex x_of_wp(Complex w) const { return w - x_offset; }
  Complex half_period(int i) const {
    switch (i) {
      case 0: return 0.0;
      case 1: return omega1;
      case 2: return omega2;
      default: return omega3;
    }
  }
};

/// Arithmetic-geometric mean with the "right" square root at every step
/// (|a_n - b_n| <= |a_n + b_n|), which selects the principal value of the
/// complete elliptic integral.
inline Complex agm(Complex a, Complex b, double tol = 1e-15, int max_iter = 64) {
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(a - b) <= tol * std::abs(a)) return a;
    const Complex m = 0.5 * (a + b);
    Complex g = std::sqrt(a * b);
    if (std::abs(m - g) > std::abs(m + g)) g = -g;
    a = m;
    b = g;
  }
  throw Error(ErrorCode::AgmNonConvergence, "agm: iteration did not converge");
}

namespace detail {

struct WpTriple {
  Complex wp, dwp, zeta;
};

inline std::array<Complex, kLaurentTerms + 1> laurent_coefficients(Complex g2, Complex g3) {
  std::array<Complex, kLaurentTerms + 1> c{};
  c[2] = g2 / 20.0;
  c[3] = g3 / 28.0;
  for (int k = 4; k <= kLaurentTerms; ++k) {
    Complex s = 0.0;
    for (int m = 2; m <= k - 2; ++m) s += c[m] * c[k - m];
    c[k] = 3.0 / ((2.0 * k + 1.0) * (k - 3.0)) * s;
  }
  return c;
}

inline WpTriple laurent_eval(const std::array<Complex, kLaurentTerms + 1>& c, Complex z) {
  const Complex z2 = z * z;
  Complex wp = 0.0, dwp = 0.0, zeta = 0.0;
  Complex pow = z2;  // z^{2k-2} for k = 2
  for (int k = 2; k <= kLaurentTerms; ++k) {
    wp += c[k] * pow;
    dwp += (2.0 * k - 2.0) * c[k] * pow / z;
    zeta -= c[k] * pow * z / (2.0 * k - 1.0);
    pow *= z2;
  }
  return {1.0 / z2 + wp, -2.0 / (z2 * z) + dwp, 1.0 / z + zeta};
}

// Evaluates at z (no lattice reduction) by halving into the Laurent disc and
// doubling back out.
inline WpTriple duplicate_eval(const std::array<Complex, kLaurentTerms + 1>& c, Complex g2, Complex z,
                               double disc_radius) {
  int n = 0;
  Complex w = z;
  while (std::abs(w) > disc_radius) {
    w *= 0.5;
    ++n;
  }
  WpTriple t = laurent_eval(c, w);
  for (int i = 0; i < n; ++i) {
    const Complex p2 = 6.0 * t.wp * t.wp - 0.5 * g2;
    const Complex p3 = 12.0 * t.wp * t.dwp;
    const Complex d2 = t.dwp * t.dwp;
    const WpTriple next{-2.0 * t.wp + p2 * p2 / (4.0 * d2),
                        -t.dwp + p2 * p3 / (4.0 * d2) - p2 * p2 * p2 / (4.0 * d2 * t.dwp),
                        2.0 * t.zeta + p2 / (2.0 * t.dwp)};
    t = next;
  }
  return t;
}

inline double laurent_disc(const EllipticData& d) { return 0.25 * std::abs(d.omega1); }

// Reduced, positively oriented basis of the lattice spanned by (u, v), with a
// deterministic choice among equally short vectors: the first vector is the
// shortest one closest to the positive real axis, the second the shortest
// vector completing it to a basis.
inline std::pair<Complex, Complex> reduce_basis(Complex u, Complex v) {
  if (std::abs(u) > std::abs(v)) std::swap(u, v);
  for (int it = 0; it < 200; ++it) {
    v -= std::round((v / u).real()) * u;
    if (std::abs(v) >= std::abs(u) * (1.0 - 1e-14)) break;
    std::swap(u, v);
  }
  struct Combo {
    Complex z;
    int i, j;
  };
  std::vector<Combo> combos;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      if (i != 0 || j != 0) combos.push_back({static_cast<double>(i) * u + static_cast<double>(j) * v, i, j});
  const auto shorter = [](const Combo& x, const Combo& y, double len_tol) {
    const double lx = std::abs(x.z), ly = std::abs(y.z);
    if (std::abs(lx - ly) > len_tol * (lx + ly)) return lx < ly;
    if (std::abs(x.z.real() - y.z.real()) > len_tol * (lx + ly)) return x.z.real() > y.z.real();
    return x.z.imag() > y.z.imag();
  };
  Combo first = combos.front();
  for (const Combo& c : combos)
    if (shorter(c, first, 1e-12)) first = c;
  Combo second{};
  bool found = false;
  for (const Combo& c : combos) {
    if ((c.z / first.z).imag() <= 0.0 || std::abs(first.i * c.j - first.j * c.i) != 1) continue;
    if (!found || shorter(c, second, 1e-12)) {
      second = c;
      found = true;
    }
  }
  return {first.z, second.z};
}

inline double distance_to_cuts(Complex k2) {
  // Cuts of K(k) and K(k') in the k^2 plane: (-inf, 0] and [1, inf).
  const auto dist_ray = [](Complex z, double start, double dir) {
    const double t = (z.real() - start) * dir;
    if (t <= 0.0) return std::abs(z - start);
    return std::abs(z.imag());
  };
  return std::min(dist_ray(k2, 0.0, -1.0), dist_ray(k2, 1.0, 1.0));
}

}  // namespace detail

/// wp, wp' and zeta at z. Throws LatticeProximity within 1e-8 of a lattice point.
inline detail::WpTriple wp_all(Complex z, const EllipticData& d) {
  // z = 2 x omega1 + 2 y omega2 with real x, y.
  const Complex w1 = 2.0 * d.omega1, w2 = 2.0 * d.omega2;
  const double det = (std::conj(w1) * w2).imag();
  const double x = (std::conj(z) * w2).imag() / det;
  const double y = (std::conj(w1) * z).imag() / det;
  const double m = std::round(x), n = std::round(y);
  const Complex z0 = z - m * w1 - n * w2;
  if (std::abs(z0) < 1e-8) throw Error(ErrorCode::LatticeProximity, "wp: argument is a lattice point");
  detail::WpTriple t = detail::duplicate_eval(d.laurent, d.g2, z0, detail::laurent_disc(d));
  t.zeta += 2.0 * m * d.eta1 + 2.0 * n * d.eta2;
  return t;
}

inline Complex wp(Complex z, const EllipticData& d) { return wp_all(z, d).wp; }
inline Complex wp_prime(Complex z, const EllipticData& d) { return wp_all(z, d).dwp; }
inline Complex wzeta(Complex z, const EllipticData& d) { return wp_all(z, d).zeta; }

/// Periods, branch values and quasi-periods of the curve wp'^2 = 4x(x-1)(x-a).
inline EllipticData periods_from_a(Complex a) {
  if (!is_finite(a) || std::abs(a) < 1e-12 || std::abs(a - 1.0) < 1e-12)
    throw Error(ErrorCode::AgmNonConvergence, "periods_from_a: degenerate curve (a near 0 or 1)");

  EllipticData d;
  d.a = a;
  d.x_offset = -(1.0 + a) / 3.0;
  const std::array<Complex, 3> roots{d.wp_of_x(0.0), d.wp_of_x(1.0), d.wp_of_x(a)};
  d.g2 = -4.0 * (roots[0] * roots[1] + roots[0] * roots[2] + roots[1] * roots[2]);
  d.g3 = 4.0 * roots[0] * roots[1] * roots[2];
  d.laurent = detail::laurent_coefficients(d.g2, d.g3);

  // Label the roots (A, B, C) so that k^2 = (B - C) / (A - C) stays away from
  // the branch cuts of K and K'.
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::array<int, 3> best{};
  double best_dist = -1.0;
  for (const auto& p : perms) {
    const Complex k2 = (roots[p[1]] - roots[p[2]]) / (roots[p[0]] - roots[p[2]]);
    const double dist = detail::distance_to_cuts(k2);
    if (dist > best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  const Complex eA = roots[best[0]], eB = roots[best[1]], eC = roots[best[2]];
  const Complex k2 = (eB - eC) / (eA - eC);
  const Complex k = std::sqrt(k2), kp = std::sqrt(1.0 - k2);
  const Complex K = M_PI / (2.0 * agm(1.0, kp));
  const Complex Kp = M_PI / (2.0 * agm(1.0, k));
  const Complex s = std::sqrt(eA - eC);

  const auto [w1, w2] = detail::reduce_basis(K / s, kI * Kp / s);
  d.omega1 = w1;
  d.omega2 = w2;
  d.omega3 = w1 + w2;
  d.area = 4.0 * (std::conj(w1) * w2).imag();

  const double disc = detail::laurent_disc(d);
  const auto snap = [&](Complex value) {
    const auto it = std::min_element(roots.begin(), roots.end(),
                                     [&](Complex p, Complex q) { return std::abs(p - value) < std::abs(q - value); });
    if (std::abs(*it - value) > 1e-7 * (1.0 + std::abs(value)))
      throw Error(ErrorCode::AgmNonConvergence, "periods_from_a: half-period does not hit a branch value");
    return *it;
  };
  const detail::WpTriple t1 = detail::duplicate_eval(d.laurent, d.g2, d.omega1, disc);
  const detail::WpTriple t2 = detail::duplicate_eval(d.laurent, d.g2, d.omega2, disc);
  d.e1 = snap(t1.wp);
  d.e2 = snap(t2.wp);
  d.e3 = -(d.e1 + d.e2);
  d.eta1 = t1.zeta;
  d.eta2 = t2.zeta;

  const Complex legendre = d.eta1 * d.omega2 - d.eta2 * d.omega1;
  if (std::abs(legendre - kI * (M_PI / 2.0)) > 1e-9 * std::max(1.0, std::abs(d.eta1 * d.omega2)))
    throw Error(ErrorCode::AgmNonConvergence, "periods_from_a: Legendre relation violated");
  return d;
}

// ---------------------------------------------------------------------------
// Darboux form and the asymptotic lattice

/// Exponent parameters of the Darboux equation
///   u'' - (sum_i m_i (m_i + 1) wp(z - omega_i)) u = B' u.
struct DarbouxParams {
  std::array<Complex, 4> m{};
  Complex B1{};

  Complex coupling_sum() const {
    Complex s = 0.0;
    for (Complex mi : m) s += mi * (mi + 1.0);
    return s;
  }

  /// Each m_i real, or with real part in (1/2) Z.
  bool unitarity_admissible(double tol = 1e-9) const {
    for (Complex mi : m) {
      const double twice = 2.0 * mi.real();
      if (std::abs(mi.imag()) > tol && std::abs(twice - std::round(twice)) > 2.0 * tol) return false;
    }
    return true;
  }
};

/// m0 = alpha - beta - 1/2, m_i = 1/2 - (gamma, delta, epsilon). B' is left
/// zero: the additive constant relating B and B' is not modelled.
inline DarbouxParams heun_to_darboux_params(const HeunParams& p) {
  return {{p.alpha - p.beta - 0.5, 0.5 - p.gamma, 0.5 - p.delta, 0.5 - p.epsilon}, 0.0};
}

/// Darboux accessory parameter of the Lame equation (gamma = delta = epsilon = 1/2):
/// B' = B + 4 alpha beta wp(x = 0).
inline Complex lame_darboux_accessory(const HeunParams& p, const EllipticData& d) {
  return p.B + 4.0 * p.alpha * p.beta * d.wp_of_x(0.0);
}

/// Generators of the conjugate lattice, scaled by 2 pi / area. The pair
/// (conj(omega1), -conj(omega2)) keeps the positive orientation.
inline std::pair<Complex, Complex> seed_generators(const EllipticData& d) {
  const double scale = 2.0 * M_PI / d.area;
  return {scale * std::conj(d.omega1), -scale * std::conj(d.omega2)};
}

inline Complex lattice_point(const EllipticData& d, int m, int n) {
  const auto [g1, g2] = seed_generators(d);
  return static_cast<double>(m) * g1 + static_cast<double>(n) * g2;
}

inline std::vector<Complex> seed_lattice(const EllipticData& d, const std::vector<std::pair<int, int>>& indices) {
  std::vector<Complex> out;
  out.reserve(indices.size());
  for (const auto& [m, n] : indices) out.push_back(lattice_point(d, m, n));
  return out;
}

/// Index pairs {1, 2, 3} x {-1, 0, 1, 2}.
inline std::vector<std::pair<int, int>> default_seed_indices() {
  std::vector<std::pair<int, int>> out;
  for (int m = 1; m <= 3; ++m)
    for (int n = -1; n <= 2; ++n) out.emplace_back(m, n);
  return out;
}

namespace detail {

// eta_1 conj(omega_2) - eta_2 conj(omega_1) + pi i l0 / conj(l0), with the
// quasi-periods taken as full-period increments zeta(z + 2 omega_i) - zeta(z).
inline Complex asymptotic_bracket(Complex l0, const EllipticData& d) {
  const Complex inc1 = 2.0 * d.eta1, inc2 = 2.0 * d.eta2;
  return inc1 * std::conj(d.omega2) - inc2 * std::conj(d.omega1) + kI * M_PI * l0 / std::conj(l0);
}

}  // namespace detail

/// Leading-order Darboux eigenvalue attached to the lattice point l0:
/// B' = l0^2 - (2 / (i area)) (sum m(m+1)) (eta1 conj(w2) - eta2 conj(w1) + pi i l0/conj(l0)).
inline Complex asymptotic_accessory(Complex l0, const DarbouxParams& m, const EllipticData& d) {
  if (std::abs(l0) == 0.0) throw Error(ErrorCode::ZeroLatticePoint, "asymptotic_accessory: l0 must be nonzero");
  return l0 * l0 - (2.0 / (kI * d.area)) * m.coupling_sum() * detail::asymptotic_bracket(l0, d);
}

/// The same estimate written for sqrt(B'): l0 - (1 / (i area l0)) (sum m(m+1)) (...).
inline Complex asymptotic_sqrt_accessory(Complex l0, const DarbouxParams& m, const EllipticData& d) {
  if (std::abs(l0) == 0.0) throw Error(ErrorCode::ZeroLatticePoint, "asymptotic_accessory: l0 must be nonzero");
  return l0 - (1.0 / (kI * d.area * l0)) * m.coupling_sum() * detail::asymptotic_bracket(l0, d);
}

}  // namespace heunmono
