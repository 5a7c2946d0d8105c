#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "heunmono/error.hpp"
#include "heunmono/linalg2c.hpp"

namespace heunmono {

/// Parameters of Heun's equation
///   y'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) y'
///       + (alpha beta z - B/4) / (z (z-1) (z-a)) y = 0.
struct HeunParams {
  Complex gamma{0.5}, delta{0.5}, epsilon{0.5};
  Complex alpha{0.25}, beta{0.25};
  Complex a{-1.0};
  Complex B{0.0};

  /// gamma = delta = epsilon = 1/2, alpha = beta = 1/4.
  static HeunParams lame(Complex a = -1.0, Complex B = 0.0) { return {0.5, 0.5, 0.5, 0.25, 0.25, a, B}; }

  /// gamma = delta = epsilon = g with alpha = beta fixed by the Fuchs relation.
  static HeunParams symmetric(double g, Complex a = -1.0, Complex B = 0.0) {
    const double ab = 0.5 * (3.0 * g - 1.0);
    return {g, g, g, ab, ab, a, B};
  }

  HeunParams with_accessory(Complex b) const {
    HeunParams p = *this;
    p.B = b;
    return p;
  }

  double fuchs_defect() const { return std::abs(gamma + delta + epsilon - (1.0 + alpha + beta)); }

  bool is_lame(double tol = 1e-12) const {
    return std::abs(gamma - 0.5) < tol && std::abs(delta - 0.5) < tol && std::abs(epsilon - 0.5) < tol;
  }

  /// Throws InvalidInput when the Fuchs relation fails or a collides with 0, 1.
  void validate(double fuchs_tol = 1e-10) const {
    for (Complex c : {gamma, delta, epsilon, alpha, beta, a, B})
      if (!is_finite(c)) throw Error(ErrorCode::InvalidInput, "HeunParams: non-finite parameter");
    if (fuchs_defect() >= fuchs_tol)
      throw Error(ErrorCode::InvalidInput, "HeunParams: gamma + delta + epsilon != 1 + alpha + beta");
    if (std::abs(a) < 1e-12 || std::abs(a - 1.0) < 1e-12)
      throw Error(ErrorCode::InvalidInput, "HeunParams: singular point a coincides with 0 or 1");
  }

  /// Monodromy eigenvalues about 0, 1, a: {1, exp(-2 pi i g)} for g = gamma, delta, epsilon.
  std::array<Complex, 3> nontrivial_eigenvalues() const {
    const auto e = [](Complex g) { return std::exp(-2.0 * M_PI * kI * g); };
    return {e(gamma), e(delta), e(epsilon)};
  }
};

}  // namespace heunmono
