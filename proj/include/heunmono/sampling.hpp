#pragma once

// Random generator sets drawn from the unitary models and from generic
// GL(2, C), for property tests and the `generate` subcommand.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "heunmono/error.hpp"
#include "heunmono/linalg2c.hpp"
#include "heunmono/unitarity.hpp"

namespace heunmono {

enum class GroupModel { SU2, SL2R, SO2, RealUpperTriangular, ScalarCircle, Generic };

inline std::string_view group_model_name(GroupModel m) {
  switch (m) {
    case GroupModel::SU2: return "su2";
    case GroupModel::SL2R: return "sl2r";
    case GroupModel::SO2: return "so2";
    case GroupModel::RealUpperTriangular: return "upper";
    case GroupModel::ScalarCircle: return "scalar";
    case GroupModel::Generic: return "generic";
  }
  return "unknown";
}

inline GroupModel parse_group_model(std::string_view s) {
  for (GroupModel m : {GroupModel::SU2, GroupModel::SL2R, GroupModel::SO2, GroupModel::RealUpperTriangular,
                       GroupModel::ScalarCircle, GroupModel::Generic})
    if (group_model_name(m) == s) return m;
  throw Error(ErrorCode::InvalidInput, "unknown group model");
}

/// Case a model group falls into when its generators are in general position.
inline GroupCase expected_case(GroupModel m) {
  switch (m) {
    case GroupModel::SU2:
    case GroupModel::SL2R: return GroupCase::Irreducible;
    case GroupModel::SO2: return GroupCase::AbelianReducible;
    case GroupModel::RealUpperTriangular: return GroupCase::NonabelianReducible;
    case GroupModel::ScalarCircle: return GroupCase::Scalar;
    case GroupModel::Generic: return GroupCase::Irreducible;
  }
  return GroupCase::Irreducible;
}

class GroupSampler {
 public:
  explicit GroupSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Complex cnormal() { return {normal(), normal()}; }
  Complex phase() { return std::polar(1.0, uniform(-M_PI, M_PI)); }

  /// Well-conditioned random change of basis.
  Mat2 basis() {
    for (;;) {
      const Mat2 t{cnormal(), cnormal(), cnormal(), cnormal()};
      const double cond = norm(t) * norm(inverse(t, 0.0));
      if (std::abs(det(t)) > 0.2 && cond < 20.0) return t;
    }
  }

  Mat2 su2() {
    Complex a{normal(), normal()}, b{normal(), normal()};
    const double s = std::sqrt(std::norm(a) + std::norm(b));
    a /= s;
    b /= s;
    return {a, b, -std::conj(b), std::conj(a)};
  }

  Mat2 sl2r() {
    for (;;) {
      const double a = normal(), b = normal(), c = normal(), d = normal();
      const double dt = a * d - b * c;
      if (std::abs(dt) < 0.1) continue;
      const double s = 1.0 / std::sqrt(std::abs(dt));
      // Swapping columns flips the sign of a negative determinant.
      if (dt > 0) return {a * s, b * s, c * s, d * s};
      return {b * s, a * s, d * s, c * s};
    }
  }

  Mat2 so2() {
    const double t = uniform(-M_PI, M_PI);
    return {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)};
  }

  Mat2 real_upper() {
    const double a = std::exp(uniform(-1.0, 1.0)) * (uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    return {a, normal(), 0.0, 1.0 / a};
  }

  Mat2 generic() { return {cnormal(), cnormal(), cnormal(), cnormal()}; }

  /// n generators from the model, each times a unit phase, all conjugated by
  /// one random basis change.
  std::vector<Mat2> sample(GroupModel m, int n) {
    std::vector<Mat2> out;
    const Mat2 t = m == GroupModel::ScalarCircle ? Mat2::identity() : basis();
    for (int i = 0; i < n; ++i) {
      Mat2 g;
      switch (m) {
        case GroupModel::SU2: g = su2(); break;
        case GroupModel::SL2R: g = sl2r(); break;
        case GroupModel::SO2: g = so2(); break;
        case GroupModel::RealUpperTriangular: g = real_upper(); break;
        case GroupModel::ScalarCircle: g = Mat2::identity(); break;
        case GroupModel::Generic: g = generic(); break;
      }
      if (m != GroupModel::Generic) g = g * phase();
      out.push_back(t * g * inverse(t));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace heunmono
