#pragma once

// Accessory-parameter search: a Newton-like iteration on B that makes two
// products of rescaled monodromy matrices have real trace, with the third
// trace as the acceptance check.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "heunmono/elliptic.hpp"
#include "heunmono/error.hpp"
#include "heunmono/heun_params.hpp"
#include "heunmono/linalg2c.hpp"
#include "heunmono/monodromy.hpp"
#include "heunmono/unitarity.hpp"

namespace heunmono {

struct SolverConfig {
  double fd_step = 1e-5;
  int max_iters = 20;
  double newton_tol = 1e-8;
  double accept_rel_tol = 0.03;
  // Relative bound on |Im t_PQ|, |Im t_QR| at an accepted point.
  double trace_tol = 1e-6;
  bool central_difference = false;
  // Exponent residuals are recorded but not enforced: at large |B| the loop
  // matrices are big enough that rounding alone exceeds the exponent check.
  MonodromyOptions monodromy = [] {
    MonodromyOptions o;
    o.validate_exponents = false;
    return o;
  }();

  void validate() const {
    if (!(fd_step > 0.0) || max_iters <= 0 || !(newton_tol > 0.0) || !(accept_rel_tol > 0.0) ||
        !(accept_rel_tol < 1.0) || !(trace_tol > 0.0) || !(monodromy.step > 0.0) || !(monodromy.radius > 0.0))
      throw Error(ErrorCode::InvalidInput, "SolverConfig: parameters must be positive, accept_rel_tol < 1");
  }
};

struct TraceTriple {
  Complex pq, qr, pr;
};

struct SpectrumResult {
  Complex B{};
  TraceTriple traces{};
  int iterations = 0;
  bool converged = false;
  bool accepted = false;
  Complex seed{};
  // Lattice point and index the seed came from, when it came from one.
  Complex lattice_point{};
  std::pair<int, int> lattice_index{};
  std::array<double, 3> residual_imag{};
  std::optional<bool> beukers_ok;
  // |epsilon| of every Newton update, in order.
  std::vector<double> steps;
};

inline TraceTriple traces_of(const MonodromyTriple& t) {
  return {trace(t.P0 * t.Q0), trace(t.Q0 * t.R0), trace(t.P0 * t.R0)};
}

/// Monodromy as a function of B for otherwise fixed Heun parameters.
class TraceMap {
 public:
  TraceMap(const HeunParams& base, const MonodromyOptions& opt = {}) : base_(base), opt_(opt) {
    base_.validate();
    const auto contours = heun_contours(base_, opt_);
    for (const Contour& c : contours) tables_.emplace_back(c, base_);
  }

  const HeunParams& params() const { return base_; }

  MonodromyTriple triple(Complex B) const {
    if (!is_finite(B)) throw Error(ErrorCode::InvalidInput, "TraceMap: non-finite accessory parameter");
    return assemble_triple(tables_[0].transport(B), tables_[1].transport(B), tables_[2].transport(B),
                           base_.with_accessory(B), opt_);
  }

  TraceTriple traces(Complex B) const { return traces_of(triple(B)); }

 private:
  HeunParams base_;
  MonodromyOptions opt_;
  std::vector<HeunLoopTable> tables_;
};

/// (tr P0 Q0, tr Q0 R0, tr P0 R0) at accessory parameter B.
inline TraceTriple traces_at(Complex B, const HeunParams& base_params, const MonodromyOptions& opt = {}) {
  return traces_of(monodromy_triple(base_params.with_accessory(B), opt));
}

/// Solution of Im(t_PQ + nu eps) = Im(t_QR + mu eps) = 0 for complex eps.
inline Complex newton_epsilon(Complex tPQ, Complex tQR, Complex nu, Complex mu) {
  const double den = (std::conj(nu) * mu).imag();
  if (!(std::abs(den) > 1e-14))
    throw Error(ErrorCode::ParallelDerivatives, "newton_epsilon: trace derivatives are parallel");
  return (std::conj(mu) * tPQ.imag() - std::conj(nu) * tQR.imag()) / den;
}

namespace detail {

inline bool third_trace_real(Complex t, double rel_tol) {
  return std::abs(t.imag()) <= rel_tol * std::max(1.0, std::abs(t));
}

inline void finish_result(SpectrumResult& r, const TraceMap& map, const SolverConfig& cfg) {
  r.traces = map.traces(r.B);
  r.residual_imag = {std::abs(r.traces.pq.imag()), std::abs(r.traces.qr.imag()), std::abs(r.traces.pr.imag())};
  const bool pair_real = third_trace_real(r.traces.pq, cfg.trace_tol) && third_trace_real(r.traces.qr, cfg.trace_tol);
  r.accepted = r.converged && pair_real && third_trace_real(r.traces.pr, cfg.accept_rel_tol);
  if (map.params().is_lame()) r.beukers_ok = beukers_inequality(r.traces.pq, r.traces.qr, 1e-4, 1e-3);
}

}  // namespace detail

/// Newton iteration from one seed with a prebuilt trace map.
inline SpectrumResult solve_from_seed(Complex seed_B, const TraceMap& map, const SolverConfig& cfg) {
  cfg.validate();
  SpectrumResult r;
  r.seed = seed_B;
  Complex B = seed_B;
  bool retried = false;
  try {
    while (r.iterations < cfg.max_iters) {
      const double h = cfg.fd_step;
      TraceTriple t, hi;
      Complex nu, mu;
      if (cfg.central_difference) {
        t = map.traces(B);
        hi = map.traces(B + h);
        const TraceTriple lo = map.traces(B - h);
        nu = (hi.pq - lo.pq) / (2.0 * h);
        mu = (hi.qr - lo.qr) / (2.0 * h);
      } else {
        t = map.traces(B);
        hi = map.traces(B + h);
        nu = (hi.pq - t.pq) / h;
        mu = (hi.qr - t.qr) / h;
      }
      Complex eps;
      try {
        eps = newton_epsilon(t.pq, t.qr, nu, mu);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ParallelDerivatives || retried) throw;
        retried = true;
        B += 1e-3 * (1.0 + std::abs(B));
        continue;
      }
      B += eps;
      ++r.iterations;
      r.steps.push_back(std::abs(eps));
      if (!is_finite(B)) break;
      if (std::abs(eps) < cfg.newton_tol) {
        r.converged = true;
        break;
      }
    }
  } catch (const Error&) {
    r.converged = false;
  }
  r.B = B;
  if (!is_finite(B)) {
    r.converged = false;
    return r;
  }
  try {
    detail::finish_result(r, map, cfg);
  } catch (const Error&) {
    r.converged = r.accepted = false;
  }
  return r;
}

inline SpectrumResult solve_from_seed(Complex seed_B, const HeunParams& base_params, const SolverConfig& cfg = {}) {
  return solve_from_seed(seed_B, TraceMap(base_params, cfg.monodromy), cfg);
}

/// The square root of B on the side of `ref`.
inline Complex sqrt_near(Complex B, Complex ref) {
  const Complex s = std::sqrt(B);
  return std::abs(s - ref) <= std::abs(s + ref) ? s : -s;
}

/// Worker count from HEUNMONO_THREADS, defaulting to 1.
inline unsigned thread_count() {
  if (const char* s = std::getenv("HEUNMONO_THREADS")) {
    const long n = std::strtol(s, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(std::min<long>(n, 256));
  }
  return 1;
}

/// Runs f(i) for i in [0, n) on `threads` workers with a static interleaved
/// split. f must only write to per-index storage.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) f(i);
    });
  for (auto& t : pool) t.join();
}

/// Solves from each lattice seed l0^2. Results keep seed order; a converged
/// result within `dedup_radius` of an earlier converged one is dropped.
inline std::vector<SpectrumResult> sweep(const HeunParams& base_params, const EllipticData& d,
                                         const std::vector<std::pair<int, int>>& indices, const SolverConfig& cfg = {},
                                         double dedup_radius = 1e-4, unsigned threads = thread_count()) {
  cfg.validate();
  const TraceMap map(base_params, cfg.monodromy);
  const std::vector<Complex> points = seed_lattice(d, indices);
  std::vector<SpectrumResult> raw(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    raw[i] = solve_from_seed(points[i] * points[i], map, cfg);
    raw[i].lattice_point = points[i];
    raw[i].lattice_index = indices[i];
  });
  std::vector<SpectrumResult> out;
  for (auto& r : raw) {
    const bool dup = r.converged && std::any_of(out.begin(), out.end(), [&](const SpectrumResult& o) {
                       return o.converged && std::abs(o.B - r.B) < dedup_radius;
                     });
    if (!dup) out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convergence maps

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// h in [0, 1), s and v in [0, 1].
inline Rgb hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  const auto q = [m](double u) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(u + m, 0.0, 1.0))); };
  return {q(r), q(g), q(b)};
}

/// Domain colouring: hue from arg z, value rising from 0.5 toward 1 with |z|.
inline Rgb domain_color(Complex z) {
  if (!is_finite(z)) return {};
  const double hue = (std::arg(z) + M_PI) / (2.0 * M_PI);
  const double mag = std::abs(z);
  const double value = 0.5 + 0.5 * mag / (1.0 + mag);
  return hsv_to_rgb(hue, 1.0, value);
}

/// Hue in [0, 1) assigned to z by domain_color.
inline double domain_hue(Complex z) { return (std::arg(z) + M_PI) / (2.0 * M_PI); }

struct Region {
  double x_min = -7.0, x_max = 7.0, y_min = -7.0, y_max = 7.0;
};

inline constexpr int kMaxMapSide = 4096;

struct ConvergenceMap {
  int width = 0, height = 0;
  Region region;
  // Row-major, row 0 at y_max.
  std::vector<Complex> final_B;
  std::vector<std::uint8_t> failed;
  std::vector<Rgb> pixels;

  /// Seed sqrt(B) at the centre of pixel (i, j).
  static Complex pixel_point(const Region& reg, int w, int h, int i, int j) {
    const double x = reg.x_min + (i + 0.5) * (reg.x_max - reg.x_min) / w;
    const double y = reg.y_max - (j + 0.5) * (reg.y_max - reg.y_min) / h;
    return {x, y};
  }
};

/// Iterates from B = p^2 for every pixel p of a region in the sqrt(B) plane
/// and colours the B reached after cfg.max_iters iterations.
inline ConvergenceMap convergence_map(const HeunParams& base_params, const Region& region, int width, int height,
                                      const SolverConfig& cfg = {}, unsigned threads = thread_count()) {
  cfg.validate();
  if (width <= 0 || height <= 0 || width > kMaxMapSide || height > kMaxMapSide)
    throw Error(ErrorCode::InvalidInput, "convergence_map: resolution must lie in [1, 4096]^2");
  if (!(region.x_max > region.x_min) || !(region.y_max > region.y_min))
    throw Error(ErrorCode::InvalidInput, "convergence_map: empty region");
  const TraceMap map(base_params, cfg.monodromy);
  ConvergenceMap out;
  out.width = width;
  out.height = height;
  out.region = region;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  out.final_B.assign(n, Complex{});
  out.failed.assign(n, 0);
  out.pixels.assign(n, Rgb{});
  parallel_for(n, threads, [&](std::size_t k) {
    const int i = static_cast<int>(k % width), j = static_cast<int>(k / width);
    const Complex p = ConvergenceMap::pixel_point(region, width, height, i, j);
    const SpectrumResult r = solve_from_seed(p * p, map, cfg);
    const bool bad = !is_finite(r.B) || r.iterations == 0;
    out.final_B[k] = r.B;
    out.failed[k] = bad ? 1 : 0;
    out.pixels[k] = bad ? Rgb{} : domain_color(r.B);
  });
  return out;
}

/// Binary PPM (P6, maxval 255).
inline void write_ppm(std::ostream& os, const ConvergenceMap& m) {
  os << "P6\n" << m.width << ' ' << m.height << "\n255\n";
  for (const Rgb& p : m.pixels) {
    const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    os.write(px, 3);
  }
}

}  // namespace heunmono
