#pragma once

// Unitarity of finitely generated subgroups of GL(2, C).
//
// A group G is unitary when some nondegenerate Hermitian form H (definite or
// not) satisfies g^dagger H g = H for every g in G. After rescaling each
// generator to determinant one, G falls into exactly one of four cases:
//
//   Scalar              -- G' = {+-1};                 unitary iff dim A = 1
//   AbelianReducible    -- abelian, common eigenline;  unitary iff dim A = 2
//   NonabelianReducible -- common eigenline only;      unitary iff dim A = 3
//   Irreducible         -- no common eigenline;        unitary iff dim A = 4
//
// where A is the real algebra generated by the rescaled group, and |det g| = 1
// is required throughout. In the irreducible case this is equivalent to real
// traces on all words of length <= 2 in the generators plus one of the two
// cyclic classes of length-3 words. `construct_form` recovers H explicitly by
// bringing the group into a model basis.

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "heunmono/error.hpp"
#include "heunmono/heun_params.hpp"
#include "heunmono/linalg2c.hpp"

namespace heunmono {

struct UnitarityOptions {
  double det_modulus_tol = 1e-8;
  double scalar_tol = 1e-8;
  double commute_tol = 1e-8;
  double eigenline_tol = 1e-8;
  double rank_tol = 1e-9;
  double trace_tol = 1e-8;
  // Distinguishes |tr| = 2 (parabolic) from elliptic/hyperbolic generators.
  double parabolic_tol = 1e-7;
  double preserve_tol = 1e-8;
  double degenerate_tol = 1e-10;

  /// Tolerances for matrices that come out of an ODE integrator, where the
  /// accepted third trace is only real to a few percent.
  static UnitarityOptions numerical() {
    UnitarityOptions o;
    o.det_modulus_tol = 1e-6;
    o.scalar_tol = 1e-6;
    o.commute_tol = 1e-6;
    o.eigenline_tol = 1e-6;
    o.rank_tol = 1e-6;
    o.trace_tol = 0.03;
    o.parabolic_tol = 1e-4;
    o.preserve_tol = 1e-4;
    return o;
  }
};

/// Ordered, nonempty list of invertible generators.
class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<Mat2> gens) : gens_(std::move(gens)) {
    if (gens_.empty()) throw Error(ErrorCode::InvalidInput, "GeneratorSet: at least one generator is required");
    for (const Mat2& g : gens_) {
      if (!g.finite()) throw Error(ErrorCode::InvalidInput, "GeneratorSet: non-finite entry");
      if (std::abs(det(g)) <= 1e-14) throw Error(ErrorCode::SingularMatrix, "GeneratorSet: singular generator");
    }
  }
  GeneratorSet(std::initializer_list<Mat2> gens) : GeneratorSet(std::vector<Mat2>(gens)) {}

  const std::vector<Mat2>& gens() const { return gens_; }
  std::size_t size() const { return gens_.size(); }
  const Mat2& operator[](std::size_t i) const { return gens_[i]; }

  /// The generators mapped to SL(2, C) by g -> g / sqrt(det g).
  GeneratorSet rescaled() const {
    std::vector<Mat2> out;
    out.reserve(gens_.size());
    for (const Mat2& g : gens_) out.push_back(sqrt_det_rescale(g));
    return GeneratorSet(std::move(out));
  }

 private:
  std::vector<Mat2> gens_;
};

enum class GroupCase { Scalar, AbelianReducible, NonabelianReducible, Irreducible };

inline std::string_view group_case_name(GroupCase c) {
  switch (c) {
    case GroupCase::Scalar: return "Scalar";
    case GroupCase::AbelianReducible: return "AbelianReducible";
    case GroupCase::NonabelianReducible: return "NonabelianReducible";
    case GroupCase::Irreducible: return "Irreducible";
  }
  return "Unknown";
}

/// The real algebra dimension demanded of a unitary group in each case.
inline int unitary_algebra_dim(GroupCase c) {
  switch (c) {
    case GroupCase::Scalar: return 1;
    case GroupCase::AbelianReducible: return 2;
    case GroupCase::NonabelianReducible: return 3;
    case GroupCase::Irreducible: return 4;
  }
  return 0;
}

struct FormWitness {
  HermitianForm form;
  // t with t^{-1} g t in the model group for every generator g.
  Mat2 normalizer = Mat2::identity();
};

struct Classification {
  GroupCase group_case = GroupCase::Scalar;
  bool unitary = false;
  int algebra_dim = 0;
  std::optional<HermitianForm> form;
  std::optional<Mat2> normalizer;
  bool det_modulus_ok = false;
};

// ---------------------------------------------------------------------------
// Structural tests

inline bool commutes(const Mat2& a, const Mat2& b, double tol = 1e-8) {
  return norm(commutator(a, b)) <= tol * std::max(1.0, norm(a) * norm(b));
}

inline bool is_abelian(const GeneratorSet& s, double tol = 1e-8) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (!commutes(s[i], s[j], tol)) return false;
  return true;
}

inline bool is_eigenline(const Mat2& g, const Vec2& v, double tol) {
  const Vec2 gv = g * v;
  // Component of g v orthogonal to v (v is a unit vector).
  const Complex along = std::conj(v[0]) * gv[0] + std::conj(v[1]) * gv[1];
  const Vec2 perp{gv[0] - along * v[0], gv[1] - along * v[1]};
  return norm2(perp) <= tol * std::max(1.0, norm(g));
}

/// A unit vector fixed as a direction by every generator, if one exists.
/// Candidates are the eigenlines of the first non-scalar generator; when all
/// generators are scalar every line is invariant and e1 is returned.
inline std::optional<Vec2> common_eigenline(const GeneratorSet& s, const UnitarityOptions& opt = {}) {
  const Mat2* anchor = nullptr;
  for (const Mat2& g : s.gens())
    if (!is_scalar(g, opt.scalar_tol)) {
      anchor = &g;
      break;
    }
  if (anchor == nullptr) return Vec2{1.0, 0.0};

  const EigenPair ep = eigen(*anchor);
  std::vector<Vec2> candidates{ep.v1};
  if (!ep.defective) candidates.push_back(ep.v2);
  for (const Vec2& v : candidates) {
    bool shared = true;
    for (const Mat2& g : s.gens())
      if (!is_eigenline(g, v, opt.eigenline_tol)) {
        shared = false;
        break;
      }
    if (shared) return v;
  }
  return std::nullopt;
}

inline bool is_irreducible(const GeneratorSet& s, const UnitarityOptions& opt = {}) {
  return !common_eigenline(s, opt).has_value();
}

namespace detail {

using Real8 = std::array<double, 8>;

inline Real8 to_real8(const Mat2& m) {
  return {m.a11.real(), m.a11.imag(), m.a12.real(), m.a12.imag(),
          m.a21.real(), m.a21.imag(), m.a22.real(), m.a22.imag()};
}

inline Mat2 from_real8(const Real8& v) {
  return {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}};
}

inline double dot8(const Real8& a, const Real8& b) {
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += a[i] * b[i];
  return s;
}

// Orthonormal basis of a real subspace of C^{2x2} = R^8.
class RealSpan {
 public:
  explicit RealSpan(double rank_tol) : tol_(rank_tol) {}

  // Adds m when its component orthogonal to the span exceeds tol * scale;
  // scale defaults to the norm of m.
  bool absorb(const Mat2& m, double scale = -1.0) {
    if (basis_.size() == 8) return false;
    Real8 v = to_real8(m);
    const double n0 = scale > 0.0 ? scale : std::sqrt(dot8(v, v));
    if (n0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (const Real8& b : basis_) {
        const double c = dot8(v, b);
        for (int i = 0; i < 8; ++i) v[i] -= c * b[i];
      }
    const double n1 = std::sqrt(dot8(v, v));
    if (n1 <= tol_ * n0) return false;
    for (double& x : v) x /= n1;
    basis_.push_back(v);
    return true;
  }

  std::size_t dim() const { return basis_.size(); }
  Mat2 element(std::size_t i) const { return from_real8(basis_[i]); }

 private:
  double tol_;
  std::vector<Real8> basis_;
};

}  // namespace detail

/// Real dimension of the associative algebra generated by the group the
/// generators span: start from {1} together with the generators and their
/// inverses and close the real span under products until it stabilizes.
/// Products of unit basis elements are tested against unit scale, so
/// cancellation in a product does not inflate its rounding noise.
/// Expects generators already rescaled to determinant one.
inline int real_algebra_dim(const GeneratorSet& s, const UnitarityOptions& opt = {}) {
  detail::RealSpan span(opt.rank_tol);
  span.absorb(Mat2::identity());
  for (const Mat2& g : s.gens()) {
    span.absorb(g);
    span.absorb(inverse(g));
  }
  // The span can grow at most 8 times, so 8 rounds always reach the fixpoint.
  for (int round = 0; round < 8; ++round) {
    bool grew = false;
    const std::size_t n = span.dim();
    for (std::size_t i = 0; i < n && span.dim() < 8; ++i)
      for (std::size_t j = 0; j < n && span.dim() < 8; ++j)
        grew |= span.absorb(span.element(i) * span.element(j), 1.0);
    if (!grew || span.dim() == 8) break;
  }
  return static_cast<int>(span.dim());
}

// ---------------------------------------------------------------------------
// Trace conditions

inline bool real_within(Complex t, double abs_tol, double rel_tol = 0.0) {
  return std::abs(t.imag()) <= abs_tol + rel_tol * std::abs(t);
}

/// tr p, tr q, tr r, tr pq, tr qr, tr pr, tr pqr.
inline std::array<Complex, 7> seven_traces(const Mat2& p, const Mat2& q, const Mat2& r) {
  return {trace(p), trace(q), trace(r), trace(p * q), trace(q * r), trace(p * r), trace(p * q * r)};
}

/// True when all seven traces are real within abs_tol + rel_tol |t|.
inline bool seven_trace_test(const Mat2& p, const Mat2& q, const Mat2& r, double abs_tol = 1e-8,
                             double rel_tol = 0.0) {
  for (Complex t : seven_traces(p, q, r))
    if (!real_within(t, abs_tol, rel_tol)) return false;
  return true;
}

/// Trace conditions of the irreducible case over every triple drawn from the
/// (rescaled) generators: real traces on single elements and pairs, and for
/// each triple a real trace on either pqr or prq.
inline bool irreducible_trace_conditions(const GeneratorSet& s, double tol = 1e-8) {
  const auto real = [tol](Complex t) { return std::abs(t.imag()) <= tol * std::max(1.0, std::abs(t)); };
  const auto& g = s.gens();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!real(trace(g[i]))) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!real(trace(g[i] * g[j]))) return false;
      for (std::size_t k = j + 1; k < n; ++k)
        if (!real(trace(g[i] * g[j] * g[k])) && !real(trace(g[i] * g[k] * g[j]))) return false;
    }
  }
  return true;
}

/// (t_PQ^2 - 4)(t_QR^2 - 4) >= 16 with both traces real; the boundary is
/// admitted with a slack of 1e-6.
inline bool beukers_inequality(Complex t_pq, Complex t_qr, double imag_tol = 1e-8, double slack = 1e-6) {
  if (std::abs(t_pq.imag()) > imag_tol || std::abs(t_qr.imag()) > imag_tol) return false;
  const double x = t_pq.real(), y = t_qr.real();
  return (x * x - 4.0) * (y * y - 4.0) >= 16.0 - slack;
}

/// Distance from z to the nearest integer, measured in the complex plane.
inline double distance_to_integer(Complex z) {
  return std::hypot(z.real() - std::round(z.real()), z.imag());
}

/// True when alpha lies, modulo 1, in {0, g, d, e, g+d, g+e, d+e, g+d+e}; the
/// monodromy of Heun's equation can only be reducible in that situation.
inline bool heun_reducibility_guard(const HeunParams& p, double tol = 1e-9) {
  const std::array<Complex, 8> sums{0.0,
                                    p.gamma,
                                    p.delta,
                                    p.epsilon,
                                    p.gamma + p.delta,
                                    p.gamma + p.epsilon,
                                    p.delta + p.epsilon,
                                    p.gamma + p.delta + p.epsilon};
  for (Complex s : sums)
    if (distance_to_integer(p.alpha - s) <= tol) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Form construction

namespace detail {

inline bool all_scalar(const GeneratorSet& s, double tol) {
  for (const Mat2& g : s.gens())
    if (!is_scalar(g, tol)) return false;
  return true;
}

inline Vec2 orthogonal_complement(const Vec2& v) { return {-std::conj(v[1]), std::conj(v[0])}; }

// Conjugator by diag(1, t) making entry (1,2) of m real and positive, or
// entry (2,1) when (1,2) vanishes.
inline Mat2 phase_fix(const Mat2& m) {
  if (std::abs(m.a12) >= std::abs(m.a21)) {
    if (std::abs(m.a12) == 0.0) return Mat2::identity();
    return Mat2::diag(1.0, std::conj(m.a12) / std::abs(m.a12));
  }
  return Mat2::diag(1.0, m.a21 / std::abs(m.a21));
}

// Model forms in a normalized basis, for groups with a common eigenline.
inline FormWitness reducible_model(const GeneratorSet& s, const Vec2& line, const UnitarityOptions& opt) {
  const Mat2 t0 = Mat2::from_columns(line, orthogonal_complement(line));
  std::vector<Mat2> upper;
  for (const Mat2& g : s.gens()) upper.push_back(conjugate(g, t0));

  // A generator with distinct diagonal entries fixes the basis: diagonalize it
  // by a unipotent change of the second basis vector.
  for (const Mat2& u : upper) {
    const Complex gap = u.a11 - u.a22;
    if (std::abs(gap) <= opt.parabolic_tol * std::max(1.0, norm(u))) continue;
    const Mat2 unip{1.0, -u.a12 / gap, 0.0, 1.0};
    Mat2 t = t0 * unip;
    if (std::abs(trace(u)) < 2.0) {
      // Elliptic: rotations in an eigenbasis preserve the Euclidean form.
      return {HermitianForm::identity(), t};
    }
    // Hyperbolic: real upper-triangular model preserving H0.
    for (const Mat2& w : upper) {
      const Mat2 d = conjugate(w, unip);
      if (std::abs(d.a12) > opt.scalar_tol * std::max(1.0, norm(d))) {
        t = t * phase_fix(d);
        break;
      }
    }
    return {HermitianForm::standard_indefinite(), t};
  }

  // Every generator is +-(unipotent): scale the first nontrivial shear to 1.
  for (const Mat2& u : upper) {
    if (std::abs(u.a12) > opt.scalar_tol * std::max(1.0, norm(u)))
      return {HermitianForm::standard_indefinite(), t0 * Mat2::diag(1.0, 1.0 / u.a12)};
  }
  return {HermitianForm::identity(), t0};
}

inline bool is_parabolic_trace(Complex tr, double tol) {
  return std::abs(std::abs(tr) - 2.0) <= tol;
}

// Model forms for irreducible groups. The basis is fixed by a non-commuting
// pair (p, q): p is diagonalized when |tr p| != 2; otherwise both are brought
// to the parabolic normal form.
inline FormWitness irreducible_model(const GeneratorSet& s, const UnitarityOptions& opt) {
  const auto& g = s.gens();

  std::vector<Mat2> anchors(g.begin(), g.end());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j) anchors.push_back(g[i] * g[j]);

  for (const Mat2& p : anchors) {
    if (is_parabolic_trace(trace(p), opt.parabolic_tol)) continue;
    const Mat2* partner = nullptr;
    for (const Mat2& q : g)
      if (!commutes(p, q, opt.commute_tol)) {
        partner = &q;
        break;
      }
    if (partner == nullptr) continue;

    const EigenPair ep = eigen(p);
    const Mat2 t0 = Mat2::from_columns(ep.v1, ep.v2);
    const Mat2 q = conjugate(*partner, t0);
    if (std::abs(trace(p)) > 2.0) {
      // Hyperbolic anchor: a diagonal rescaling makes the group real.
      return {HermitianForm::standard_indefinite(), t0 * phase_fix(q)};
    }
    // Elliptic anchor: a diagonal form diag(1, -q12 / conj(q21)).
    const double h22 = (-q.a12 / std::conj(q.a21)).real();
    return {HermitianForm{1.0, 0.0, h22}, t0};
  }

  // Parabolic pair: p ~ [[1, 1], [0, 1]] and q = [[1+2s, s^2], [-4, 1-2s]].
  // Invariance under p forces h11 = 0 and h12 imaginary; q then fixes
  // h22 = -Im s for h12 = -i.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (is_scalar(g[i], opt.scalar_tol)) continue;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (commutes(g[i], g[j], opt.commute_tol)) continue;
      const Mat2 p = trace(g[i]).real() < 0.0 ? -g[i] : g[i];
      const Mat2 t0 = jordan_normalizer(p);
      Mat2 q = conjugate(g[j], t0);
      if (trace(q).real() < 0.0) q = -q;
      const Complex s_param = 0.5 * (q.a11 - 1.0);
      return {HermitianForm{0.0, -kI, -s_param.imag()}, t0};
    }
  }
  throw Error(ErrorCode::NotUnitary, "construct_form: no non-commuting generator pair");
}

inline HermitianForm normalize_form(const HermitianForm& h) {
  const double scale = h.norm();
  if (std::abs(h.h11) > 1e-12 * scale) return h.scaled(1.0 / std::abs(h.h11));
  return h.scaled(1.0 / std::abs(h.h12));
}

}  // namespace detail

/// Hermitian form preserved by every generator, expressed in the original
/// basis, together with the normalizer that moved the group into its model.
/// Throws NotUnitary when no form is preserved and DegenerateForm when the
/// construction collapses.
inline FormWitness construct_form(const GeneratorSet& s, const UnitarityOptions& opt = {}) {
  for (const Mat2& g : s.gens())
    if (std::abs(std::abs(det(g)) - 1.0) > opt.det_modulus_tol)
      throw Error(ErrorCode::NotUnitary, "construct_form: generator with |det| != 1");

  const GeneratorSet r = s.rescaled();
  FormWitness model;
  if (detail::all_scalar(r, opt.scalar_tol)) {
    model = {HermitianForm::identity(), Mat2::identity()};
  } else if (const auto line = common_eigenline(r, opt)) {
    model = detail::reducible_model(r, *line, opt);
  } else {
    model = detail::irreducible_model(r, opt);
  }

  FormWitness out{detail::normalize_form(pull_back(model.form, model.normalizer)), model.normalizer};
  if (!out.form.is_nondegenerate(opt.degenerate_tol))
    throw Error(ErrorCode::DegenerateForm, "construct_form: constructed form is degenerate");
  // Backward-error check: rounding in g contributes about |g|^2 |H| to g^T H g.
  for (const Mat2& g : s.gens())
    if (form_residual(g, out.form) > opt.preserve_tol * std::max(1.0, std::norm(norm(g))))
      throw Error(ErrorCode::NotUnitary, "construct_form: generators do not preserve a common form");
  return out;
}

/// Decides unitarity, the structural case and the real algebra dimension.
inline Classification classify(const GeneratorSet& s, const UnitarityOptions& opt = {}) {
  Classification c;
  c.det_modulus_ok = true;
  for (const Mat2& g : s.gens())
    if (std::abs(std::abs(det(g)) - 1.0) > opt.det_modulus_tol) c.det_modulus_ok = false;

  const GeneratorSet r = s.rescaled();
  c.algebra_dim = real_algebra_dim(r, opt);
  if (detail::all_scalar(r, opt.scalar_tol)) {
    c.group_case = GroupCase::Scalar;
  } else if (common_eigenline(r, opt)) {
    c.group_case = is_abelian(r, opt.commute_tol) ? GroupCase::AbelianReducible : GroupCase::NonabelianReducible;
  } else {
    c.group_case = GroupCase::Irreducible;
  }

  bool structural = c.algebra_dim == unitary_algebra_dim(c.group_case);
  if (structural && c.group_case == GroupCase::Irreducible)
    structural = irreducible_trace_conditions(r, opt.trace_tol);
  c.unitary = c.det_modulus_ok && structural;

  if (c.unitary) {
    try {
      const FormWitness w = construct_form(s, opt);
      c.form = w.form;
      c.normalizer = w.normalizer;
    } catch (const Error&) {
      c.unitary = false;
    }
  }
  return c;
}

}  // namespace heunmono
