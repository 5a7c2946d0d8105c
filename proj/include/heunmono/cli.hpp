#pragma once

// Command-line front end. Needs CLI11.hpp and json.hpp on the include path.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heunmono/elliptic.hpp"
#include "heunmono/error.hpp"
#include "heunmono/heun_params.hpp"
#include "heunmono/linalg2c.hpp"
#include "heunmono/monodromy.hpp"
#include "heunmono/sampling.hpp"
#include "heunmono/spectrum.hpp"
#include "heunmono/unitarity.hpp"

namespace heunmono::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Raised for bad input that CLI11 cannot see (unreadable files, bad JSON).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formatting

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Mat2& m) {
  return json::array({to_json(m.a11), to_json(m.a12), to_json(m.a21), to_json(m.a22)});
}

inline json to_json(const HermitianForm& h) { return {{"h11", h.h11}, {"h12", to_json(h.h12)}, {"h22", h.h22}}; }

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw UsageError("expected a number or a [re, im] pair");
}

/// Accepts rows [[a11, a12], [a21, a22]] or the flat row-major
/// [a11, a12, a21, a22]; entries are numbers or [re, im] pairs.
inline Mat2 matrix_from_json(const json& j) {
  if (j.is_array() && j.size() == 2 && j[0].is_array() && j[1].is_array() && j[0].size() == 2 &&
      j[1].size() == 2)
    return {complex_from_json(j[0][0]), complex_from_json(j[0][1]), complex_from_json(j[1][0]),
            complex_from_json(j[1][1])};
  if (j.is_array() && j.size() == 4)
    return {complex_from_json(j[0]), complex_from_json(j[1]), complex_from_json(j[2]), complex_from_json(j[3])};
  throw UsageError("matrix must be [[a11, a12], [a21, a22]] or [a11, a12, a21, a22]");
}

inline std::vector<Mat2> generators_from_json(const json& j) {
  const json& list = j.is_object() ? j.at("generators") : j;
  if (!list.is_array()) throw UsageError("generators must be an array of matrices");
  std::vector<Mat2> out;
  for (const json& m : list) out.push_back(matrix_from_json(m));
  return out;
}

inline json params_json(const HeunParams& p) {
  return {{"gamma", to_json(p.gamma)}, {"delta", to_json(p.delta)}, {"epsilon", to_json(p.epsilon)},
          {"alpha", to_json(p.alpha)}, {"beta", to_json(p.beta)},   {"a", to_json(p.a)},
          {"B", to_json(p.B)}};
}

inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file " + path);
  f << content;
}

// ---------------------------------------------------------------------------
// Shared flag groups

struct HeunFlags {
  double gamma = 0.5, delta = 0.5, epsilon = 0.5, alpha = 0.25, beta = 0.25;
  double a_re = -1.0, a_im = 0.0;

  void add(CLI::App* app) {
    app->add_option("--gamma", gamma, "Exponent gamma at z = 0");
    app->add_option("--delta", delta, "Exponent delta at z = 1");
    app->add_option("--epsilon", epsilon, "Exponent epsilon at z = a");
    app->add_option("--alpha", alpha, "Exponent alpha at infinity");
    app->add_option("--beta", beta, "Exponent beta at infinity");
    app->add_option("--a-re", a_re, "Real part of the fourth singular point a");
    app->add_option("--a-im", a_im, "Imaginary part of a");
  }

  HeunParams params(Complex B = 0.0) const { return {gamma, delta, epsilon, alpha, beta, {a_re, a_im}, B}; }
};

struct SolverFlags {
  SolverConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--fd-step", cfg.fd_step, "Finite-difference step for dB (real)");
    app->add_option("--max-iters", cfg.max_iters, "Newton iteration cap");
    app->add_option("--tol", cfg.newton_tol, "Convergence threshold on |epsilon|");
    app->add_option("--accept-tol", cfg.accept_rel_tol, "Relative tolerance on Im tr(P0 R0) for acceptance");
    app->add_option("--step", cfg.monodromy.step, "Integrator step |dz|");
    app->add_option("--radius", cfg.monodromy.radius, "Loop radius around each singular point");
    app->add_flag("--central", cfg.central_difference, "Use central differences (diagnostic)");
  }
};

inline std::vector<std::pair<int, int>> parse_index_list(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--seeds expects m:n pairs separated by commas");
    try {
      out.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
    } catch (const std::logic_error&) {
      throw UsageError("--seeds: bad index pair '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--seeds: empty list");
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies

inline json classify_json(const std::vector<Mat2>& gens, const UnitarityOptions& opt) {
  const GeneratorSet s(gens);
  const Classification c = classify(s, opt);
  json j{{"schema", kSchemaVersion},
         {"case", std::string(group_case_name(c.group_case))},
         {"unitary", c.unitary},
         {"algebra_dim", c.algebra_dim},
         {"det_modulus_ok", c.det_modulus_ok},
         {"form", c.form ? to_json(*c.form) : json(nullptr)}};
  if (c.form) {
    double worst = 0.0;
    for (const Mat2& g : gens) worst = std::max(worst, form_residual(g, *c.form));
    j["form_residual"] = worst;
  }
  if (gens.size() == 3) {
    json t = json::array();
    for (Complex x : seven_traces(s[0], s[1], s[2])) t.push_back(to_json(x));
    j["seven_traces"] = t;
  }
  return j;
}

inline json monodromy_json(const HeunParams& p, const MonodromyOptions& opt) {
  const MonodromyTriple t = monodromy_triple(p, opt);
  const Complex ratio = infinity_trace_ratio(t, p);
  return {{"schema", kSchemaVersion},
          {"params", params_json(p)},
          {"base", to_json(opt.base)},
          {"step", opt.step},
          {"radius", opt.radius},
          {"P", to_json(t.P)},
          {"Q", to_json(t.Q)},
          {"R", to_json(t.R)},
          {"P0", to_json(t.P0)},
          {"Q0", to_json(t.Q0)},
          {"R0", to_json(t.R0)},
          {"traces",
           {{"P", to_json(trace(t.P))},
            {"Q", to_json(trace(t.Q))},
            {"R", to_json(trace(t.R))},
            {"P0Q0", to_json(trace(t.P0 * t.Q0))},
            {"Q0R0", to_json(trace(t.Q0 * t.R0))},
            {"P0R0", to_json(trace(t.P0 * t.R0))},
            {"P0Q0R0", to_json(trace(t.P0 * t.Q0 * t.R0))}}},
          {"det", {{"P", to_json(det(t.P))}, {"Q", to_json(det(t.Q))}, {"R", to_json(det(t.R))}}},
          {"exponent_residuals", t.exponent_residuals},
          {"infinity_trace_ratio", to_json(ratio)},
          {"infinity_trace_expected", to_json(2.0 * std::cos(M_PI * (p.alpha - p.beta)))}};
}

inline std::string asymptote_csv(Complex a, const DarbouxParams& m, int range) {
  const EllipticData d = periods_from_a(a);
  std::ostringstream os;
  os << "m,n,l0_re,l0_im,Bp_re,Bp_im\n";
  for (int i = -range; i <= range; ++i)
    for (int k = -range; k <= range; ++k) {
      if (i == 0 && k == 0) continue;
      const Complex l0 = lattice_point(d, i, k);
      const Complex b = asymptotic_accessory(l0, m, d);
      os << i << ',' << k << ',' << num(l0.real()) << ',' << num(l0.imag()) << ',' << num(b.real()) << ','
         << num(b.imag()) << '\n';
    }
  return os.str();
}

inline std::string spectrum_csv(const std::vector<SpectrumResult>& rs) {
  std::ostringstream os;
  os << "seed_re,seed_im,B_re,B_im,iters,converged,accepted,im_tPQ,im_tQR,im_tPR\n";
  for (const auto& r : rs)
    os << num(r.seed.real()) << ',' << num(r.seed.imag()) << ',' << num(r.B.real()) << ',' << num(r.B.imag()) << ','
       << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << (r.accepted ? 1 : 0) << ','
       << num(r.traces.pq.imag()) << ',' << num(r.traces.qr.imag()) << ',' << num(r.traces.pr.imag()) << '\n';
  return os.str();
}

inline json solver_json(const SolverConfig& c) {
  return {{"h", c.fd_step},
          {"max_iters", c.max_iters},
          {"tol", c.newton_tol},
          {"accept_tol", c.accept_rel_tol},
          {"central", c.central_difference},
          {"step", c.monodromy.step},
          {"radius", c.monodromy.radius}};
}

inline json map_sidecar(const HeunParams& p, const ConvergenceMap& m, const SolverConfig& c) {
  std::size_t failed = 0;
  for (auto f : m.failed) failed += f;
  return {{"schema", kSchemaVersion},
          {"params", params_json(p)},
          {"region_sqrtB",
           {{"x_min", m.region.x_min}, {"x_max", m.region.x_max}, {"y_min", m.region.y_min}, {"y_max", m.region.y_max}}},
          {"width", m.width},
          {"height", m.height},
          {"config", solver_json(c)},
          {"colour", "hue = arg(B), value = 0.5 + 0.5 |B| / (1 + |B|), failed pixels black"},
          {"failed_pixels", failed}};
}

inline std::string ppm_bytes(const ConvergenceMap& m) {
  std::ostringstream os(std::ios::binary);
  write_ppm(os, m);
  return os.str();
}

// Eigenvalue table behind the Lame spectrum figure.
inline std::string fig2a_csv(const HeunParams& p, const EllipticData& d, const std::vector<SpectrumResult>& rs) {
  const DarbouxParams m = heun_to_darboux_params(p);
  std::ostringstream os;
  os << "m,n,l0_re,l0_im,asym_sqrtB_re,asym_sqrtB_im,B_re,B_im,sqrtB_re,sqrtB_im,dist_lattice,dist_asym,iters,"
        "converged,accepted,beukers_ok\n";
  for (const auto& r : rs) {
    const Complex l0 = r.lattice_point;
    const Complex asym = asymptotic_sqrt_accessory(l0, m, d);
    const Complex s = sqrt_near(lame_darboux_accessory(p.with_accessory(r.B), d), l0);
    os << r.lattice_index.first << ',' << r.lattice_index.second << ',' << num(l0.real()) << ',' << num(l0.imag())
       << ',' << num(asym.real()) << ',' << num(asym.imag()) << ',' << num(r.B.real()) << ',' << num(r.B.imag())
       << ',' << num(s.real()) << ',' << num(s.imag()) << ',' << num(std::abs(s - l0)) << ','
       << num(std::abs(s - asym)) << ',' << r.iterations << ',' << r.converged << ',' << r.accepted << ','
       << (r.beukers_ok.value_or(false) ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string fig3_csv(const HeunParams& p, const std::vector<SpectrumResult>& rs) {
  std::ostringstream os;
  os << "gamma,delta,epsilon,alpha,beta,m,n,l0_re,l0_im,B_re,B_im,sqrtB_re,sqrtB_im,drift,iters,converged,accepted\n";
  for (const auto& r : rs) {
    const Complex s = sqrt_near(r.B, r.lattice_point);
    os << num(p.gamma.real()) << ',' << num(p.delta.real()) << ',' << num(p.epsilon.real()) << ','
       << num(p.alpha.real()) << ',' << num(p.beta.real()) << ',' << r.lattice_index.first << ','
       << r.lattice_index.second << ',' << num(r.lattice_point.real()) << ',' << num(r.lattice_point.imag()) << ','
       << num(r.B.real()) << ',' << num(r.B.imag()) << ',' << num(s.real()) << ',' << num(s.imag()) << ','
       << num(std::abs(s - r.lattice_point)) << ',' << r.iterations << ',' << r.converged << ',' << r.accepted
       << '\n';
  }
  return os.str();
}

inline void warn_if_reducible(const HeunParams& p, std::ostream& err) {
  if (heun_reducibility_guard(p))
    err << "warning: alpha is congruent to a sum of exponents; the monodromy may be reducible\n";
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Monodromy, unitarity and accessory-parameter search for Heun's equation"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // classify
  std::string input;
  bool numerical = false;
  std::string output;
  auto* c_classify = app.add_subcommand("classify", "Decide whether a matrix group preserves a Hermitian form");
  c_classify->add_option("--input", input, "JSON file: {\"generators\": [[[re,im],...], ...]}")->required();
  c_classify->add_flag("--numerical", numerical, "Use tolerances suited to integrator output");
  c_classify->add_option("-o,--output", output, "Output file (default stdout)");

  // generate
  std::string model = "su2";
  int count = 2;
  std::uint64_t seed = 1;
  auto* c_generate = app.add_subcommand("generate", "Emit a random generator set for classify");
  c_generate->add_option("--model", model, "su2, sl2r, so2, upper, scalar or generic");
  c_generate->add_option("--count", count, "Number of generators")->check(CLI::Range(1, 64));
  c_generate->add_option("--seed", seed, "Random seed");
  c_generate->add_option("-o,--output", output, "Output file (default stdout)");

  // monodromy
  HeunFlags heun;
  double b_re = 0.0, b_im = 0.0;
  MonodromyOptions mopt;
  double base_re = mopt.base.real(), base_im = mopt.base.imag();
  auto* c_mono = app.add_subcommand("monodromy", "Monodromy matrices about 0, 1 and a");
  heun.add(c_mono);
  c_mono->add_option("--B-re", b_re, "Real part of the accessory parameter");
  c_mono->add_option("--B-im", b_im, "Imaginary part of the accessory parameter");
  c_mono->add_option("--step", mopt.step, "Integrator step |dz|");
  c_mono->add_option("--radius", mopt.radius, "Loop radius around each singular point");
  c_mono->add_option("--base-re", base_re, "Real part of the base point");
  c_mono->add_option("--base-im", base_im, "Imaginary part of the base point");
  c_mono->add_option("-o,--output", output, "Output file (default stdout)");

  // asymptote
  double ma_re = -1.0, ma_im = 0.0;
  std::array<double, 4> mm{-0.5, 0.0, 0.0, 0.0};
  int range = 3;
  auto* c_asym = app.add_subcommand("asymptote", "Leading-order eigenvalues attached to lattice points");
  c_asym->add_option("--a-re", ma_re, "Real part of a");
  c_asym->add_option("--a-im", ma_im, "Imaginary part of a");
  c_asym->add_option("--m0", mm[0], "Darboux exponent at omega_0 = 0");
  c_asym->add_option("--m1", mm[1], "Darboux exponent at omega_1");
  c_asym->add_option("--m2", mm[2], "Darboux exponent at omega_2");
  c_asym->add_option("--m3", mm[3], "Darboux exponent at omega_3");
  c_asym->add_option("--range", range, "Lattice indices run over [-range, range]^2")->check(CLI::Range(1, 200));
  c_asym->add_option("-o,--output", output, "Output file (default stdout)");

  // spectrum
  SolverFlags solver;
  std::string seeds;
  auto* c_spec = app.add_subcommand("spectrum", "Newton sweep for accessory parameters with unitary monodromy");
  heun.add(c_spec);
  solver.add(c_spec);
  c_spec->add_option("--seeds", seeds, "Lattice seeds m:n,... (default {1,2,3} x {-1,0,1,2})");
  c_spec->add_option("-o,--output", output, "Output file (default stdout)");

  // convmap
  Region region;
  int width = 64, height = 64;
  auto* c_map = app.add_subcommand("convmap", "Convergence map over a region of the sqrt(B) plane (PPM)");
  heun.add(c_map);
  solver.add(c_map);
  c_map->add_option("--x-min", region.x_min, "Left edge, Re sqrt(B)");
  c_map->add_option("--x-max", region.x_max, "Right edge, Re sqrt(B)");
  c_map->add_option("--y-min", region.y_min, "Bottom edge, Im sqrt(B)");
  c_map->add_option("--y-max", region.y_max, "Top edge, Im sqrt(B)");
  c_map->add_option("--width", width, "Pixels per row")->check(CLI::Range(1, kMaxMapSide));
  c_map->add_option("--height", height, "Pixel rows")->check(CLI::Range(1, kMaxMapSide));
  c_map->add_option("-o,--output", output, "PPM output file; a .json sidecar is written next to it")->required();

  // reproduce
  std::string figure = "all";
  std::string outdir = "figures";
  int resolution = 64;
  double extent = 7.0;
  auto* c_repro = app.add_subcommand("reproduce", "Regenerate the data behind the spectrum figures");
  c_repro->add_option("--figure", figure, "fig2a, fig2b, fig3 or all")
      ->check(CLI::IsMember({"fig2a", "fig2b", "fig3", "all"}));
  c_repro->add_option("--outdir", outdir, "Output directory");
  c_repro->add_option("--resolution", resolution, "Convergence map side in pixels")
      ->check(CLI::Range(1, kMaxMapSide));
  c_repro->add_option("--extent", extent, "Convergence map covers sqrt(B) in [-extent, extent]^2");
  solver.add(c_repro);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*c_classify) {
      std::ifstream f(input);
      if (!f) throw UsageError("cannot read --input " + input);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw UsageError(std::string("--input is not valid JSON: ") + e.what());
      }
      std::vector<Mat2> gens;
      try {
        gens = generators_from_json(j);
      } catch (const json::exception& e) {
        throw UsageError(std::string("--input: ") + e.what());
      }
      const UnitarityOptions opt = numerical ? UnitarityOptions::numerical() : UnitarityOptions{};
      write_output(output, classify_json(gens, opt).dump(2) + "\n", out);
    } else if (*c_generate) {
      GroupModel gm;
      try {
        gm = parse_group_model(model);
      } catch (const Error&) {
        throw UsageError("--model: unknown model " + model);
      }
      GroupSampler gs(seed);
      json list = json::array();
      for (const Mat2& g : gs.sample(gm, count)) list.push_back(to_json(g));
      json j{{"schema", kSchemaVersion}, {"model", model}, {"seed", seed}, {"generators", list}};
      write_output(output, j.dump(2) + "\n", out);
    } else if (*c_mono) {
      mopt.base = {base_re, base_im};
      write_output(output, monodromy_json(heun.params({b_re, b_im}), mopt).dump(2) + "\n", out);
    } else if (*c_asym) {
      DarbouxParams m{{mm[0], mm[1], mm[2], mm[3]}, 0.0};
      write_output(output, asymptote_csv({ma_re, ma_im}, m, range), out);
    } else if (*c_spec) {
      const HeunParams p = heun.params();
      warn_if_reducible(p, err);
      const auto idx = seeds.empty() ? default_seed_indices() : parse_index_list(seeds);
      const auto rs = sweep(p, periods_from_a(p.a), idx, solver.cfg);
      write_output(output, spectrum_csv(rs), out);
    } else if (*c_map) {
      const HeunParams p = heun.params();
      const ConvergenceMap m = convergence_map(p, region, width, height, solver.cfg);
      write_output(output, ppm_bytes(m), out);
      write_output(output + ".json", map_sidecar(p, m, solver.cfg).dump(2) + "\n", out);
    } else if (*c_repro) {
      std::filesystem::create_directories(outdir);
      const auto path = [&](const std::string& name) { return (std::filesystem::path(outdir) / name).string(); };
      const HeunParams lame = HeunParams::lame(-1.0);
      const EllipticData d = periods_from_a(lame.a);
      if (figure == "fig2a" || figure == "all") {
        const auto rs = sweep(lame, d, default_seed_indices(), solver.cfg);
        write_output(path("fig2a_eigenvalues.csv"), fig2a_csv(lame, d, rs), out);
        write_output(path("fig2a_asymptotes.csv"), asymptote_csv(lame.a, heun_to_darboux_params(lame), 4), out);
      }
      if (figure == "fig2b" || figure == "all") {
        const Region reg{-extent, extent, -extent, extent};
        const ConvergenceMap m = convergence_map(lame, reg, resolution, resolution, solver.cfg);
        write_output(path("fig2b_convergence.ppm"), ppm_bytes(m), out);
        write_output(path("fig2b_convergence.ppm.json"), map_sidecar(lame, m, solver.cfg).dump(2) + "\n", out);
      }
      if (figure == "fig3" || figure == "all") {
        const std::array<std::pair<double, const char*>, 3> gammas{
            {{1.0 / 3.0, "1_3"}, {2.0 / 3.0, "2_3"}, {1.0, "1"}}};
        for (const auto& [g, tag] : gammas) {
          const HeunParams p = HeunParams::symmetric(g, -1.0);
          warn_if_reducible(p, err);
          const auto rs = sweep(p, d, default_seed_indices(), solver.cfg);
          write_output(path(std::string("fig3_gamma_") + tag + ".csv"), fig3_csv(p, rs), out);
        }
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << json{{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace heunmono::cli
