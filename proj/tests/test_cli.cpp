#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heunmono/cli.hpp"

using namespace heunmono;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "heunmono");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* base = std::getenv("HEUNMONO_TEST_TMP");
  const fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / "cli_scratch";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove_all(p);
  return p;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch(name);
  std::ofstream(p) << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, ClassifyIdentity) {
  const fs::path in = write_file("identity.json", R"({"generators": [[[1,0],[0,0],[0,0],[1,0]]]})");
  const Outcome r = run({"classify", "--input", in.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["case"], "Scalar");
  EXPECT_EQ(j["unitary"], true);
  EXPECT_EQ(j["algebra_dim"], 1);
}

TEST(Cli, ClassifyCounterexampleRowForm) {
  const fs::path in = write_file("pair.json", R"([[[1, 1], [0, 1]], [[1, [0, 1]], [0, 1]]])");
  const Outcome r = run({"classify", "--input", in.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["case"], "AbelianReducible");
  EXPECT_EQ(j["unitary"], false);
  EXPECT_EQ(j["algebra_dim"], 3);
  EXPECT_TRUE(j["form"].is_null());
}

TEST(Cli, ClassifyBadInput) {
  const fs::path in = write_file("bad.json", "{not json");
  EXPECT_EQ(run({"classify", "--input", in.string()}).code, 1);
  const fs::path shape = write_file("shape.json", R"({"generators": [[1, 2, 3]]})");
  EXPECT_EQ(run({"classify", "--input", shape.string()}).code, 1);
  EXPECT_EQ(run({"classify", "--input", scratch("missing.json").string()}).code, 1);
}

TEST(Cli, ClassifySingularIsNumericalError) {
  const fs::path in = write_file("singular.json", R"([[1, 2, 2, 4]])");
  const Outcome r = run({"classify", "--input", in.string()});
  EXPECT_EQ(r.code, 2);
  const json j = json::parse(r.err);
  EXPECT_EQ(j["error"], "singular_matrix");
}

TEST(Cli, GenerateThenClassify) {
  const fs::path gens = scratch("sl2r.json");
  ASSERT_EQ(run({"generate", "--model", "sl2r", "--count", "3", "--seed", "9", "-o", gens.string()}).code, 0);
  const Outcome r = run({"classify", "--input", gens.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["case"], "Irreducible");
  EXPECT_EQ(j["unitary"], true);
  EXPECT_LT(j["form_residual"].get<double>(), 1e-8);
  EXPECT_EQ(j["seven_traces"].size(), 7u);
  EXPECT_EQ(run({"generate", "--model", "nope"}).code, 1);
}

TEST(Cli, GenerateIsReproducible) {
  EXPECT_EQ(run({"generate", "--seed", "4"}).out, run({"generate", "--seed", "4"}).out);
  EXPECT_NE(run({"generate", "--seed", "4"}).out, run({"generate", "--seed", "5"}).out);
}

TEST(Cli, UnknownFlagWritesNothing) {
  const fs::path out = scratch("never.csv");
  const Outcome r = run({"spectrum", "--bogus", "1", "-o", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }

TEST(Cli, HelpListsDefaults) {
  const Outcome r = run({"--help-all"});
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"--step", "0.0004", "--radius", "0.2", "--fd-step", "1e-05", "--accept-tol", "0.03",
                        "--max-iters", "20"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, MonodromyLame) {
  const Outcome r = run({"monodromy"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char* k : {"P", "Q", "R"}) {
    const auto t = j["traces"][k];
    EXPECT_LT(std::hypot(t[0].get<double>(), t[1].get<double>()), 1e-4);
  }
  EXPECT_NEAR(j["infinity_trace_ratio"][0].get<double>(), 2.0, 1e-3);
  EXPECT_EQ(j["P0"].size(), 4u);
  EXPECT_EQ(j["schema"], cli::kSchemaVersion);
}

TEST(Cli, MonodromyNumericalFailure) {
  // Radius large enough that the loop about 0 encloses 1.
  const Outcome r = run({"monodromy", "--radius", "1.5"});
  EXPECT_EQ(r.code, 2);
  const json j = json::parse(r.err);
  EXPECT_TRUE(j.contains("error"));
  EXPECT_TRUE(j.contains("message"));
}

TEST(Cli, MonodromyFuchsViolation) {
  const Outcome r = run({"monodromy", "--alpha", "0.3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "invalid_input");
}

TEST(Cli, Asymptote) {
  const Outcome r = run({"asymptote", "--range", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "m,n,l0_re,l0_im,Bp_re,Bp_im");
  EXPECT_EQ(count_lines(r.out), 1 + 8);
}

TEST(Cli, SpectrumSingleSeed) {
  const fs::path out = scratch("spectrum.csv");
  const Outcome r = run({"spectrum", "--gamma", "0.5", "--delta", "0.5", "--epsilon", "0.5", "--alpha", "0.25", "--beta",
                     "0.25", "--a-re", "-1", "--seeds", "1:0", "-o", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(out));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "seed_re,seed_im,B_re,B_im,iters,converged,accepted,im_tPQ,im_tQR,im_tPR");
  std::vector<std::string> f;
  std::stringstream rs(row);
  for (std::string x; std::getline(rs, x, ',');) f.push_back(x);
  ASSERT_EQ(f.size(), 10u);
  EXPECT_EQ(f[5], "1");
  EXPECT_EQ(f[6], "1");
  const Complex B(std::stod(f[2]), std::stod(f[3]));
  EXPECT_LT(std::abs(std::sqrt(B) - 1.198), 0.05);
}

TEST(Cli, SpectrumBadSeeds) { EXPECT_EQ(run({"spectrum", "--seeds", "1-0"}).code, 1); }

TEST(Cli, SpectrumWarnsOnReducibleParameters) {
  const Outcome r = run({"spectrum", "--gamma", "1", "--delta", "1", "--epsilon", "1", "--alpha", "1", "--beta", "1",
                     "--seeds", "1:0", "--max-iters", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, ConvergenceMapWithSidecar) {
  const fs::path out = scratch("map.ppm");
  const Outcome r = run({"convmap", "--width", "2", "--height", "2", "--x-min", "-2", "--x-max", "2", "--y-min", "-2",
                     "--y-max", "2", "-o", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string ppm = slurp(out);
  EXPECT_EQ(ppm.substr(0, 11), "P6\n2 2\n255\n");
  EXPECT_EQ(ppm.size(), 11u + 12u);
  const json side = json::parse(slurp(out.string() + ".json"));
  EXPECT_EQ(side["width"], 2);
  EXPECT_EQ(side["config"]["max_iters"], 20);
  EXPECT_DOUBLE_EQ(side["region_sqrtB"]["x_min"].get<double>(), -2.0);

  const fs::path again = scratch("map2.ppm");
  ASSERT_EQ(run({"convmap", "--width", "2", "--height", "2", "--x-min", "-2", "--x-max", "2", "--y-min", "-2",
                 "--y-max", "2", "-o", again.string()})
                .code,
            0);
  EXPECT_EQ(slurp(again), ppm);
}

TEST(Cli, ConvergenceMapNeedsOutput) { EXPECT_EQ(run({"convmap", "--width", "2"}).code, 1); }

TEST(Cli, ConvergenceMapResolutionGuard) {
  EXPECT_EQ(run({"convmap", "--width", "5000", "-o", scratch("big.ppm").string()}).code, 1);
}

TEST(Cli, ReproduceSmall) {
  const fs::path dir = scratch("figures");
  const Outcome r = run({"reproduce", "--outdir", dir.string(), "--resolution", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"fig2a_eigenvalues.csv", "fig2a_asymptotes.csv", "fig2b_convergence.ppm",
                        "fig2b_convergence.ppm.json", "fig3_gamma_1_3.csv", "fig3_gamma_2_3.csv", "fig3_gamma_1.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  // fig2a: at least 10 accepted eigenvalues among the 12 seeds.
  std::istringstream csv(slurp(dir / "fig2a_eigenvalues.csv"));
  std::string line;
  std::getline(csv, line);
  int accepted = 0, rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 16u);
    if (f[14] == "1") ++accepted;
  }
  EXPECT_EQ(rows, 12);
  EXPECT_GE(accepted, 10);

  std::istringstream g3(slurp(dir / "fig3_gamma_1_3.csv"));
  std::getline(g3, line);
  std::getline(g3, line);
  EXPECT_EQ(line.substr(0, line.find(',')), cli::num(1.0 / 3.0));
}
