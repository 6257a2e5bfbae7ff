#include "dpq2p1/config.hpp"
#include "dpq2p1_cli/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "dpq2p1");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dpq2p1::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// File contents without the `# output.dir = ...` header line.
std::string body(const fs::path& p) {
  std::string text = slurp(p);
  const auto at = text.find("# output.dir = ");
  if (at != std::string::npos) text.erase(at, text.find('\n', at) + 1 - at);
  return text;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("dpq2p1_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write_config(const std::string& text) {
    const fs::path p = dir / "run.cfg";
    std::ofstream(p) << text;
    return p;
  }
};

const char* kSolveConfig = R"([geometry]
rho = 0.1
layers = 4
elements_per_layer = 16
grading = 4

[traction]
kind = radial
t = auto
lambda = 2
)";

}  // namespace

TEST_F(Cli, SolveConvergesAndWritesOutputs) {
  const fs::path cfg = write_config(kSolveConfig);
  const CliRun r = run({"solve", "--config", cfg.string(), "--out", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.err.empty());
  const std::string trace = slurp(dir / "a" / "newton_trace.csv");
  EXPECT_NE(trace.find("# geometry.rho = 0.10000000000000001\n"), std::string::npos);
  EXPECT_NE(trace.find("# command = solve\n"), std::string::npos);
  EXPECT_NE(trace.find("iter,alpha,halvings,res_u,res_p,inc_u,inc_p"), std::string::npos);
  const std::string summary = slurp(dir / "a" / "summary.csv");
  EXPECT_NE(summary.find("converged,true\n"), std::string::npos);
  EXPECT_EQ(slurp(dir / "a" / "solution.txt").rfind("dpq2p1-sol v1", 0), 0u);
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRunsAndJobCounts) {
  const fs::path cfg = write_config(kSolveConfig);
  ASSERT_EQ(run({"solve", "--config", cfg.string(), "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run({"solve", "--config", cfg.string(), "--out", (dir / "b").string()}).code, 0);
  for (const char* f : {"newton_trace.csv", "summary.csv", "solution.txt"}) {
    EXPECT_EQ(body(dir / "a" / f), body(dir / "b" / f)) << f;
  }
  ASSERT_EQ(run({"solve", "--config", cfg.string(), "--out", (dir / "c").string(), "--jobs", "3"})
                .code,
            0);
  EXPECT_EQ(slurp(dir / "a" / "solution.txt"), slurp(dir / "c" / "solution.txt"));
}

TEST_F(Cli, MalformedConfigExitsWithTwo) {
  const fs::path cfg = write_config("[material]\ns = 2.5\n");
  const CliRun r = run({"solve", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err, "ERROR config s out of (1,2)\n");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({"--config", "x.cfg"}).code, 2);
  const CliRun missing = run({"mesh", "--config", (dir / "none.cfg").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.err.rfind("ERROR io ", 0), 0u);
}

TEST_F(Cli, SolverFailureReportsCodeAndKeepsTrace) {
  const fs::path cfg = write_config(std::string(kSolveConfig) + "\n[newton]\nsigma = 0.5\n");
  const CliRun r = run({"solve", "--config", cfg.string(), "--out", (dir / "f").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("ERROR damping_floor_reached ", 0), 0u) << r.err;
  EXPECT_NE(slurp(dir / "f" / "newton_trace.csv").find("# failed at step 1"), std::string::npos);
}

TEST_F(Cli, MeshWritesDumpAndQuality) {
  const fs::path cfg = write_config("[geometry]\nrho = 0.01\ntable_row = 0\n");
  const CliRun r = run({"mesh", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "mesh.txt").rfind("dpq2p1-mesh v1 rho=0.01 layers=8 N=20\n", 0), 0u);
  const std::string q = slurp(dir / "mesh_quality.csv");
  EXPECT_NE(q.find("element,layer,h_T,edge_ratio,shape_ratio\n"), std::string::npos);
  EXPECT_NE(q.find("\n159,7,"), std::string::npos);
}

TEST_F(Cli, InfSupWritesOneRowPerMesh) {
  const fs::path cfg =
      write_config("[geometry]\nrho = 0.5\n[infsup]\nmeshes = 1x8, 2x8\nstate = identity\n");
  const CliRun r = run({"infsup", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "infsup.csv");
  EXPECT_NE(csv.find("\n1,8,"), std::string::npos);
  EXPECT_NE(csv.find("\n2,8,"), std::string::npos);
}

TEST_F(Cli, OverridesAreValidated) {
  const dpq2p1::RunConfig base = dpq2p1::parse_config("");
  dpq2p1::cli::Overrides o;
  o.quadrature = 4;
  o.pin_rotation = true;
  o.jobs = 2;
  const dpq2p1::RunConfig c = dpq2p1::cli::apply_overrides(base, o);
  EXPECT_EQ(c.newton.quadrature_order, 4);
  EXPECT_TRUE(c.pin_rotation);
  EXPECT_EQ(c.jobs, 2);
  o.quadrature = 11;
  EXPECT_THROW(dpq2p1::cli::apply_overrides(base, o), dpq2p1::Error);
}
