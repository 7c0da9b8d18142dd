// Runs the capcover binary and checks the exit-code contract per command.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "capcover/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           fmt::format("capcover_cli_{}_{}", ::getpid(),
                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs `capcover args`, keeping stdout in `out_`, and returns the exit code.
  int run(const std::string& args, const std::string& env = "") {
    const std::string out = path("stdout.txt");
    const std::string cmd = fmt::format("{} '{}' {} > '{}' 2> '{}'", env,
                                        CAPCOVER_BIN, args, out, path("stderr.txt"));
    const int status = std::system(cmd.c_str());
    out_ = capcover::read_file(out);
    err_ = capcover::read_file(path("stderr.txt"));
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void write(const std::string& name, const std::string& text) {
    capcover::write_file_atomic(path(name), text);
  }

  fs::path dir_;
  std::string out_, err_;
};

}  // namespace

TEST_F(Cli, GenCoverVerifyChain) {
  const std::string inst = path("chain.json"), cert = path("chain.cert");
  ASSERT_EQ(run(fmt::format("gen chain --dim 2 --n 3 --out {}", inst)), 0);
  EXPECT_EQ(run(fmt::format("cover {} --out {}", inst, cert)), 0) << err_;
  EXPECT_EQ(run(fmt::format("verify {} {}", cert, inst)), 0) << out_;
  EXPECT_NE(out_.find("OK"), std::string::npos);
}

TEST_F(Cli, GenErrors) {
  EXPECT_EQ(run("gen chain --dim 0 --n 3"), 64);
  EXPECT_EQ(run("gen chain --dim 2 --n 3 --radius 0.6"), 65);
  EXPECT_NE(run("gen wobble"), 0);
}

TEST_F(Cli, CheckExitCodes) {
  const std::string chain = path("c.json"), sep = path("s.json"),
                    gray = path("g.json");
  ASSERT_EQ(run(fmt::format("gen tree --n 5 --seed 3 --out {}", chain)), 0);
  ASSERT_EQ(run(fmt::format("gen separable --seed 3 --out {}", sep)), 0);
  EXPECT_EQ(run("check " + chain), 0);
  EXPECT_NE(out_.find("status: nonseparable"), std::string::npos);
  EXPECT_EQ(run("check " + sep), 2);
  EXPECT_NE(out_.find("witness_normal"), std::string::npos);

  // Two caps 2e-8 short of touching: margin below the feasibility tolerance.
  const double d = 0.6 + 2e-8;
  write("g.json", fmt::format(
                      R"({{"format_version": 1, "dim": 2, "caps": [
  {{"center": [1, 0, 0], "radius": 0.3}},
  {{"center": [{:.17g}, {:.17g}, 0], "radius": 0.3}}]}})",
                      std::cos(d), std::sin(d)));
  EXPECT_EQ(run("check " + gray), 3) << out_;
  EXPECT_EQ(run("check " + path("missing.json")), 64);
}

TEST_F(Cli, CoverExitCodes) {
  const std::string sep = path("s.json"), tree = path("t.json");
  ASSERT_EQ(run(fmt::format("gen separable --seed 1 --out {}", sep)), 0);
  EXPECT_EQ(run(fmt::format("cover {} --out {}", sep, path("s.cert"))), 4);
  EXPECT_NE(out_.find("witness_normal"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("s.cert")));

  // Forced through without the check, the cover cannot contain both caps.
  EXPECT_EQ(run(fmt::format("cover {} --skip-check --out {}", sep, path("s2.cert"))),
            5);
  if (fs::exists(path("s2.cert"))) {
    EXPECT_FALSE(capcover::load_certificate(path("s2.cert")).certificate.valid);
  }

  write("big.json", R"({"format_version": 1, "dim": 2, "caps": [
    {"center": [1, 0, 0], "radius": 0.8},
    {"center": [0, 1, 0], "radius": 0.8}]})");
  EXPECT_EQ(run(fmt::format("cover {} --out {}", path("big.json"), path("b.cert"))),
            65);

  write("broken.json", "{\"format_version\": 1,\n \"dim\": 2,\n \"caps\": [1]}");
  EXPECT_EQ(run("cover " + path("broken.json")), 64);
  EXPECT_NE(err_.find("broken.json:3"), std::string::npos) << err_;

  ASSERT_EQ(run(fmt::format("gen tree --n 8 --seed 2 --out {}", tree)), 0);
  EXPECT_EQ(run(fmt::format("cover {} --exact-threshold 0 --out {}", tree,
                            path("t.cert"))),
            0)
      << err_;
  EXPECT_TRUE(capcover::load_certificate(path("t.cert")).certificate.heuristic_signing);
}

TEST_F(Cli, CoverIsDeterministic) {
  const std::string tree = path("t.json");
  ASSERT_EQ(run(fmt::format("gen tree --n 7 --seed 5 --out {}", tree)), 0);
  ASSERT_EQ(run(fmt::format("cover {} --seed 9 --out {}", tree, path("a.cert"))), 0);
  ASSERT_EQ(run(fmt::format("cover {} --seed 9 --out {}", tree, path("b.cert"))), 0);
  EXPECT_EQ(capcover::read_file(path("a.cert")), capcover::read_file(path("b.cert")));
}

TEST_F(Cli, SeedFromEnvironment) {
  ASSERT_EQ(run(fmt::format("gen tree --n 4 --seed 42 --out {}", path("a.json"))), 0);
  ASSERT_EQ(run(fmt::format("gen tree --n 4 --out {}", path("b.json")),
                "CAPCOVER_SEED=42"),
            0);
  ASSERT_EQ(run(fmt::format("gen tree --n 4 --out {}", path("c.json"))), 0);
  EXPECT_EQ(capcover::read_file(path("a.json")), capcover::read_file(path("b.json")));
  EXPECT_NE(capcover::read_file(path("a.json")), capcover::read_file(path("c.json")));
}

TEST_F(Cli, VerifyRejectsTampering) {
  const std::string inst = path("t.json"), cert = path("t.cert");
  ASSERT_EQ(run(fmt::format("gen tree --n 5 --seed 8 --out {}", inst)), 0);
  ASSERT_EQ(run(fmt::format("cover {} --out {}", inst, cert)), 0);
  EXPECT_EQ(run(fmt::format("verify {} {} --samples 2000", cert, inst)), 0);

  capcover::CertificateFile f = capcover::load_certificate(cert);
  f.certificate.cover_cap.radius -= 0.05;
  capcover::save_certificate(path("shrunk.cert"), f);
  EXPECT_EQ(run(fmt::format("verify {} {}", path("shrunk.cert"), inst)), 1);

  ASSERT_EQ(run(fmt::format("gen tree --n 5 --seed 9 --out {}", path("other.json"))), 0);
  EXPECT_EQ(run(fmt::format("verify {} {}", cert, path("other.json"))), 1);
  EXPECT_NE(out_.find("digest"), std::string::npos);
}

TEST_F(Cli, Oracles) {
  const std::string chain = path("c.json"), sep = path("s.json");
  ASSERT_EQ(run(fmt::format("gen chain --n 4 --overlap 0.1 --out {}", chain)), 0);
  ASSERT_EQ(run(fmt::format("gen separable --out {}", sep)), 0);
  EXPECT_EQ(run("oracle grid-sep --resolution 200000 " + chain), 0);
  EXPECT_EQ(run("oracle grid-sep --resolution 200000 " + sep), 1);
  EXPECT_EQ(run("oracle lemma7 --families 50 --samples 50"), 0);
  EXPECT_EQ(run("oracle lemma7 --families 50 --samples 50 --corrupt"), 1);
  EXPECT_EQ(run("oracle mec " + chain), 0);
  EXPECT_NE(run("oracle mec"), 0);
}

TEST_F(Cli, PlotAndBench) {
  const std::string inst = path("c.json"), cert = path("c.cert");
  ASSERT_EQ(run(fmt::format("gen chain --equator --n 3 --out {}", inst)), 0);
  ASSERT_EQ(run(fmt::format("cover {} --out {}", inst, cert)), 0);
  EXPECT_EQ(run(fmt::format("plot {} {} --out {}", inst, cert, path("a.svg"))), 0);
  EXPECT_EQ(run(fmt::format("plot {} {} --out {}", inst, cert, path("b.svg"))), 0);
  EXPECT_EQ(capcover::read_file(path("a.svg")), capcover::read_file(path("b.svg")));

  ASSERT_EQ(run(fmt::format("gen separable --dim 3 --out {}", path("d3.json"))), 0);
  EXPECT_EQ(run(fmt::format("plot {} --out {}", path("d3.json"), path("d3.svg"))), 1);

  EXPECT_EQ(run(fmt::format("bench --suite mixed --seed 4 --count 20 --out {}",
                            path("b.csv"))),
            0);
  const std::string csv = capcover::read_file(path("b.csv"));
  EXPECT_EQ(csv.rfind("n,dim,sum_alpha,w_before,w_after,merges,max_slack", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}
