#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "futurefill/sequence_io.hpp"
#include "futurefill/spectral.hpp"

#ifndef FUTUREFILL_CLI_PATH
#error "FUTUREFILL_CLI_PATH must name the CLI binary"
#endif

namespace fs = std::filesystem;
using namespace futurefill;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FUTUREFILL_CLI_PATH + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("futurefill-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("frobnicate").status, 2);
  EXPECT_EQ(cli("gen").status, 2);
  EXPECT_EQ(cli("bench -L 16 --engines warp").status, 2);
  EXPECT_EQ(cli("--help").status, 0);
}

TEST_F(CliTest, GenPromptExample) {
  write("p.txt", "# prompt\n1\n2\n");
  write("phi.txt", "1\n10\n100\n1000\n");
  const auto out = path("y.txt");
  const auto r = cli("gen --mode prompt --prompt " + path("p.txt") + " --filter file --filter-file " +
                     path("phi.txt") + " -n 2 --engine epoched -o " + out);
  ASSERT_EQ(r.status, 0) << r.out;
  const auto y = load_sequence(out);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_NEAR(y[0], 12.0, 1e-9);
  EXPECT_NEAR(y[1], 132.0, 1e-9);
  const auto meters = nlohmann::json::parse(slurp(out + ".meters.json"));
  EXPECT_EQ(meters["prefill"]["fast_convolutions"], 1);
  EXPECT_EQ(meters["L_prompt"], 2);
  EXPECT_LE(meters["peak_cache_elems"].get<int>(), 8);
}

TEST_F(CliTest, GenScratchCopyKernel) {
  write("phi.txt", "1\n");
  const auto r = cli("gen -n 16 --filter file --filter-file " + path("phi.txt") + " --seed-token 3 -o " +
                     path("y.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto y = load_sequence(path("y.txt"));
  ASSERT_EQ(y.size(), 16u);
  for (double v : y.values()) EXPECT_EQ(v, 3.0);
}

TEST_F(CliTest, GenIsDeterministic) {
  for (const char* name : {"a.txt", "b.txt"}) {
    ASSERT_EQ(cli("--seed 11 gen -n 300 --engine continuous --token-map clamp -o " + path(name)).status, 0);
  }
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_EQ(slurp(path("a.txt.meters.json")), slurp(path("b.txt.meters.json")));
}

TEST_F(CliTest, MalformedPromptReportsLine) {
  write("p.txt", "1\n2\nabc\n");
  const auto r = cli("gen --mode prompt --prompt " + path("p.txt") + " -n 2");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find(":3:"), std::string::npos) << r.out;
}

TEST_F(CliTest, MissingInputIsIoError) {
  EXPECT_EQ(cli("gen --mode prompt --prompt " + path("nope.txt") + " -n 2").status, 3);
  EXPECT_EQ(cli("slope " + path("nope.csv")).status, 3);
}

TEST_F(CliTest, FiltersExport) {
  auto r = cli("filters -L 1 -k 1");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "1,1\n1\n");

  ASSERT_EQ(cli("filters -L 64 -k 8 -o " + path("bank.csv")).status, 0);
  const auto bank = load_filter_bank(path("bank.csv"));
  const Eigen::MatrixXd phi = bank.as_matrix();
  EXPECT_LE((phi.transpose() * phi - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);

  EXPECT_EQ(cli("filters -L 4 -k 5").status, 2);
  EXPECT_EQ(cli("filters -L 5000 -k 2").status, 2);
}

TEST_F(CliTest, BenchAndSlope) {
  const auto csv = path("bench.csv");
  auto r = cli("--seed 4 bench -L 2^4..2^8 --trials 2 --warmup 0 -o " + csv);
  ASSERT_EQ(r.status, 0) << r.out;
  const std::string text = slurp(csv);
  std::size_t lines = 0;
  for (char c : text) lines += (c == '\n');
  EXPECT_EQ(lines, 1u + 3u * 5u * 2u);

  r = cli("slope " + csv + " --metric mac_count --engine naive");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto fits = nlohmann::json::parse(r.out);
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_NEAR(fits[0]["slope"].get<double>(), 2.0, 0.05);
  EXPECT_EQ(fits[0]["points"], 5);

  ASSERT_EQ(cli("bench -L 16,32 --trials 1 -o " + path("short.csv")).status, 0);
  EXPECT_EQ(cli("slope " + path("short.csv")).status, 2);
}

TEST_F(CliTest, BenchUnwritableOutput) {
  EXPECT_EQ(cli("bench -L 16 -o " + path("missing-dir/out.csv")).status, 3);
}

TEST_F(CliTest, BenchSpectralCapIsConfigError) {
  EXPECT_EQ(cli("bench -L 8192 --filters spectral -o " + path("x.csv")).status, 2);
}

TEST_F(CliTest, VerifyFaultExitsOne) {
  auto r = cli("--seed 2 verify --max-length 16 --inject-fault futurefill --json");
  EXPECT_EQ(r.status, 1);
  const auto report = nlohmann::json::parse(r.out);
  for (const auto& s : report["suites"]) {
    EXPECT_EQ(s["passed"].get<bool>(), s["name"] != "futurefill") << s["name"];
  }
  EXPECT_EQ(cli("verify --max-length 16").status, 0);
}
