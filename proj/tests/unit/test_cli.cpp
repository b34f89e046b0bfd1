#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "agmm/io.hpp"
#include "agmm/loss.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "agmm_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(AGMM_CLI_PATH) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file;
  cmd += " 2> " + p("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, HelpAndBadArguments) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("cluster --k 2"), 2);
  EXPECT_EQ(run("generate --model sim3 --out " + p("x.csv")), 2);
}

TEST(Cli, GenerateThenClusterRecoversSim2) {
  ASSERT_EQ(run("generate --model sim2 --n 300 --seed 7 --out " + p("d.csv") + " --truth " + p("t.txt") +
                " --params-out " + p("params.json")),
            0);
  const agmm::Matrix y = agmm::read_dataset(p("d.csv"));
  EXPECT_EQ(y.rows(), 300u);
  EXPECT_EQ(y.cols(), 5u);
  ASSERT_EQ(run("cluster --data " + p("d.csv") + " --k 3 --model hetero --init spectral --seed 1 --out " +
                p("z.txt") + " --truth " + p("t.txt") + " --report " + p("r.json")),
            0);
  const auto h = agmm::misclustering_rate(agmm::read_labels(p("z.txt")), agmm::read_labels(p("t.txt")), 3).rate;
  EXPECT_LT(h, 0.2);
  const std::string report = slurp(p("r.json"));
  EXPECT_NE(report.find("\"h_curve\""), std::string::npos);
}

TEST(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(run("generate --model sim1 --n 60 --seed 3 --out " + p("a.csv")), 0);
  ASSERT_EQ(run("generate --model sim1 --n 60 --seed 3 --out " + p("b.csv")), 0);
  EXPECT_EQ(slurp(p("a.csv")), slurp(p("b.csv")));
}

TEST(Cli, SnrAndOracleReports) {
  ASSERT_EQ(run("generate --model sim2 --n 30 --seed 7 --out " + p("d2.csv") + " --params-out " + p("p2.json")), 0);
  ASSERT_EQ(run("snr --params " + p("p2.json"), p("snr.json")), 0);
  const std::string snr = slurp(p("snr.json"));
  EXPECT_NE(snr.find("\"snr\": null"), std::string::npos);
  EXPECT_NE(snr.find("\"snr_prime\""), std::string::npos);
  ASSERT_EQ(run("oracle --params " + p("p2.json") + " --pair 0 1 --trials 2000 --seed 2", p("oracle.json")), 0);
  EXPECT_NE(slurp(p("oracle.json")).find("\"mc_error\""), std::string::npos);
  EXPECT_EQ(run("oracle --params " + p("p2.json") + " --pair 0 0"), 2);
}

TEST(Cli, IoErrorsExitFour) {
  EXPECT_EQ(run("snr --params /nonexistent/params.json"), 4);
  EXPECT_EQ(run("cluster --data /nonexistent/d.csv --k 2 --out " + p("z.txt")), 4);
  EXPECT_NE(slurp(p("stderr.txt")).find("/nonexistent/d.csv"), std::string::npos);
}

TEST(Cli, ExperimentWritesCurves) {
  {
    std::ofstream cfg(p("cfg.json"));
    cfg << R"({"model_kind":"sim2","n":90,"replications":2,"methods":["vanilla","vanilla+alg2"],)"
        << R"("max_iters":3,"base_seed":5,"lloyd_restarts":2})";
  }
  ASSERT_EQ(run("experiment --config " + p("cfg.json") + " --out " + p("curves.csv") + " --report " +
                p("meta.json")),
            0);
  const std::string csv = slurp(p("curves.csv"));
  EXPECT_EQ(csv.rfind("method,iteration,mean_h,mean_ln_h,n_zero_reps\n", 0), 0u);
  EXPECT_NE(slurp(p("meta.json")).find("replications"), std::string::npos);
  {
    std::ofstream cfg(p("bad.json"));
    cfg << R"({"model_kind":"sim2","methods":["vanilla+alg1"]})";
  }
  EXPECT_EQ(run("experiment --config " + p("bad.json") + " --out " + p("c2.csv")), 2);
}
