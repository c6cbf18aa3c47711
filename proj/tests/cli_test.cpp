#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace {

namespace fs = std::filesystem;
using aclasso::cli::run_command;

struct ScratchDir {
  fs::path dir;
  ScratchDir() {
    dir = fs::temp_directory_path() / "aclasso_cli_test";
    fs::create_directories(dir);
  }
  ~ScratchDir() { std::error_code ec; fs::remove_all(dir, ec); }
  std::string file(const std::string& name, const std::string& contents) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << contents;
    return p.string();
  }
  std::string path(const std::string& name) { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small regression dataset: 8 samples, 5 features.
std::string regression_csv() {
  return "y,f1,f2,f3,f4,f5\n"
         "1.2,0.5,-0.1,0.3,1.0,-0.7\n"
         "-0.4,0.2,0.8,-0.5,0.1,0.4\n"
         "0.7,-0.3,0.6,0.9,-0.2,0.1\n"
         "2.1,1.1,-0.4,0.2,0.6,-0.3\n"
         "-1.3,-0.8,0.3,-0.6,0.4,0.9\n"
         "0.2,0.1,0.2,0.3,-0.9,0.5\n"
         "1.6,0.9,-0.6,0.7,0.2,-0.1\n"
         "-0.9,-0.5,0.7,-0.2,-0.4,0.6\n";
}

std::string classification_csv() {
  return "1,0.5,-0.1,0.3\n"
         "-1,0.2,0.8,-0.5\n"
         "1,-0.3,0.6,0.9\n"
         "-1,-0.8,0.3,-0.6\n"
         "1,1.1,-0.4,0.2\n"
         "-1,0.1,0.2,-0.9\n";
}

nlohmann::json strip_seconds(nlohmann::json doc) {
  for (auto& rec : doc["results"]) rec.erase("seconds");
  if (doc.contains("seconds")) doc.erase("seconds");
  return doc;
}

}  // namespace

TEST_CASE("regress single solve converges and writes json") {
  ScratchDir scratch;
  const auto data = scratch.file("d.csv", regression_csv());
  const auto out = scratch.path("out.json");
  const int code = run_command({"regress", "--input", data, "--mu", "ones",
                                "--c", "0", "--lambda", "0.1", "--output",
                                out});
  CHECK(code == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["config"]["task"] == "regress");
  REQUIRE(doc["results"].size() == 1);
  CHECK(doc["results"][0]["converged"].get<bool>());
  CHECK(doc["results"][0]["kkt_residual"].get<double>() <= 1e-8);
  CHECK(doc["results"][0]["feasibility"].get<double>() <= 1e-10);
  CHECK(doc["solutions"][0].size() == 5);
}

TEST_CASE("rerunning with the same seed reproduces all non-timing fields") {
  ScratchDir scratch;
  const auto data = scratch.file("d.csv", regression_csv());
  const auto out1 = scratch.path("out1.json");
  const auto out2 = scratch.path("out2.json");
  const std::vector<std::string> base = {
      "regress", "--input", data,  "--rho-max", "0.9", "--rho-min",
      "0.01",    "--path-points", "5", "--seed", "7"};
  auto with_output = [&](const std::string& o) {
    std::vector<std::string> args = base;
    args.push_back("--output");
    args.push_back(o);
    return args;
  };
  CHECK(run_command(with_output(out1)) == 0);
  CHECK(run_command(with_output(out2)) == 0);
  CHECK(strip_seconds(nlohmann::json::parse(slurp(out1))) ==
        strip_seconds(nlohmann::json::parse(slurp(out2))));
}

TEST_CASE("csv output format emits one row per grid point") {
  ScratchDir scratch;
  const auto data = scratch.file("d.csv", regression_csv());
  const auto out = scratch.path("out.csv");
  const int code = run_command({"regress", "--input", data, "--rho-max", "0.9",
                                "--rho-min", "0.05", "--path-points", "4",
                                "--output", out, "--output-format", "csv"});
  CHECK(code == 0);
  std::istringstream in(slurp(out));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "lambda,nnz,objective,kkt_residual,feasibility,seconds");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("usage errors exit with code 1") {
  ScratchDir scratch;
  const auto data = scratch.file("d.csv", regression_csv());
  CHECK(run_command({"regress", "--input", data, "--lambda", "0.1",
                     "--no-such-flag"}) == 1);
  CHECK(run_command({"unknowntask"}) == 1);
  CHECK(run_command({}) == 1);
  CHECK(run_command({"regress", "--input", scratch.path("missing.csv"),
                     "--lambda", "0.1"}) == 1);
  CHECK(run_command({"regress", "--input", data}) == 1);  // no lambda, no path
}

TEST_CASE("malformed csv row exits with code 1") {
  ScratchDir scratch;
  const auto data = scratch.file("bad.csv", "1.0,2.0,3.0\n1.0,2.0\n");
  CHECK(run_command({"regress", "--input", data, "--lambda", "0.1"}) == 1);
}

TEST_CASE("classify requires -1/+1 labels") {
  ScratchDir scratch;
  const auto bad = scratch.file("bad.csv", "2.0,0.5,0.3\n-1.0,0.2,-0.5\n");
  CHECK(run_command({"classify", "--input", bad, "--lambda", "0.05"}) == 1);

  const auto good = scratch.file("good.csv", classification_csv());
  const auto out = scratch.path("out.json");
  CHECK(run_command({"classify", "--input", good, "--lambda", "0.05",
                     "--output", out}) == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["results"][0]["converged"].get<bool>());
}

TEST_CASE("hitting the outer cap exits 2 but still writes results") {
  ScratchDir scratch;
  const auto data = scratch.file("d.csv", regression_csv());
  const auto out = scratch.path("out.json");
  const int code = run_command({"regress", "--input", data, "--rho-max", "0.5",
                                "--rho-min", "0.1", "--path-points", "3",
                                "--tol", "1e-13", "--max-outer", "1",
                                "--output", out});
  CHECK(code == 2);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["results"].size() == 3);
}

TEST_CASE("prox task computes a feasible thresholded point") {
  ScratchDir scratch;
  const auto data = scratch.file("x.txt", "2.0\n0.0\n");
  const auto out = scratch.path("out.json");
  const int code = run_command({"prox", "--input", data, "--mu", "ones", "--c",
                                "1", "--lambda", "0.1", "--output", out});
  CHECK(code == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["results"][0]["w"].get<double>() == doctest::Approx(0.5));
  CHECK(doc["solutions"][0][0].get<double>() == doctest::Approx(1.4));
  CHECK(doc["solutions"][0][1].get<double>() == doctest::Approx(-0.4));
}

TEST_CASE("prox task csv output") {
  ScratchDir scratch;
  const auto data = scratch.file("x.txt", "2.0\n0.0\n");
  const auto out = scratch.path("out.csv");
  CHECK(run_command({"prox", "--input", data, "--mu", "ones", "--c", "1",
                     "--lambda", "0.1", "--output", out, "--output-format",
                     "csv"}) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("w,nnz,feasibility,seconds\n", 0) == 0);
  CHECK(text.find("0.5,2,") != std::string::npos);
}

TEST_CASE("prox task accepts a constraint vector from file") {
  ScratchDir scratch;
  const auto data = scratch.file("x.txt", "3.0\n");
  const auto mu = scratch.file("mu.txt", "2.0\n");
  const auto out = scratch.path("out.json");
  CHECK(run_command({"prox", "--input", data, "--mu", mu, "--c", "4",
                     "--lambda", "0.5", "--output", out}) == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["results"][0]["w"].get<double>() == doctest::Approx(0.25));

  const auto shortmu = scratch.file("short.txt", "1.0\n1.0\n");
  CHECK(run_command({"prox", "--input", data, "--mu", shortmu, "--lambda",
                     "0.5"}) == 1);
}

TEST_CASE("ssc task solves the whole-matrix problem") {
  ScratchDir scratch;
  const auto data = scratch.file("m.csv",
                                 "1.0,0.9,0.1\n"
                                 "0.2,0.3,1.0\n"
                                 "-0.5,-0.4,0.2\n");
  const auto out = scratch.path("out.json");
  const int code = run_command({"ssc", "--input", data, "--lambda", "1e-3",
                                "--output", out});
  CHECK(code == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["feasibility"].get<double>() <= 1e-9);
  CHECK(doc["results"].size() == 3);
  CHECK(doc["solutions"].size() == 3);
  // Structural zero diagonal.
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(doc["solutions"][j][j].get<double>() == 0.0);

  // The thread-count override must not change the numbers.
  setenv("ACLASSO_THREADS", "3", 1);
  const auto out2 = scratch.path("out2.json");
  CHECK(run_command({"ssc", "--input", data, "--lambda", "1e-3", "--output",
                     out2}) == 0);
  unsetenv("ACLASSO_THREADS");
  CHECK(strip_seconds(nlohmann::json::parse(slurp(out2))) ==
        strip_seconds(nlohmann::json::parse(slurp(out))));
}

TEST_CASE("help exits zero") {
  CHECK(run_command({"--help"}) == 0);
}
