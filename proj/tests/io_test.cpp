#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aclasso/io.hpp"
#include "test_support.hpp"

using namespace aclasso;

namespace {

namespace fs = std::filesystem;

struct ScratchDir {
  fs::path dir;
  ScratchDir() {
    dir = fs::temp_directory_path() / "aclasso_io_test";
    fs::create_directories(dir);
  }
  ~ScratchDir() { std::error_code ec; fs::remove_all(dir, ec); }
  std::string file(const std::string& name, const std::string& contents) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << contents;
    return p.string();
  }
};

PathResult tiny_path_result() {
  PathResult path;
  PathEntry e;
  e.lambda = 0.1;
  e.x = Vector::Zero(3);
  e.x << 1.25, 0.0, -0.5;
  e.nnz = 2;
  e.objective = 0.7071067811865476;
  e.kkt_residual = 3.5e-12;
  e.feasibility = 1e-16;
  e.seconds = 0.002;
  e.converged = true;
  path.entries.push_back(e);
  e.lambda = 0.01;
  e.converged = false;
  path.entries.push_back(e);
  path.all_converged = false;
  return path;
}

}  // namespace

TEST_CASE("CSV dataset parsing") {
  ScratchDir scratch;
  SUBCASE("with header") {
    const auto p = scratch.file("a.csv", "y,f1,f2\n1.0,2.0,3.0\n");
    const Dataset ds = load_dataset(p, InputFormat::csv);
    CHECK(ds.features.rows() == 1);
    CHECK(ds.features.cols() == 2);
    CHECK(ds.response[0] == 1.0);
    CHECK(ds.features(0, 0) == 2.0);
    CHECK(ds.features(0, 1) == 3.0);
    REQUIRE(ds.feature_names.size() == 2);
    CHECK(ds.feature_names[0] == "f1");
  }
  SUBCASE("without header") {
    const auto p = scratch.file("b.csv", "1.0,2.0\n-1.0,4.5\n");
    const Dataset ds = load_dataset(p, InputFormat::csv);
    CHECK(ds.features.rows() == 2);
    CHECK(ds.features.cols() == 1);
    CHECK(ds.feature_names.empty());
  }
  SUBCASE("field-count mismatch names the line") {
    const auto p = scratch.file("c.csv", "1.0,2.0,3.0\n1.0,2.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, InputFormat::csv),
                         doctest::Contains("line 2"), DataError);
  }
  SUBCASE("non-numeric field past the header names the line") {
    const auto p = scratch.file("d.csv", "y,f\n1.0,2.0\n1.0,oops\n");
    CHECK_THROWS_WITH_AS(load_dataset(p, InputFormat::csv),
                         doctest::Contains("line 3"), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset((scratch.dir / "nope.csv").string(),
                                 InputFormat::csv),
                    DataError);
  }
}

TEST_CASE("libsvm parsing densifies indexed entries") {
  ScratchDir scratch;
  const auto p = scratch.file("a.svm", "1 1:0.5 3:2.0\n-1 2:1.5\n");
  const Dataset ds = load_dataset(p, InputFormat::libsvm);
  CHECK(ds.features.rows() == 2);
  CHECK(ds.features.cols() == 3);
  CHECK(ds.response[0] == 1.0);
  CHECK(ds.response[1] == -1.0);
  CHECK(ds.features(0, 0) == 0.5);
  CHECK(ds.features(0, 1) == 0.0);
  CHECK(ds.features(0, 2) == 2.0);
  CHECK(ds.features(1, 1) == 1.5);

  const auto bad = scratch.file("b.svm", "1 1:0.5\n1 oops\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad, InputFormat::libsvm),
                       doctest::Contains("line 2"), DataError);
}

TEST_CASE("matrix and vector loaders") {
  ScratchDir scratch;
  const auto m = scratch.file("m.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
  const Matrix M = load_matrix_csv(m);
  CHECK(M.rows() == 3);
  CHECK(M.cols() == 2);
  CHECK(M(2, 1) == 6.0);

  const auto v = scratch.file("v.txt", "1.5\n\n-2.5\n0.125\n");
  const Vector V = load_vector(v);
  REQUIRE(V.size() == 3);
  CHECK(V[1] == -2.5);

  const auto bad = scratch.file("w.txt", "1.5\nxyz\n");
  CHECK_THROWS_WITH_AS(load_vector(bad), doctest::Contains("line 2"), DataError);
}

TEST_CASE("format_double round-trips random doubles exactly") {
  auto rng = testsup::make_rng(70);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = std::ldexp(mant(rng), expo(rng));
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("path JSON round-trips scalars exactly") {
  const PathResult path = tiny_path_result();
  const ConfigEcho config = {{"task", "regress"},
                             {"input", "weird \"name\"\\path.csv"},
                             {"lambda", format_double(0.1)}};
  std::ostringstream out;
  write_path_json(out, config, path);

  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["config"]["task"] == "regress");
  CHECK(doc["config"]["input"] == "weird \"name\"\\path.csv");
  REQUIRE(doc["results"].size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& rec = doc["results"][j];
    const PathEntry& e = path.entries[j];
    CHECK(rec["lambda"].get<double>() == e.lambda);
    CHECK(rec["nnz"].get<Index>() == e.nnz);
    CHECK(rec["objective"].get<double>() == e.objective);
    CHECK(rec["kkt_residual"].get<double>() == e.kkt_residual);
    CHECK(rec["feasibility"].get<double>() == e.feasibility);
    CHECK(rec["seconds"].get<double>() == e.seconds);
    CHECK(rec["converged"].get<bool>() == e.converged);
  }
  REQUIRE(doc["solutions"].size() == 2);
  for (Index i = 0; i < 3; ++i)
    CHECK(doc["solutions"][0][static_cast<std::size_t>(i)].get<double>() ==
          path.entries[0].x[i]);
}

TEST_CASE("path CSV has one row per lambda plus a header") {
  const PathResult path = tiny_path_result();
  std::ostringstream out;
  write_path_csv(out, path);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "lambda,nnz,objective,kkt_residual,feasibility,seconds");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // Scalar fields parse back exactly.
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    CHECK(std::strtod(field.c_str(), nullptr) ==
          path.entries[static_cast<std::size_t>(rows - 1)].lambda);
  }
  CHECK(rows == 2);
}

TEST_CASE("prox and ssc writers emit parseable documents") {
  ProxResult prox;
  prox.z = Vector::Zero(2);
  prox.z << 1.4, -0.4;
  prox.w = 0.5;
  std::ostringstream pj;
  write_prox_json(pj, {{"task", "prox"}}, prox, 1e-16, 0.001);
  const auto pdoc = nlohmann::json::parse(pj.str());
  CHECK(pdoc["results"][0]["w"].get<double>() == 0.5);
  CHECK(pdoc["results"][0]["nnz"].get<int>() == 2);
  CHECK(pdoc["solutions"][0][0].get<double>() == 1.4);

  SSCResult ssc;
  ssc.X = Matrix::Zero(2, 2);
  ssc.X(1, 0) = ssc.X(0, 1) = 1.0;
  ssc.column_objectives = {1e-4, 1e-4};
  ssc.column_nnz = {1, 1};
  ssc.objective = 2e-4;
  ssc.feasibility = 3.1e-13;
  std::ostringstream sj;
  write_ssc_json(sj, {{"task", "ssc"}}, ssc, 1e-4);
  const auto sdoc = nlohmann::json::parse(sj.str());
  CHECK(sdoc["feasibility"].get<double>() == 3.1e-13);
  CHECK(sdoc["results"].size() == 2);
  CHECK(sdoc["solutions"][1][0].get<double>() == 1.0);

  std::ostringstream sc;
  write_ssc_csv(sc, ssc, 1e-4);
  CHECK(sc.str().find("lambda,nnz,objective,feasibility,seconds") == 0);
}
