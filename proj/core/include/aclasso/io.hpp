#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aclasso/problems.hpp"

// Dataset ingestion (CSV and libsvm) and machine-readable result emission.
// All floating-point output is printed with 17 significant digits so that a
// write/parse round trip recovers every scalar exactly.

namespace aclasso {

enum class InputFormat { csv, libsvm };
enum class OutputFormat { json, csv };

struct Dataset {
  Matrix features;
  Vector response;
  std::vector<std::string> feature_names;  // empty when the file has no header
};

// Parse failures throw DataError naming the offending line.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV: first column response, remaining columns features, one optional
// header line.  libsvm: "label index:value ..." lines with 1-based indices,
// densified to the maximum index seen.
Dataset load_dataset(const std::string& path, InputFormat format);

// Whole-matrix CSV (every column numeric); used by the ssc and prox tasks.
Matrix load_matrix_csv(const std::string& path);

// Vector file: one value per line (blank lines skipped).
Vector load_vector(const std::string& path);

// Ordered key/value echo of the run configuration.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_path_json(std::ostream& out, const ConfigEcho& config,
                     const PathResult& path, bool include_solutions = true);
void write_path_csv(std::ostream& out, const PathResult& path);

void write_ssc_json(std::ostream& out, const ConfigEcho& config,
                    const SSCResult& ssc, double lambda,
                    bool include_solutions = true);
void write_ssc_csv(std::ostream& out, const SSCResult& ssc, double lambda);

void write_prox_json(std::ostream& out, const ConfigEcho& config,
                     const ProxResult& prox, double feasibility,
                     double seconds, bool include_solutions = true);
void write_prox_csv(std::ostream& out, const ProxResult& prox,
                    double feasibility, double seconds);

// "%.17g" rendering used for every floating-point field.
std::string format_double(double v);

}  // namespace aclasso
