#pragma once

#include <string>
#include <vector>

// Command-line front end.  run_command executes one task and returns the
// process exit code: 0 on success/convergence, 2 when a solve failed to
// converge (results are still written), 1 on usage or data errors.

namespace aclasso {
namespace cli {

struct RunConfig {
  std::string task;                // regress | classify | ssc | prox
  std::string input;
  std::string format = "csv";      // csv | libsvm
  std::string mu_spec = "ones";    // "ones" or a vector file
  double c = 0.0;
  double lambda = 0.0;             // single-solve when > 0
  double rho_max = 0.0;            // path mode when path_points > 0
  double rho_min = 0.0;
  int path_points = 0;
  std::string grid_norm = "max";   // max | euclidean
  bool cold_start = false;
  double tol = 1e-8;
  int max_outer = 100;
  int max_inner = 100;
  unsigned long seed = 0;          // echoed into the output for provenance
  std::string output;              // empty writes to stdout
  std::string output_format = "json";  // json | csv
  int threads = 0;                 // 0: ACLASSO_THREADS env or hardware
};

// args excludes the program name.
int run_command(const std::vector<std::string>& args);

}  // namespace cli
}  // namespace aclasso
