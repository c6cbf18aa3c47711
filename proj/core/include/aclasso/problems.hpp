#pragma once

#include <functional>

#include "aclasso/solver.hpp"

// Application-level drivers: log-contrast preprocessing for compositional
// count data, lambda-path generation with warm starts, and the column-wise
// sparse-subspace-clustering batch solver.

namespace aclasso {

enum class GridNorm { euclidean, max };

struct PathConfig {
  double rho_max = 0.9;
  double rho_min = 1e-6;
  int npoints = 20;
  GridNorm norm = GridNorm::max;
  bool warm_start = true;

  bool valid() const {
    return rho_max >= rho_min && rho_min > 0.0 && rho_max <= 1.0 &&
           npoints >= 2;
  }
};

struct PathEntry {
  double lambda = 0.0;
  Vector x;
  Index nnz = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double feasibility = 0.0;
  double seconds = 0.0;
  bool converged = false;
  int outer_iters = 0;
  int newton_iters = 0;
};

struct PathResult {
  std::vector<PathEntry> entries;
  double total_seconds = 0.0;
  bool all_converged = true;
};

struct PathOptions {
  SolveOptions solve;
  bool warm_start = true;
  // Called after each grid point; doubles as the insertion point for a
  // future screening rule between path points.
  std::function<void(std::size_t, const PathEntry&)> on_point;
};

struct SSCOptions {
  SolveOptions solve;
  int threads = 0;  // 0: hardware concurrency
  bool normalize_columns = false;
};

struct SSCResult {
  Matrix X;  // n x n coefficients, exactly zero diagonal
  std::vector<double> column_objectives;
  std::vector<Index> column_nnz;
  double objective = 0.0;    // 0.5*||A - AX||_F^2 + lambda*||X||_1
  double feasibility = 0.0;  // ||X'e - e||_F
  double seconds = 0.0;
  bool all_converged = true;
};

// Zero counts replaced by the 0.5 pseudo-count, rows normalized by their
// totals, then elementwise natural log.  Rejects negative entries.
Matrix log_contrast_preprocess(const Matrix& counts);

// lambda_j = rho_j * ||A'b|| with rho log10-equispaced descending from
// rho_max to rho_min.
std::vector<double> lambda_grid(const Matrix& A, const Vector& b,
                                const PathConfig& cfg);

// Solve at each grid value (descending), warm-starting primal and dual
// iterates from the previous point.  Non-convergence at one point is
// recorded and the path continues.
PathResult solve_path(const Problem& problem, const std::vector<double>& grid,
                      const PathOptions& options = {});

// Sparse subspace clustering: for each column j of A, solve the constrained
// lasso over the dictionary with column j removed (mu = ones, c = 1),
// re-insert the structural zero, and assemble the coefficient matrix.
// Columns are dispatched to a worker pool; assembly order is deterministic.
SSCResult ssc_solve(const Matrix& A, double lambda,
                    const SSCOptions& options = {});

}  // namespace aclasso
