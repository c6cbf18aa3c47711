#include "aclasso/problems.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace aclasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Index count_nonzeros(const Vector& x) {
  Index nnz = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) ++nnz;
  return nnz;
}

// Work-stealing loop over [0, count) on a small pool.  Each index is owned by
// exactly one worker, so writes into preassigned slots never race.  The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(Index count, int threads, const std::function<void(Index)>& body) {
  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc > 0 ? static_cast<int>(hc) : 1;
  }
  threads = static_cast<int>(std::min<Index>(threads, count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      try {
        for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);  // drain remaining work
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Matrix log_contrast_preprocess(const Matrix& counts) {
  if ((counts.array() < 0.0).any())
    throw std::invalid_argument("log_contrast_preprocess: negative count");
  Matrix out = counts;
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j)
      if (out(i, j) == 0.0) out(i, j) = 0.5;
    out.row(i) /= out.row(i).sum();
  }
  return out.array().log().matrix();
}

std::vector<double> lambda_grid(const Matrix& A, const Vector& b,
                                const PathConfig& cfg) {
  if (!cfg.valid()) throw std::invalid_argument("lambda_grid: invalid config");
  const Vector atb = A.transpose() * b;
  const double scale = cfg.norm == GridNorm::euclidean
                           ? atb.norm()
                           : atb.lpNorm<Eigen::Infinity>();
  const double lo = std::log10(cfg.rho_min);
  const double hi = std::log10(cfg.rho_max);
  std::vector<double> grid(static_cast<std::size_t>(cfg.npoints));
  for (int j = 0; j < cfg.npoints; ++j) {
    const double t = static_cast<double>(j) / (cfg.npoints - 1);
    grid[static_cast<std::size_t>(j)] =
        std::pow(10.0, hi + t * (lo - hi)) * scale;
  }
  return grid;
}

PathResult solve_path(const Problem& problem, const std::vector<double>& grid,
                      const PathOptions& options) {
  if (grid.empty()) throw std::invalid_argument("solve_path: empty grid");
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (grid[j] > grid[j - 1])
      throw std::invalid_argument("solve_path: grid must be sorted descending");

  const auto t0 = Clock::now();
  PathResult result;
  result.entries.reserve(grid.size());

  SolveOptions solve = options.solve;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    SolveResult r = solve_ppa(problem, grid[j], solve);
    PathEntry entry;
    entry.lambda = grid[j];
    entry.x = r.x;
    entry.nnz = count_nonzeros(r.x);
    entry.objective = r.objective;
    entry.kkt_residual = r.kkt_residual;
    entry.feasibility = r.feasibility;
    entry.seconds = r.seconds;
    entry.converged = r.converged;
    entry.outer_iters = r.outer_iters;
    entry.newton_iters = r.total_newton_iters;
    result.all_converged = result.all_converged && r.converged;

    if (options.warm_start) {
      solve.x0 = r.x;
      solve.y0 = r.y;
    }
    if (options.on_point) options.on_point(j, entry);
    result.entries.push_back(std::move(entry));
  }
  result.total_seconds = seconds_since(t0);
  return result;
}

SSCResult ssc_solve(const Matrix& A, double lambda, const SSCOptions& options) {
  const Index n = A.cols();
  const Index m = A.rows();
  if (n < 2) throw std::invalid_argument("ssc_solve: needs at least 2 columns");

  const auto t0 = Clock::now();
  Matrix data = A;
  if (options.normalize_columns) {
    for (Index j = 0; j < n; ++j) {
      const double nrm = data.col(j).norm();
      if (nrm > 0.0) data.col(j) /= nrm;
    }
  }

  SSCResult result;
  result.X = Matrix::Zero(n, n);
  result.column_objectives.assign(static_cast<std::size_t>(n), 0.0);
  result.column_nnz.assign(static_cast<std::size_t>(n), 0);
  std::vector<char> converged(static_cast<std::size_t>(n), 1);

  parallel_for(n, options.threads, [&](Index j) {
    Problem sub;
    sub.A = Matrix(m, n - 1);
    sub.A.leftCols(j) = data.leftCols(j);
    sub.A.rightCols(n - 1 - j) = data.rightCols(n - 1 - j);
    sub.loss = Loss{LossKind::least_squares, data.col(j)};
    sub.mu = Vector::Ones(n - 1);
    sub.c = 1.0;

    const SolveResult r = solve_ppa(sub, lambda, options.solve);
    converged[static_cast<std::size_t>(j)] = r.converged ? 1 : 0;
    result.column_objectives[static_cast<std::size_t>(j)] = r.objective;
    result.column_nnz[static_cast<std::size_t>(j)] = count_nonzeros(r.x);
    result.X.col(j).head(j) = r.x.head(j);
    result.X.col(j).tail(n - 1 - j) = r.x.tail(n - 1 - j);
  });

  for (Index j = 0; j < n; ++j) {
    result.objective += result.column_objectives[static_cast<std::size_t>(j)];
    result.all_converged =
        result.all_converged && converged[static_cast<std::size_t>(j)];
  }
  result.feasibility =
      (result.X.transpose() * Vector::Ones(n) - Vector::Ones(n)).norm();
  result.seconds = seconds_since(t0);
  return result;
}

}  // namespace aclasso
