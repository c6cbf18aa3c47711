#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "aclasso/io.hpp"
#include "aclasso/problems.hpp"

namespace aclasso {
namespace cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

int resolve_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("ACLASSO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

Vector resolve_mu(const RunConfig& cfg, Index n) {
  if (cfg.mu_spec == "ones") return Vector::Ones(n);
  Vector mu = load_vector(cfg.mu_spec);
  if (mu.size() != n)
    throw DataError("constraint vector '" + cfg.mu_spec + "' has " +
                    std::to_string(mu.size()) + " entries, expected " +
                    std::to_string(n));
  return mu;
}

ConfigEcho echo_config(const RunConfig& cfg) {
  ConfigEcho e;
  e.emplace_back("task", cfg.task);
  e.emplace_back("input", cfg.input);
  e.emplace_back("format", cfg.format);
  e.emplace_back("mu", cfg.mu_spec);
  e.emplace_back("c", format_double(cfg.c));
  if (cfg.path_points > 0) {
    e.emplace_back("rho_max", format_double(cfg.rho_max));
    e.emplace_back("rho_min", format_double(cfg.rho_min));
    e.emplace_back("path_points", std::to_string(cfg.path_points));
    e.emplace_back("grid_norm", cfg.grid_norm);
    e.emplace_back("warm_start", cfg.cold_start ? "false" : "true");
  } else {
    e.emplace_back("lambda", format_double(cfg.lambda));
  }
  e.emplace_back("tol", format_double(cfg.tol));
  e.emplace_back("seed", std::to_string(cfg.seed));
  e.emplace_back("output_format", cfg.output_format);
  return e;
}

// Writes through a stringstream so a failed solve still produces complete,
// atomic output.
int emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(cfg.output);
  if (!out) {
    std::cerr << "error: cannot write '" << cfg.output << "'\n";
    return kExitError;
  }
  out << text;
  return out.good() ? kExitOk : kExitError;
}

int run_regression_like(const RunConfig& cfg, LossKind kind) {
  const InputFormat fmt =
      cfg.format == "libsvm" ? InputFormat::libsvm : InputFormat::csv;
  Dataset ds = load_dataset(cfg.input, fmt);

  Problem problem;
  problem.A = std::move(ds.features);
  problem.loss = Loss{kind, std::move(ds.response)};
  problem.mu = resolve_mu(cfg, problem.A.cols());
  problem.c = cfg.c;
  if (kind == LossKind::logistic && !problem.loss.valid())
    throw DataError(cfg.input + ": logistic task needs -1/+1 responses");

  std::vector<double> grid;
  if (cfg.path_points > 0) {
    PathConfig pc;
    pc.rho_max = cfg.rho_max;
    pc.rho_min = cfg.rho_min;
    pc.npoints = cfg.path_points;
    pc.norm = cfg.grid_norm == "euclidean" ? GridNorm::euclidean : GridNorm::max;
    if (!pc.valid())
      throw DataError("invalid path configuration (need 0 < rho_min <= rho_max <= 1, points >= 2)");
    grid = lambda_grid(problem.A, problem.loss.anchor, pc);
  } else {
    if (cfg.lambda <= 0.0) throw DataError("need --lambda > 0 or a path configuration");
    grid.push_back(cfg.lambda);
  }

  PathOptions opts;
  opts.warm_start = !cfg.cold_start;
  opts.solve.tol = cfg.tol;
  opts.solve.max_outer = cfg.max_outer;
  opts.solve.max_inner = cfg.max_inner;
  const PathResult path = solve_path(problem, grid, opts);

  std::ostringstream text;
  if (cfg.output_format == "csv")
    write_path_csv(text, path);
  else
    write_path_json(text, echo_config(cfg), path);
  const int io_code = emit(cfg, text.str());
  if (io_code != kExitOk) return io_code;
  return path.all_converged ? kExitOk : kExitNotConverged;
}

int run_ssc(const RunConfig& cfg) {
  if (cfg.lambda <= 0.0) throw DataError("ssc task needs --lambda > 0");
  const Matrix A = load_matrix_csv(cfg.input);

  SSCOptions opts;
  opts.threads = resolve_threads(cfg);
  opts.solve.tol = cfg.tol;
  opts.solve.max_outer = cfg.max_outer;
  opts.solve.max_inner = cfg.max_inner;
  const SSCResult ssc = ssc_solve(A, cfg.lambda, opts);

  std::ostringstream text;
  if (cfg.output_format == "csv")
    write_ssc_csv(text, ssc, cfg.lambda);
  else
    write_ssc_json(text, echo_config(cfg), ssc, cfg.lambda);
  const int io_code = emit(cfg, text.str());
  if (io_code != kExitOk) return io_code;
  return ssc.all_converged ? kExitOk : kExitNotConverged;
}

int run_prox(const RunConfig& cfg) {
  const Vector x = load_vector(cfg.input);
  ConstraintSpec spec{resolve_mu(cfg, x.size()), cfg.c, cfg.lambda};
  if (!spec.valid()) throw DataError("invalid constraint (mu zero or lambda < 0)");

  const auto t0 = std::chrono::steady_clock::now();
  const ProxResult prox = prox_affine_l1(x, spec);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const double feasibility = std::abs(spec.mu.dot(prox.z) - spec.c);

  std::ostringstream text;
  if (cfg.output_format == "csv")
    write_prox_csv(text, prox, feasibility, seconds);
  else
    write_prox_json(text, echo_config(cfg), prox, feasibility, seconds);
  return emit(cfg, text.str());
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, bool solver_task) {
  cmd->add_option("--input", cfg.input, "input data file")->required();
  cmd->add_option("--mu", cfg.mu_spec,
                  "constraint normal: 'ones' or a vector file");
  cmd->add_option("--c", cfg.c, "constraint right-hand side");
  cmd->add_option("--lambda", cfg.lambda, "regularization weight");
  cmd->add_option("--seed", cfg.seed, "seed echoed into the output");
  cmd->add_option("--output", cfg.output, "output file (default stdout)");
  cmd->add_option("--output-format", cfg.output_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  if (solver_task) {
    cmd->add_option("--tol", cfg.tol, "relative KKT tolerance");
    cmd->add_option("--max-outer", cfg.max_outer, "outer iteration cap");
    cmd->add_option("--max-inner", cfg.max_inner, "inner iteration cap");
    cmd->add_option("--threads", cfg.threads,
                    "worker threads (ssc); ACLASSO_THREADS overrides");
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"affine-constrained sparse regression, classification and "
               "subspace clustering"};
  app.require_subcommand(1);

  CLI::App* regress = app.add_subcommand("regress", "constrained lasso");
  CLI::App* classify =
      app.add_subcommand("classify", "constrained logistic lasso");
  CLI::App* ssc = app.add_subcommand("ssc", "sparse subspace clustering");
  CLI::App* prox =
      app.add_subcommand("prox", "constrained l1 proximal operator");

  for (CLI::App* cmd : {regress, classify}) {
    add_common_options(cmd, cfg, true);
    cmd->add_option("--format", cfg.format, "csv or libsvm")
        ->check(CLI::IsMember({"csv", "libsvm"}));
    cmd->add_option("--rho-max", cfg.rho_max, "largest grid ratio");
    cmd->add_option("--rho-min", cfg.rho_min, "smallest grid ratio");
    cmd->add_option("--path-points", cfg.path_points,
                    "grid size (enables path mode)");
    cmd->add_option("--grid-norm", cfg.grid_norm, "norm for ||A'b||")
        ->check(CLI::IsMember({"max", "euclidean"}));
    cmd->add_flag("--cold-start", cfg.cold_start,
                  "disable warm starts along the path");
  }
  add_common_options(ssc, cfg, true);
  add_common_options(prox, cfg, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitError;
  }

  try {
    if (regress->parsed()) {
      cfg.task = "regress";
      return run_regression_like(cfg, LossKind::least_squares);
    }
    if (classify->parsed()) {
      cfg.task = "classify";
      return run_regression_like(cfg, LossKind::logistic);
    }
    if (ssc->parsed()) {
      cfg.task = "ssc";
      return run_ssc(cfg);
    }
    cfg.task = "prox";
    return run_prox(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace cli
}  // namespace aclasso
