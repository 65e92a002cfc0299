// apc: command-line front end for the APC solver toolkit.
//
//   apc gen <n> <N> <mean> <seed> [--out DIR]
//   apc analyze --input A.mtx --m M [...]
//   apc solve   --input A.mtx --m M --method NAME [--optimal | --gamma ... ] [...]
//   apc bench   --input A.mtx --m M [--method a,b,...] [--m-sweep 2,4,8,16] [...]

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apc/error.hpp"
#include "apc/format.hpp"
#include "apc/ingest.hpp"
#include "apc/report.hpp"
#include "apc/simnet.hpp"
#include "apc/solvers.hpp"
#include "apc/spectral.hpp"
#include "apc/trace.hpp"
#include "cli_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace apc::cli {
namespace {

constexpr std::size_t kBenchIterationCap = 100000;

struct FixtureShape {
  const char* name;
  std::size_t rows;
  std::size_t cols;
};

constexpr FixtureShape kFixtureShapes[] = {{"QC324", 324, 324}, {"ORSIRR1", 1030, 1030}, {"ASH608", 608, 188}};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

fs::path output_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.out.value_or(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return parse_matrix_market(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()));
  }
}

Vector read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_vector(in);
}

void check_fixture_shape(const std::string& path, const Matrix& a) {
  std::string stem = fs::path(path).stem().string();
  std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::toupper(c); });
  std::erase(stem, '_');
  for (const auto& f : kFixtureShapes) {
    if (stem == f.name && (a.rows() != f.rows || a.cols() != f.cols)) {
      throw Error(ErrorCode::InvalidDimensions, path + " is " + std::to_string(a.rows()) + "x" +
                                                    std::to_string(a.cols()) + ", expected " + std::to_string(f.rows) +
                                                    "x" + std::to_string(f.cols));
    }
  }
}

struct LoadedSystem {
  Matrix a;
  Vector b;
  std::optional<Vector> x_star;
};

LoadedSystem load_system(const RunConfig& cfg) {
  if (!cfg.input) throw Error(ErrorCode::Usage, "--input is required");
  const std::string path = resolve_input_path(*cfg.input);
  LoadedSystem s;
  s.a = read_matrix_file(path);
  check_fixture_shape(path, s.a);

  if (cfg.solution) s.x_star = read_vector_file(*cfg.solution);
  if (cfg.rhs) {
    s.b = read_vector_file(*cfg.rhs);
  } else if (s.x_star) {
    if (s.x_star->size() != s.a.cols()) throw Error(ErrorCode::DimensionMismatch, "solution length differs from n");
    s.b = mat_vec(s.a, *s.x_star);
  } else {
    SyntheticSystem syn = synth_rhs(s.a, cfg.rhs_seed.value_or(1));
    s.b = std::move(syn.b);
    s.x_star = std::move(syn.x_star);
  }
  if (cfg.permute_seed) permute_rows(s.a, s.b, *cfg.permute_seed);
  return s;
}

PartitionedSystem partition(const LoadedSystem& s, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::Usage, "--m must be positive");
  return partition_rows(s.a, s.b, m, s.x_star);
}

std::vector<Method> selected_methods(const RunConfig& cfg, bool default_all) {
  std::vector<Method> out;
  if (!cfg.methods) {
    if (default_all) out.assign(std::begin(kAllMethods), std::end(kAllMethods));
    return out;
  }
  for (const std::string& name : *cfg.methods) {
    if (name.empty()) continue;
    const auto m = parse_method(name);
    if (!m) {
      throw Error(ErrorCode::Usage,
                  "unknown method '" + name + "' (expected apc, dgd, dnag, dhbm, admm, cimmino, pdhbm or consensus)");
    }
    out.push_back(*m);
  }
  if (out.empty()) throw Error(ErrorCode::Usage, "empty method set");
  return out;
}

Budget make_budget(const RunConfig& cfg, std::size_t default_cap) {
  Budget b;
  b.tol = cfg.tol.value_or(1e-10);
  b.max_iters = cfg.max_iters.value_or(0);
  b.iteration_cap = cfg.iteration_cap.value_or(default_cap);
  b.admm_dual_updates = cfg.admm_dual.value_or(false);
  return b;
}

json system_json(const PartitionedSystem& sys) {
  return {{"N", sys.rows()}, {"n", sys.cols()}, {"m", sys.m}, {"p", sys.p}, {"x_star_known", sys.x_star.has_value()}};
}

// ---------------------------------------------------------------------------
// Explicit parameters

bool has_explicit(const RunConfig& c) { return c.gamma || c.eta || c.alpha || c.beta || c.xi || c.nu; }

double need(const std::optional<double>& v, const char* flag, Method m) {
  if (!v) throw Error(ErrorCode::Usage, std::string(flag) + " is required for " + std::string(to_string(m)));
  return *v;
}

void forbid(const std::optional<double>& v, const char* flag, Method m) {
  if (v) throw Error(ErrorCode::Usage, std::string(flag) + " does not apply to " + std::string(to_string(m)));
}

MethodParams explicit_params(const PartitionedSystem& sys, const SpectralSummary& s, Method method,
                             const RunConfig& c) {
  MethodParams p;
  p.method = method;
  switch (method) {
    case Method::Apc:
      p.gamma = need(c.gamma, "--gamma", method);
      p.eta = need(c.eta, "--eta", method);
      forbid(c.alpha, "--alpha", method), forbid(c.beta, "--beta", method);
      forbid(c.xi, "--xi", method), forbid(c.nu, "--nu", method);
      p.rho_predicted = apc_spectral_radius(p.gamma, p.eta, s.mu).spectral_radius;
      break;
    case Method::Consensus:
      throw Error(ErrorCode::Usage, "consensus has no tunable parameters");
    case Method::Dgd:
      p.alpha = need(c.alpha, "--alpha", method);
      forbid(c.gamma, "--gamma", method), forbid(c.eta, "--eta", method), forbid(c.beta, "--beta", method);
      forbid(c.xi, "--xi", method), forbid(c.nu, "--nu", method);
      p.rho_predicted = dhbm_spectral_radius(p.alpha, 0.0, s.lambda_ata);
      break;
    case Method::Dnag:
    case Method::Dhbm:
    case Method::PrecondDhbm:
      p.alpha = need(c.alpha, "--alpha", method);
      p.beta = need(c.beta, "--beta", method);
      forbid(c.gamma, "--gamma", method), forbid(c.eta, "--eta", method);
      forbid(c.xi, "--xi", method), forbid(c.nu, "--nu", method);
      if (method == Method::Dnag) {
        p.rho_predicted = dnag_spectral_radius(p.alpha, p.beta, s.lambda_ata);
      } else if (method == Method::Dhbm) {
        p.rho_predicted = dhbm_spectral_radius(p.alpha, p.beta, s.lambda_ata);
      } else {
        const PrecondSystem pre = build_preconditioned(sys);
        p.rho_predicted = dhbm_spectral_radius(p.alpha, p.beta, sym_eigs(gram_cols(pre.c)));
      }
      break;
    case Method::Admm:
      p.xi = need(c.xi, "--xi", method);
      forbid(c.gamma, "--gamma", method), forbid(c.eta, "--eta", method), forbid(c.alpha, "--alpha", method);
      forbid(c.beta, "--beta", method), forbid(c.nu, "--nu", method);
      if (!(p.xi > 0.0)) throw Error(ErrorCode::Usage, "--xi must be positive");
      p.rho_predicted = admm_spectral_radius(sys, p.xi);
      break;
    case Method::Cimmino:
      p.nu = need(c.nu, "--nu", method);
      forbid(c.gamma, "--gamma", method), forbid(c.eta, "--eta", method), forbid(c.alpha, "--alpha", method);
      forbid(c.beta, "--beta", method), forbid(c.xi, "--xi", method);
      p.eta = static_cast<double>(sys.m) * p.nu;
      p.rho_predicted = apc_spectral_radius(1.0, p.eta, s.mu).spectral_radius;
      break;
  }
  p.t_predicted = convergence_time(p.rho_predicted);
  return p;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen(const RunConfig& cfg) {
  const std::size_t n = cfg.n.value();
  const std::size_t rows = cfg.rows.value();
  const double mean = cfg.mean.value_or(0.0);
  const std::uint64_t seed = cfg.seed.value_or(0);
  const SyntheticSystem s = synth_gaussian(n, rows, mean, seed);

  const fs::path dir = output_dir(cfg);
  {
    std::ofstream out = open_output(dir / "system.mtx");
    write_matrix_market(out, s.a);
  }
  {
    std::ofstream out = open_output(dir / "solution.mtx");
    write_matrix_market_vector(out, s.x_star);
  }
  json manifest = {{"config", config_to_json(cfg)},
                   {"generator", "xoshiro256** seeded by splitmix64; Box-Muller normals"},
                   {"rows", rows},
                   {"cols", n},
                   {"mean", mean},
                   {"seed", seed},
                   {"files", {{"matrix", "system.mtx"}, {"solution", "solution.mtx"}}}};
  write_json(dir / "manifest.json", manifest);
  std::cout << "wrote " << (dir / "system.mtx").string() << ", " << (dir / "solution.mtx").string() << ", "
            << (dir / "manifest.json").string() << '\n';
  return 0;
}

int cmd_analyze(const RunConfig& cfg) {
  const LoadedSystem loaded = load_system(cfg);
  const PartitionedSystem sys = partition(loaded, cfg.m.value_or(1));
  const SpectralSummary s = compute_x(sys);
  const std::vector<Method> methods = selected_methods(cfg, true);

  json per_method = json::object();
  std::optional<Error> first_error;
  std::size_t failures = 0;
  for (Method m : methods) {
    try {
      per_method[std::string(to_string(m))] = params_to_json(optimal_params(sys, s, m, cfg.admm_grid.value_or(200)));
    } catch (const Error& e) {
      per_method[std::string(to_string(m))] = {{"error", e.what()}};
      if (!first_error) first_error = e;
      ++failures;
    }
  }
  const json report = {{"config", config_to_json(cfg)},
                       {"system", system_json(sys)},
                       {"summary", summary_to_json(s)},
                       {"methods", per_method}};
  if (cfg.out) write_json(output_dir(cfg) / "analysis.json", report);
  std::cout << report.dump(2) << '\n';
  if (failures == methods.size() && first_error) return exit_code(first_error->code());
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  const std::vector<Method> methods = selected_methods(cfg, false);
  if (methods.size() != 1) throw Error(ErrorCode::Usage, "solve needs exactly one --method");
  const Method method = methods.front();
  const bool explicit_given = has_explicit(cfg);
  if (explicit_given && cfg.optimal.value_or(false)) {
    throw Error(ErrorCode::Usage, "--optimal and explicit parameters are mutually exclusive");
  }

  const LoadedSystem loaded = load_system(cfg);
  const PartitionedSystem sys = partition(loaded, cfg.m.value_or(1));
  const SpectralSummary s = compute_x(sys);
  const MethodParams params = explicit_given ? explicit_params(sys, s, method, cfg)
                                             : optimal_params(sys, s, method, cfg.admm_grid.value_or(200));
  const Budget budget = make_budget(cfg, 0);
  const fs::path dir = output_dir(cfg);

  IterationTrace trace;
  std::optional<MessageStats> stats;
  if (cfg.simulate.value_or(false)) {
    std::optional<std::ofstream> log;
    SimulationOptions opt;
    if (cfg.log_messages.value_or(false)) {
      log.emplace(open_output(dir / "messages.jsonl"));
      opt.message_log = &*log;
    }
    SimulationResult r = run_simulated(sys, params, budget, opt);
    trace = std::move(r.trace);
    stats = r.stats;
  } else {
    if (cfg.log_messages.value_or(false)) throw Error(ErrorCode::Usage, "--log-messages requires --simulate");
    trace = run_method(sys, params, budget);
  }

  const std::string name(to_string(method));
  {
    std::ofstream out = open_output(dir / ("trace_" + name + ".csv"));
    write_trace_csv(out, trace);
  }
  json result = {{"config", config_to_json(cfg)},
                 {"system", system_json(sys)},
                 {"method", name},
                 {"params", params_to_json(params)},
                 {"status", to_string(trace.status)},
                 {"rounds", trace.rounds()},
                 {"final_error", trace.final_error()},
                 {"error_is_residual", trace.error_is_residual},
                 {"fitted_rate", format_double(trace.fitted_rate)},
                 {"T_predicted", format_double(trace.t_predicted)},
                 {"T_empirical", format_double(trace.t_empirical)},
                 {"trace", "trace_" + name + ".csv"}};
  if (stats) result["messages"] = {{"rounds", stats->rounds}, {"messages", stats->messages}, {"bytes", stats->bytes}};
  write_json(dir / "solve.json", result);

  std::cout << "method=" << name << " status=" << to_string(trace.status) << " rounds=" << trace.rounds()
            << " final_error=" << format_double(trace.final_error())
            << " fitted_rate=" << format_double(trace.fitted_rate)
            << " T_predicted=" << format_double(trace.t_predicted)
            << " T_empirical=" << format_double(trace.t_empirical) << '\n';
  if (trace.status == RunStatus::Diverged) {
    std::cerr << "error: Diverged: error exceeded 1e12 times its initial value after " << trace.rounds()
              << " rounds; partial trace written\n";
    return exit_code(ErrorCode::Diverged);
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const std::vector<Method> methods = selected_methods(cfg, true);
  const LoadedSystem loaded = load_system(cfg);
  const std::vector<std::size_t> ms = cfg.m_sweep.value_or(std::vector<std::size_t>{cfg.m.value_or(1)});
  if (ms.empty()) throw Error(ErrorCode::Usage, "empty --m-sweep");
  const Budget budget = make_budget(cfg, kBenchIterationCap);
  ComparisonOptions options;
  options.simulate = cfg.simulate.value_or(false);
  options.admm_grid = cfg.admm_grid.value_or(200);
  options.run = !cfg.predict_only.value_or(false);
  const fs::path dir = output_dir(cfg);

  json runs = json::array();
  std::optional<Error> first_error;
  std::size_t failures = 0;
  for (std::size_t m : ms) {
    const std::string tag = "m" + std::to_string(m);
    try {
      const PartitionedSystem sys = partition(loaded, m);
      const ComparisonTable table = build_comparison(sys, methods, budget, options);
      {
        std::ofstream out = open_output(dir / ("bench_" + tag + ".csv"));
        write_comparison_csv(out, table);
      }
      write_json(dir / ("bench_" + tag + ".json"), comparison_to_json(table));
      if (options.run) {
        for (const auto& row : table.rows) {
          if (row.trace.errors.empty()) continue;
          std::ofstream out = open_output(dir / ("trace_" + tag + "_" + std::string(to_string(row.method)) + ".csv"));
          write_trace_csv(out, row.trace);
        }
      }
      std::cout << "# m=" << m << '\n';
      write_comparison_csv(std::cout, table);
      for (const auto& row : table.rows)
        if (row.failed) std::cerr << "warning: m=" << m << " " << to_string(row.method) << ": " << row.error << '\n';
      json entry = comparison_to_json(table);
      runs.push_back(std::move(entry));
    } catch (const Error& e) {
      std::cerr << "warning: m=" << m << ": " << e.what() << '\n';
      runs.push_back({{"m", m}, {"error", e.what()}});
      if (!first_error) first_error = e;
      ++failures;
    }
  }
  write_json(dir / "bench.json", {{"config", config_to_json(cfg)}, {"runs", runs}});
  if (failures == ms.size() && first_error) {
    std::cerr << "error: " << first_error->what() << '\n';
    return exit_code(first_error->code());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing

void add_system_options(CLI::App* sub, RunConfig& f) {
  sub->add_option("--input", f.input, "Matrix Market file, or a fixture name under APC_FIXTURES");
  sub->add_option("--rhs", f.rhs, "right-hand side vector file");
  sub->add_option("--solution", f.solution, "known solution vector file (b = A x* when --rhs is absent)");
  sub->add_option("--rhs-seed", f.rhs_seed, "seed for the synthesized solution when neither --rhs nor --solution");
  sub->add_option("--m", f.m, "number of workers (row blocks)");
  sub->add_option("--permute-seed", f.permute_seed, "shuffle rows with this seed before partitioning");
  sub->add_option("--out", f.out, "output directory");
}

void add_budget_options(CLI::App* sub, RunConfig& f) {
  sub->add_option("--tol", f.tol, "stopping tolerance on the relative error (default 1e-10)");
  sub->add_option("--max-iters", f.max_iters, "iteration budget (default ceil(100 T_predicted))");
  sub->add_option("--iteration-cap", f.iteration_cap, "upper bound on the resolved iteration budget");
  sub->add_option("--admm-grid", f.admm_grid, "grid points for the ADMM xi search (default 200)");
  sub->add_flag_callback("--simulate", [&f] { f.simulate = true; }, "run over the simulated master/worker network");
  sub->add_flag_callback("--admm-dual", [&f] { f.admm_dual = true; })->group("");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Accelerated projection-based consensus solver toolkit"};
  app.require_subcommand(1);
  RunConfig flags;
  std::optional<std::string> config_path;
  std::vector<std::string> method_list;

  CLI::App* gen = app.add_subcommand("gen", "generate a Gaussian system: gen <n> <N> <mean> <seed>");
  gen->add_option("n", flags.n, "columns")->required();
  gen->add_option("N", flags.rows, "rows")->required();
  gen->add_option("mean", flags.mean, "entry mean")->required();
  gen->add_option("seed", flags.seed, "generator seed")->required();
  gen->add_option("--out", flags.out, "output directory");

  CLI::App* analyze = app.add_subcommand("analyze", "spectral summary and optimal parameters as JSON");
  CLI::App* solve = app.add_subcommand("solve", "run one method and write its trace");
  CLI::App* bench = app.add_subcommand("bench", "tune and run a method set, emit comparison tables");
  for (CLI::App* sub : {analyze, solve, bench}) {
    add_system_options(sub, flags);
    add_budget_options(sub, flags);
    sub->add_option("--method", method_list, "method name(s), comma separated")->delimiter(',');
    sub->add_option("--config", config_path, "JSON config file (command-line flags take precedence)");
  }
  solve->add_option("--gamma", flags.gamma, "APC worker step (apc)");
  solve->add_option("--eta", flags.eta, "APC master weight (apc)");
  solve->add_option("--alpha", flags.alpha, "step size (dgd, dnag, dhbm, pdhbm)");
  solve->add_option("--beta", flags.beta, "momentum (dnag, dhbm, pdhbm)");
  solve->add_option("--xi", flags.xi, "penalty (admm)");
  solve->add_option("--nu", flags.nu, "relaxation weight (cimmino)");
  solve->add_flag_callback("--optimal", [&flags] { flags.optimal = true; }, "use the analytically tuned parameters");
  solve->add_flag_callback("--log-messages", [&flags] { flags.log_messages = true; },
                           "write every simulated message as a JSON line to messages.jsonl");
  std::vector<std::size_t> sweep;
  bench->add_option("--m-sweep", sweep, "comma-separated list of worker counts")->delimiter(',');
  bench->add_flag_callback("--predict-only", [&flags] { flags.predict_only = true; },
                           "tabulate tuned rates without running the methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (bench->count("--method") > 0 || analyze->count("--method") > 0 || solve->count("--method") > 0) {
      flags.methods = method_list;
    }
    if (bench->count("--m-sweep") > 0) flags.m_sweep = sweep;
    RunConfig cfg = config_path ? merge(load_config_file(*config_path), flags) : flags;
    cfg.command = app.get_subcommands().front()->get_name();

    if (gen->parsed()) return cmd_gen(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    return cmd_bench(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace apc::cli

int main(int argc, char** argv) { return apc::cli::run(argc, argv); }
