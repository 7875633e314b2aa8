#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "kantab/chain.hpp"
#include "kantab/control.hpp"
#include "kantab/error.hpp"
#include "kantab/io.hpp"
#include "kantab/kantor.hpp"
#include "kantab/oracle.hpp"
#include "kantab/refine.hpp"

namespace {

using namespace kantab;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kGuard = 4,
  kCovering = 5,
  kOracle = 6,
  kBudgetStop = 10,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return kUsage;
    case ErrorKind::Parse:
      return kParse;
    case ErrorKind::Validation:
      return kValidation;
    case ErrorKind::Guard:
      return kGuard;
    case ErrorKind::Covering:
      return kCovering;
    case ErrorKind::OracleInconsistency:
      return kOracle;
  }
  return kUsage;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

struct MetricOptions {
  std::string first, second;
  double epsilon = 0.0;
  int horizon = 0;
  bool oracle = false;
  bool json = false;
};

int run_metric(const MetricOptions& opt) {
  const auto c1 = io::load_chain(opt.first);
  const auto c2 = io::load_chain(opt.second);
  if (!(c1.alphabet == c2.alphabet))
    fail(ErrorKind::Validation, "chains are defined over different alphabets");
  const int n = opt.horizon > 0 ? opt.horizon : horizon_for_accuracy(opt.epsilon);
  const auto result = kant_metric(c1, c2, n);
  nlohmann::json out = {{"value", result.value},
                        {"horizon", result.horizon},
                        {"bracket", {result.value, result.upper_bound}},
                        {"nodes_expanded", result.nodes_expanded}};
  if (opt.oracle) {
    const auto exact = exact_kantorovich(enumerate_distribution(c1, n), enumerate_distribution(c2, n));
    out["oracle"] = exact.value;
    out["oracle_gap"] = std::abs(exact.value - result.value);
  }
  if (opt.json) {
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  std::cout << std::setprecision(17);
  std::cout << "value    " << result.value << "\n"
            << "horizon  " << result.horizon << "\n"
            << "bracket  [" << result.value << ", " << result.upper_bound << "]\n"
            << "nodes    " << result.nodes_expanded << "\n";
  if (opt.oracle)
    std::cout << "oracle   " << out["oracle"].get<double>() << " (gap "
              << out["oracle_gap"].get<double>() << ")\n";
  return kOk;
}

struct SystemOptions {
  std::string system;
  double epsilon = 1e-3;
  long max_iter = -1;
  std::string mode = "exact";
  std::uint64_t seed = 1;
  std::size_t samples = 1'000'000;
};

io::SystemDocument load_system_or_builtin(const std::string& path) {
  if (path.empty() || path == "builtin" || path == "benchmark")
    return {benchmark_system(), benchmark_controlled_system()};
  return io::load_system(path);
}

RefinementConfig refinement_config(const SystemOptions& opt) {
  RefinementConfig cfg;
  cfg.epsilon = opt.epsilon;
  if (opt.max_iter >= 0) cfg.max_iterations = static_cast<std::size_t>(opt.max_iter);
  if (opt.mode == "exact") {
    cfg.mode = MeasureMode::Exact;
  } else if (opt.mode == "sampled") {
    cfg.mode = MeasureMode::Sampled;
  } else {
    fail(ErrorKind::InvalidArgument, "--mode must be 'exact' or 'sampled'");
  }
  cfg.seed = opt.seed;
  cfg.samples = opt.samples;
  return cfg;
}

struct RefineOptions {
  SystemOptions sys;
  std::string output;
  std::string trace_json;
  bool json = false;
};

int run_refine(const RefineOptions& opt) {
  const auto doc = load_system_or_builtin(opt.sys.system);
  const auto result = refine(doc.system, refinement_config(opt.sys));
  const auto trace_json = io::trace_to_json(doc.system, result.trace);
  if (opt.json) {
    std::cout << trace_json.dump(2) << "\n";
  } else {
    std::cout << format_trace_table(doc.system, result.trace);
  }
  if (!opt.trace_json.empty()) write_text(opt.trace_json, trace_json.dump(2) + "\n");
  if (!opt.output.empty())
    io::save_chain(opt.output, result.abstraction.chain, io::word_ids(result.abstraction));
  return result.trace.stop == StopReason::Deterministic ? kOk : kBudgetStop;
}

struct ControlOptions {
  SystemOptions sys;
  double gamma = 0.95;
  std::size_t trajectories = 5000;
  std::size_t length = 1000;
  int reward_from = 1;
  bool json = false;
};

int run_control(const ControlOptions& opt) {
  const auto doc = load_system_or_builtin(opt.sys.system);
  if (!doc.controlled)
    fail(ErrorKind::Validation, "system document has no \"control\" section");
  ControlConfig cfg;
  cfg.refinement = refinement_config(opt.sys);
  cfg.gamma = opt.gamma;
  cfg.trajectories = opt.trajectories;
  cfg.length = opt.length;
  cfg.seed = opt.sys.seed;
  cfg.indexing = opt.reward_from == 0 ? RewardIndexing::FromZero : RewardIndexing::FromOne;
  const auto report = run_control_pipeline(*doc.controlled, cfg);
  if (opt.json) {
    std::cout << io::control_to_json(doc.system, report).dump(2) << "\n";
  } else {
    std::cout << io::format_control_table(doc.system, report);
  }
  return kOk;
}

struct BenchOptions {
  int max_horizon = 12;
  std::vector<std::size_t> sizes{2};
  std::size_t states = 4;
  std::uint64_t seed = 7;
  bool identical = false;
  bool json = false;
};

LabeledMarkovChain random_chain(std::size_t states, std::size_t symbols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  LabeledMarkovChain c;
  c.alphabet = Alphabet::numeric(symbols);
  c.transition = Matrix(states);
  c.initial.resize(states);
  double total = 0.0;
  for (std::size_t i = 0; i < states; ++i) {
    c.labels.push_back(static_cast<Symbol>(i % symbols));
    c.initial[i] = unit(rng);
    total += c.initial[i];
    double row = 0.0;
    for (std::size_t j = 0; j < states; ++j) row += c.transition(i, j) = unit(rng);
    for (double& p : c.transition.row(i)) p /= row;
  }
  for (double& p : c.initial) p /= total;
  return c;
}

double slope_of_log(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double y = std::log(ys[i]);
    sx += xs[i];
    sy += y;
    sxx += xs[i] * xs[i];
    sxy += xs[i] * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int run_bench(const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json fits = nlohmann::json::array();
  if (!opt.json)
    std::cout << std::left << std::setw(4) << "|A|" << std::setw(5) << "n" << std::setw(12)
              << "nodes" << std::setw(12) << "full_tree" << std::setw(14) << "kant_ms"
              << std::setw(14) << "oracle_ms" << "gap\n";
  for (std::size_t k : opt.sizes) {
    std::mt19937_64 rng(opt.seed + k);
    const auto c1 = random_chain(opt.states, k, rng);
    const auto c2 = opt.identical ? c1 : random_chain(opt.states, k, rng);
    std::vector<double> xs, counters;
    for (int n = 1; n <= opt.max_horizon; ++n) {
      auto t0 = clock::now();
      const auto r = kant_metric(c1, c2, n);
      const double kant_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      std::size_t full = 0;
      for (int d = 0; d < n; ++d) full += word_count(k, d);
      nlohmann::json row = {{"alphabet", k},     {"n", n},          {"nodes", r.nodes_expanded},
                            {"full_tree", full}, {"kant_ms", kant_ms}, {"value", r.value}};
      std::string oracle_cell = "skipped (guard)", gap_cell = "-";
      if (word_count(k, n) <= kTransportGuard) {
        t0 = clock::now();
        const auto exact =
            exact_kantorovich(enumerate_distribution(c1, n), enumerate_distribution(c2, n));
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        row["oracle_ms"] = ms;
        row["oracle_gap"] = std::abs(exact.value - r.value);
        std::ostringstream a, b;
        a << std::setprecision(4) << ms;
        b << std::setprecision(3) << std::abs(exact.value - r.value);
        oracle_cell = a.str();
        gap_cell = b.str();
      } else {
        row["oracle_ms"] = nullptr;
        row["oracle_skipped"] = "guard";
      }
      xs.push_back(n);
      counters.push_back(static_cast<double>(r.nodes_expanded));
      if (!opt.json) {
        std::ostringstream km;
        km << std::setprecision(4) << kant_ms;
        std::cout << std::setw(4) << k << std::setw(5) << n << std::setw(12) << r.nodes_expanded
                  << std::setw(12) << full << std::setw(14) << km.str() << std::setw(14)
                  << oracle_cell << gap_cell << "\n";
      }
      rows.push_back(std::move(row));
    }
    const double slope = xs.size() > 1 ? slope_of_log(xs, counters) : 0.0;
    fits.push_back({{"alphabet", k},
                    {"log_counter_slope", slope},
                    {"log_alphabet", std::log(static_cast<double>(k))}});
    if (!opt.json)
      std::cout << "# |A|=" << k << ": slope of log(nodes) vs n = " << slope
                << " (log|A| = " << std::log(static_cast<double>(k)) << ")\n";
  }
  if (opt.json) std::cout << nlohmann::json{{"rows", rows}, {"fits", fits}}.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kantorovich metric between labeled Markov chains and adaptive abstraction"};
  app.require_subcommand(1);

  MetricOptions metric;
  auto* metric_cmd = app.add_subcommand("metric", "Distance between two chain files");
  metric_cmd->add_option("first", metric.first, "First chain file")->required();
  metric_cmd->add_option("second", metric.second, "Second chain file")->required();
  auto* eps_opt = metric_cmd->add_option("--epsilon", metric.epsilon, "Accuracy in (0, 1)");
  auto* hor_opt = metric_cmd->add_option("--horizon", metric.horizon, "Word length n >= 1");
  eps_opt->excludes(hor_opt);
  metric_cmd->add_flag("--oracle", metric.oracle, "Cross-check with exact optimal transport");
  metric_cmd->add_flag("--json", metric.json, "Machine-readable output");

  auto add_system_options = [](CLI::App* cmd, SystemOptions& o) {
    cmd->add_option("--system", o.system, "System file (default: built-in benchmark)");
    cmd->add_option("--epsilon", o.epsilon, "Metric accuracy");
    cmd->add_option("--max-iter", o.max_iter, "Refinement budget (negative = unbounded)");
    cmd->add_option("--mode", o.mode, "Measure oracle: exact or sampled");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--samples", o.samples, "Monte Carlo samples in sampled mode");
  };

  RefineOptions refine_opt;
  auto* refine_cmd = app.add_subcommand("refine", "Adaptive partition refinement");
  add_system_options(refine_cmd, refine_opt.sys);
  refine_cmd->add_option("--output", refine_opt.output, "Write the final chain here");
  refine_cmd->add_option("--trace-json", refine_opt.trace_json, "Write the trace as JSON here");
  refine_cmd->add_flag("--json", refine_opt.json, "Print the trace as JSON");

  ControlOptions control;
  auto* control_cmd = app.add_subcommand("control", "Per-iteration MDP controllers and rewards");
  add_system_options(control_cmd, control.sys);
  control_cmd->add_option("--gamma", control.gamma, "Discount factor in [0, 1)");
  control_cmd->add_option("--trajectories", control.trajectories, "Monte Carlo trajectories");
  control_cmd->add_option("--length", control.length, "Steps per trajectory");
  control_cmd
      ->add_option("--reward-from", control.reward_from,
                   "Exponent of gamma on the first state's reward (0 or 1)")
      ->check(CLI::IsMember({0, 1}));
  control_cmd->add_flag("--json", control.json, "Machine-readable output");

  BenchOptions bench;
  std::string sizes = "2";
  auto* bench_cmd = app.add_subcommand("bench", "Recursion vs exact transport scaling");
  bench_cmd->add_option("--max-horizon", bench.max_horizon, "Largest n");
  bench_cmd->add_option("--sizes", sizes, "Comma-separated alphabet sizes");
  bench_cmd->add_option("--states", bench.states, "States per random chain");
  bench_cmd->add_option("--seed", bench.seed, "Random seed");
  bench_cmd->add_flag("--identical", bench.identical, "Compare a chain with itself");
  bench_cmd->add_flag("--json", bench.json, "Machine-readable output");

  auto* system_cmd = app.add_subcommand("system", "Print the built-in benchmark system document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*metric_cmd) {
      if (metric.horizon <= 0 && metric.epsilon <= 0.0)
        fail(ErrorKind::InvalidArgument, "one of --epsilon or --horizon is required");
      return run_metric(metric);
    }
    if (*refine_cmd) return run_refine(refine_opt);
    if (*control_cmd) return run_control(control);
    if (*bench_cmd) {
      bench.sizes.clear();
      std::stringstream ss(sizes);
      for (std::string item; std::getline(ss, item, ',');) {
        const long v = std::stol(item);
        if (v < 1) fail(ErrorKind::InvalidArgument, "--sizes entries must be positive");
        bench.sizes.push_back(static_cast<std::size_t>(v));
      }
      return run_bench(bench);
    }
    if (*system_cmd) {
      std::cout << io::benchmark_system_document();
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
