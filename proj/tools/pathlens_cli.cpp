// pathlens: coordinate-path explanations of linear models from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pathlens/pathlens.hpp"

namespace {

using namespace pathlens;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;

struct RunConfig {
  std::string input;
  std::string target;
  std::string moments;
  bool no_standardize = false;
  std::size_t K = 0;
  std::optional<double> gamma;
  std::string weights;
  std::string dist;
  std::string lambda_grid;
  std::size_t q = 1;
  std::size_t T = 100;
  std::uint64_t seed = 0;
  std::string base;
  std::string model;
  std::string step_mode = "continuous";
  std::string solver = "exact";
  std::string out;
  int precision = 4;
  double ridge = 0.0;
  std::uint64_t budget = 10'000'000;
  std::string method;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::string body = text;
  if (!body.empty() && body.front() == '[') body.erase(0, 1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!detail::parse_real(item, v)) throw InvalidInput(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput(std::string(flag) + " needs at least one value");
  return out;
}

/// "log:LO:HI:N" or a comma-separated list.
std::vector<double> parse_lambda_grid(const std::string& text) {
  if (text.empty()) return default_lambda_grid();
  if (text.rfind("log:", 0) == 0) {
    std::stringstream ss(text.substr(4));
    std::string lo, hi, n;
    std::getline(ss, lo, ':');
    std::getline(ss, hi, ':');
    std::getline(ss, n, ':');
    double a = 0.0, b = 0.0, count = 0.0;
    if (!detail::parse_real(lo, a) || !detail::parse_real(hi, b) || !detail::parse_real(n, count) || count < 1) {
      throw InvalidInput("--lambda-grid: expected log:LO:HI:N");
    }
    return log_grid(a, b, static_cast<std::size_t>(count));
  }
  return parse_list(text, "--lambda-grid");
}

WeightSchedule make_schedule(const RunConfig& cfg) {
  const int given = (cfg.gamma ? 1 : 0) + (cfg.weights.empty() ? 0 : 1) + (cfg.dist.empty() ? 0 : 1);
  if (given > 1) throw InvalidInput("give at most one of --gamma, --weights, --dist");
  if (!cfg.weights.empty()) return WeightSchedule::explicit_weights(parse_list(cfg.weights, "--weights"));
  if (!cfg.dist.empty()) return WeightSchedule::distribution(parse_list(cfg.dist, "--dist"));
  return WeightSchedule::geometric(cfg.gamma.value_or(1.0));
}

StepMode make_step_mode(const RunConfig& cfg) {
  return cfg.step_mode == "unit" ? StepMode::unit : StepMode::continuous;
}

SufficientStats load_stats(const RunConfig& cfg) {
  const bool csv = !cfg.input.empty();
  const bool moments = !cfg.moments.empty();
  if (csv == moments) throw InvalidInput("give exactly one input source: --input CSV or --moments JSON");
  std::optional<SufficientStats> stats;
  if (moments) {
    stats = moments_from_json(read_json_file(cfg.moments));
  } else {
    if (cfg.target.empty()) throw InvalidInput("--input requires --target");
    Dataset ds = load_csv(cfg.input, cfg.target);
    if (!cfg.no_standardize) ds = standardize(ds).first;
    stats = compute_stats(ds);
  }
  if (cfg.ridge > 0.0) return stats->with_ridge(cfg.ridge);
  return *stats;
}

LinearModel load_base(const RunConfig& cfg, const SufficientStats& stats) {
  if (cfg.base.empty()) return LinearModel::zeros(stats.feature_names());
  return model_from_json(read_json_file(cfg.base), stats.feature_names());
}

void write_artifact(const std::string& path, const std::string& text) {
  if (!path.empty()) write_text_file(path, text);
}

TradeoffOptions tradeoff_options(const RunConfig& cfg) {
  TradeoffOptions opts;
  opts.solver = cfg.solver == "local" ? Solver::local : Solver::exact;
  opts.q = cfg.q;
  opts.T = cfg.T;
  opts.seed = cfg.seed;
  opts.enumeration_budget = cfg.budget;
  opts.step_mode = make_step_mode(cfg);
  return opts;
}

int cmd_stats(const RunConfig& cfg) {
  const SufficientStats stats = load_stats(cfg);
  const int p = cfg.precision;
  std::cout << "features: " << stats.dim();
  if (stats.sample_count() > 0) std::cout << "  rows: " << stats.sample_count();
  std::cout << "\n";
  std::cout << "target second moment: " << fixed(stats.target_second_moment(), p) << "\n";
  const LinearModel fit = ols(stats);
  std::cout << "least-squares fit (MSE " << fixed(cost(stats, fit), p) << "):\n";
  for (Index i = 0; i < stats.dim(); ++i) {
    std::cout << "  " << stats.feature_names()[static_cast<std::size_t>(i)] << "  " << fixed(fit[i], p)
              << "  cross " << fixed(stats.cross()(i), p) << "\n";
  }
  write_artifact(cfg.out, dump(moments_to_json(stats)));
  return kOk;
}

void print_path(const SufficientStats& stats, const CoordinatePath& path, const WeightSchedule& schedule, int p) {
  std::cout << render_path_table(stats, path, p);
  std::cout << "steps: " << path.length() << "\n";
  std::cout << "interpretability loss: " << fixed(weighted_loss(stats, path, schedule), p) << "\n";
  std::cout << "final MSE: " << fixed(cost(stats, path.final_model()), p) << "\n";
}

int cmd_path(const RunConfig& cfg) {
  const SufficientStats stats = load_stats(cfg);
  const LinearModel base = load_base(cfg, stats);
  const WeightSchedule schedule = make_schedule(cfg);
  const StepMode mode = make_step_mode(cfg);

  CoordinatePath path;
  if (cfg.method == "greedy") {
    path = greedy_path(stats, base, cfg.K, mode);
  } else if (cfg.method == "direct") {
    path = direct_path(stats, base, cfg.K);
  } else {
    OptimizerConfig oc;
    oc.K = cfg.K;
    oc.schedule = schedule;
    oc.step_mode = mode;
    oc.seed = cfg.seed;
    oc.q = cfg.q;
    oc.T = cfg.T;
    oc.enumeration_budget = cfg.budget;
    path = cfg.method == "exact" ? exact_path(stats, base, oc).path : local_improvement(stats, base, oc).path;
  }
  std::cout << "method: " << cfg.method << "  K: " << cfg.K << "  schedule: " << describe(schedule) << "\n";
  print_path(stats, path, schedule, cfg.precision);
  write_artifact(cfg.out, dump(path_to_json(path)));
  return kOk;
}

int cmd_explain(const RunConfig& cfg) {
  if (cfg.model.empty()) throw InvalidInput("explain needs --model with the target model JSON");
  const SufficientStats stats = load_stats(cfg);
  const LinearModel base = load_base(cfg, stats);
  const LinearModel target = model_from_json(read_json_file(cfg.model), stats.feature_names());
  const WeightSchedule schedule = make_schedule(cfg);
  const std::size_t K_max = cfg.K > 0 ? cfg.K : model_complexity(base, target);
  const PathResult r = best_explanation(stats, base, target, schedule, K_max, cfg.budget, make_step_mode(cfg));
  std::cout << "best explanation within " << K_max << " steps  schedule: " << describe(schedule) << "\n";
  print_path(stats, r.path, schedule, cfg.precision);
  write_artifact(cfg.out, dump(path_to_json(r.path)));
  return kOk;
}

int cmd_pareto(const RunConfig& cfg) {
  const SufficientStats stats = load_stats(cfg);
  const LinearModel base = load_base(cfg, stats);
  const WeightSchedule schedule = make_schedule(cfg);
  const FrontReport report = sweep(stats, base, schedule, parse_lambda_grid(cfg.lambda_grid), cfg.K,
                                   tradeoff_options(cfg));
  const int p = cfg.precision;
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& pt : report.points) ++histogram[pt.K];
  std::cout << "front points: " << report.points.size() << "  (lambda values: " << report.lambda_grid.size()
            << ", K_max: " << report.K_max << ", solver: " << to_string(report.solver) << ")\n";
  std::cout << "K histogram:";
  for (const auto& [k, n] : histogram) std::cout << "  K=" << k << ": " << n;
  std::cout << "\n";
  std::cout << "K  lambda  interp_loss  cost\n";
  for (const auto& pt : report.points) {
    std::cout << pt.K << "  " << fixed(pt.lambda, p) << "  " << fixed(pt.interp_loss, p) << "  "
              << fixed(pt.cost, p) << "\n";
  }
  if (!cfg.out.empty()) {
    write_text_file(cfg.out + ".json", dump(front_to_json(report)));
    write_text_file(cfg.out + ".csv", front_to_csv(report));
  }
  return kOk;
}

int cmd_expected_cost(const RunConfig& cfg) {
  if (cfg.dist.empty()) throw InvalidInput("expected-cost needs --dist");
  if (cfg.gamma || !cfg.weights.empty()) throw InvalidInput("expected-cost takes --dist only");
  const SufficientStats stats = load_stats(cfg);
  const LinearModel base = load_base(cfg, stats);
  const std::vector<double> p = parse_list(cfg.dist, "--dist");
  const PathResult r = expected_cost_path(stats, base, p, tradeoff_options(cfg));
  const WeightSchedule schedule = WeightSchedule::distribution(p);
  std::cout << "expected-cost path over " << p.size() << " steps  solver: " << cfg.solver << "\n";
  std::cout << render_path_table(stats, r.path, cfg.precision);
  std::cout << "expected cost: " << fixed(weighted_loss(stats, r.path, schedule), cfg.precision) << "\n";
  write_artifact(cfg.out, dump(path_to_json(r.path)));
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  if (cfg.input.empty()) throw InvalidInput("verify needs --input with a front CSV");
  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + cfg.input + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const FrontTable table = front_from_csv(text.str());
  const auto bad = dominated_pairs(table.cost, table.interp_loss);
  if (bad.empty()) {
    std::cout << "ok: " << table.cost.size() << " points, none dominated\n";
    return kOk;
  }
  for (const auto& [i, j] : bad) {
    std::cout << "row " << i + 1 << " dominates row " << j + 1 << "\n";
  }
  std::cout << "FAILED: " << bad.size() << " dominated pair(s)\n";
  return kFailed;
}

void add_data_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "CSV file with a header row");
  cmd->add_option("--target", cfg.target, "Response column of the CSV");
  cmd->add_option("--moments", cfg.moments, "Moments JSON {gram, cross, tsm, names}");
  cmd->add_flag("--no-standardize", cfg.no_standardize, "Use CSV columns as given");
  cmd->add_option("--ridge", cfg.ridge, "Ridge weight added to the cost")->check(CLI::NonNegativeNumber);
  cmd->add_option("--precision", cfg.precision, "Decimals in printed numbers")->check(CLI::Range(0, 17));
  cmd->add_option("--out", cfg.out, "Output artifact path");
}

void add_path_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--K", cfg.K, "Path length (maximum length for explain/pareto)");
  cmd->add_option("--gamma", cfg.gamma, "Geometric step weights gamma^k");
  cmd->add_option("--weights", cfg.weights, "Explicit step weights a1,a2,...");
  cmd->add_option("--dist", cfg.dist, "Stopping distribution p1,p2,...");
  cmd->add_option("--base", cfg.base, "Starting model JSON {features, coefficients}");
  cmd->add_option("--step-mode", cfg.step_mode, "continuous or unit")
      ->check(CLI::IsMember({"continuous", "unit"}));
  cmd->add_option("--q", cfg.q, "Local improvement batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--T", cfg.T, "Local improvement iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.seed, "Random seed");
  cmd->add_option("--budget", cfg.budget, "Maximum candidates for exhaustive search");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinate-path explanations and the interpretability/accuracy front of linear models"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* stats_cmd = app.add_subcommand("stats", "Summarize the data and optionally write its moments JSON");
  add_data_options(stats_cmd, cfg);

  auto* path_cmd = app.add_subcommand("path", "Build a K-step coordinate path");
  path_cmd->add_option("method", cfg.method, "greedy, direct, exact or local")
      ->required()
      ->check(CLI::IsMember({"greedy", "direct", "exact", "local"}));
  add_data_options(path_cmd, cfg);
  add_path_options(path_cmd, cfg);

  auto* explain_cmd = app.add_subcommand("explain", "Best explanation of a given model");
  explain_cmd->add_option("--model", cfg.model, "Target model JSON");
  add_data_options(explain_cmd, cfg);
  add_path_options(explain_cmd, cfg);

  auto* pareto_cmd = app.add_subcommand("pareto", "Sweep the cost/interpretability tradeoff");
  pareto_cmd->add_option("--lambda-grid", cfg.lambda_grid, "log:LO:HI:N or a comma-separated list");
  pareto_cmd->add_option("--solver", cfg.solver, "exact or local")->check(CLI::IsMember({"exact", "local"}));
  add_data_options(pareto_cmd, cfg);
  add_path_options(pareto_cmd, cfg);

  auto* expected_cmd = app.add_subcommand("expected-cost", "Path minimizing the expected cost over stopping steps");
  expected_cmd->add_option("--solver", cfg.solver, "exact or local")->check(CLI::IsMember({"exact", "local"}));
  add_data_options(expected_cmd, cfg);
  add_path_options(expected_cmd, cfg);

  auto* verify_cmd = app.add_subcommand("verify", "Check that no row of a front CSV dominates another");
  verify_cmd->add_option("--input", cfg.input, "Front CSV written by pareto")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (stats_cmd->parsed()) return cmd_stats(cfg);
    if (path_cmd->parsed()) return cmd_path(cfg);
    if (explain_cmd->parsed()) return cmd_explain(cfg);
    if (pareto_cmd->parsed()) return cmd_pareto(cfg);
    if (expected_cmd->parsed()) return cmd_expected_cost(cfg);
    if (verify_cmd->parsed()) return cmd_verify(cfg);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kConfigError;
}
