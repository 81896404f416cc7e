// shadowgame: solve matrix games, warm-start updates from saved search paths,
// run the change-probability experiment and drive checkpoint scenarios.
//
// Exit codes
//   0  success
//   1  an output file could not be written
//   2  bad flags, unreadable or malformed input, invalid request
//   3  solver failure
//   4  stale or corrupt state file
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shadowgame/shadowgame.hpp"

namespace sg = shadowgame;

namespace {

enum Exit : int { kOk = 0, kWriteFailed = 1, kBadInput = 2, kSolverFailed = 3, kBadState = 4 };

struct Failure {
  int code;
  std::string message;
};

std::string num(double v) {
  if (std::abs(v) < 1e-12) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string nums(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += num(v(i));
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kBadInput, "cannot read " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename Writer>
void write_file(const std::string& path, Writer&& write) {
  std::ofstream out(path);
  if (!out) throw Failure{kWriteFailed, "cannot write " + path};
  write(out);
  out.flush();
  if (!out) throw Failure{kWriteFailed, "write to " + path + " failed"};
}

int code_for(sg::ErrorCode code) {
  switch (code) {
    case sg::ErrorCode::InvalidInput:
    case sg::ErrorCode::ParseError:
    case sg::ErrorCode::TooManyPaths:
    case sg::ErrorCode::NoNewPaths:
      return kBadInput;
    case sg::ErrorCode::IoError:
      return kWriteFailed;
    default:
      return kSolverFailed;
  }
}

sg::GameState load_state(const std::string& path) {
  std::istringstream in(read_text(path));
  try {
    return sg::read_game_state(in);
  } catch (const sg::Error& e) {
    throw Failure{kBadState, path + ": " + e.what()};
  }
}

sg::Solution<double> state_solution(const sg::GameState& state, const sg::CanonicalLP<double>& lp) {
  if (state.path.entries.empty() || state.path.status != sg::PathStatus::optimal)
    throw Failure{kBadState, "state does not end at an optimum"};
  return sg::make_solution(lp, state.path.back().vertex.x);
}

void print_solution(const sg::Solution<double>& s) {
  std::cout << "value " << num(s.value) << "\n";
  std::cout << "strategy " << nums(s.strategy) << "\n";
}

// A column file holds either whitespace-separated numbers or an extension
// event document carrying the digest of the LP it extends.
Eigen::VectorXd load_column(const std::string& path, const std::string& expected_digest) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    std::istringstream in(text);
    const auto event = sg::read_extension_event(in);
    if (event.parent_digest != expected_digest)
      throw Failure{kBadState, "column was built for another game (digest " + event.parent_digest + ")"};
    return event.g;
  }
  std::istringstream in(text);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
      values.push_back(v);
    } catch (const std::exception&) {
      throw Failure{kBadInput, path + ": not a number: " + token};
    }
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

sg::SolveOptions solve_options(std::uint64_t seed) {
  sg::SolveOptions options;
  options.aux_seed = seed;
  return options;
}

struct SolveArgs {
  std::string matrix;
  std::string out;
  double budget = 0.0;
  std::uint64_t seed = 1;
};

int cmd_solve(const SolveArgs& a) {
  std::istringstream in(read_text(a.matrix));
  sg::GameState state;
  state.payoff = sg::read_payoff_matrix(in);
  if (a.budget > 0.0) {
    state.variant = sg::LpVariant::budgeted;
    state.budget = a.budget;
  }
  const auto lp = state.lp();
  auto result = sg::solve(lp, solve_options(a.seed));
  state.path = std::move(result.path);
  print_solution(result.solution);
  std::cout << "pivots " << result.stats.pivots << "\n";
  if (!a.out.empty()) write_file(a.out, [&](std::ostream& o) { sg::write_game_state(o, state); });
  return kOk;
}

struct ExtendArgs {
  std::string state;
  std::string column;
  std::string out;
  std::uint64_t seed = 1;
};

int cmd_extend(const ExtendArgs& a) {
  sg::GameState state = load_state(a.state);
  const auto old_lp = state.lp();
  const Eigen::VectorXd g = load_column(a.column, sg::lp_digest(old_lp));
  if (static_cast<std::size_t>(g.size()) != state.payoff.rows())
    throw Failure{kBadInput, "column has " + std::to_string(g.size()) + " entries, expected " +
                                 std::to_string(state.payoff.rows())};
  sg::ExtensionEvent<double> event;
  event.old_solution = state_solution(state, old_lp);
  event.new_lp = sg::extend_with_action(old_lp, g);
  event.old_lp = old_lp;
  event.old_path = state.path;
  const auto r = sg::iterative_solve(event, solve_options(a.seed));
  std::cout << (r.retained ? "retained" : "recomputed") << "\n";
  std::cout << "pivots " << r.pivots_used << "\n";
  print_solution(r.solution);
  state.payoff = state.payoff.with_column(g);
  state.path = r.path;
  const std::string out = a.out.empty() ? a.state : a.out;
  write_file(out, [&](std::ostream& o) { sg::write_game_state(o, state); });
  return kOk;
}

struct SimulateArgs {
  std::size_t n = 10;
  std::vector<std::size_t> m{100};
  std::size_t trials = 500;
  std::uint64_t seed = 1;
  int low = -100;
  int high = 100;
  std::size_t threads = 0;
  bool no_perturbation = false;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  sg::ExperimentConfig cfg;
  cfg.n = a.n;
  cfg.m_list = a.m;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.payoff_low = a.low;
  cfg.payoff_high = a.high;
  cfg.threads = a.threads;
  cfg.perturbation = !a.no_perturbation;
  const auto records = sg::run_growth_experiment(cfg);
  if (a.out.empty()) {
    sg::write_records_csv(records, std::cout);
    return kOk;
  }
  try {
    sg::write_records_csv(records, a.out);
  } catch (const sg::Error& e) {
    throw Failure{kWriteFailed, e.what()};
  }
  for (const auto& r : records) {
    std::cout << "m " << r.m << " trials " << r.trials << " changes " << r.change_count << " empirical "
              << num(r.empirical_change_prob) << " theory " << num(r.theory_change_prob) << " pivots_iterative "
              << num(r.mean_pivots_iterative_given_recompute) << " pivots_full "
              << num(r.mean_pivots_full_given_recompute);
    if (r.failed_trials) std::cout << " failed " << r.failed_trials;
    std::cout << "\n";
  }
  return kOk;
}

struct ScenarioArgs {
  std::string graph;
  std::vector<long long> add_targets;
  std::string out;
  std::uint64_t seed = 1;
};

void print_edges(const sg::ScenarioState& s) {
  for (std::size_t e = 0; e < s.graph.edge_count(); ++e)
    std::cout << "edge " << e << " " << s.graph.edges[e].first << " " << s.graph.edges[e].second << " "
              << num(s.solution.strategy(static_cast<Eigen::Index>(e))) << "\n";
}

int cmd_scenario(const ScenarioArgs& a) {
  const auto graph = sg::load_graph(read_text(a.graph));
  const auto options = solve_options(a.seed);
  auto state = sg::solve_checkpoint_game(graph, options);
  std::cout << "paths " << state.paths.size() << "\n";
  std::cout << "value " << num(state.solution.value) << "\n";
  for (long long node : a.add_targets) {
    if (node < 0) throw Failure{kBadInput, "node id out of range: " + std::to_string(node)};
    const auto update = sg::add_target(state, static_cast<std::size_t>(node), options);
    std::cout << "target " << node << " new_paths " << update.new_paths << "\n";
    for (const auto& c : update.columns)
      std::cout << "path " << c.path_index << " " << (c.retained ? "retained" : "recomputed") << " pivots "
                << c.pivots << "\n";
    std::cout << "value " << num(state.solution.value) << "\n";
  }
  print_edges(state);
  if (!a.out.empty()) {
    if (state.graph.budget == 0.0) throw Failure{kBadInput, "a zero budget has no LP state to save"};
    sg::GameState saved;
    saved.payoff = state.payoff;
    saved.variant = sg::LpVariant::budgeted;
    saved.budget = state.graph.budget;
    saved.path = state.path;
    write_file(a.out, [&](std::ostream& o) { sg::write_game_state(o, saved); });
  }
  return kOk;
}

int cmd_verify(const std::string& path) {
  const auto state = load_state(path);
  const auto lp = state.lp();
  const double tol = sg::feasibility_tolerance(lp);
  std::size_t problems = 0;
  for (std::size_t i = 0; i < state.path.entries.size(); ++i) {
    const auto& e = state.path.entries[i];
    for (const auto& d : sg::verify_table(e.table, lp)) {
      std::cout << "entry " << i << ": " << d << "\n";
      ++problems;
    }
    if (sg::max_violation(lp, e.vertex.x) > tol) {
      std::cout << "entry " << i << ": vertex infeasible by " << num(sg::max_violation(lp, e.vertex.x)) << "\n";
      ++problems;
    }
    if (i > 0 && !(e.table.objective() > state.path.entries[i - 1].table.objective() + sg::kStrictIncrease)) {
      std::cout << "entry " << i << ": objective did not increase\n";
      ++problems;
    }
  }
  if (problems) {
    std::cout << problems << " problems\n";
    return kBadState;
  }
  std::cout << "ok " << state.path.entries.size() << " entries\n";
  print_solution(state_solution(state, lp));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security strategies for zero-sum matrix games by shadow-vertex pivoting"};
  app.require_subcommand(1, 1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "solve the game in a matrix file");
  solve_cmd->add_option("matrix", solve.matrix, "file with \"n m\" then n rows of m payoffs")->required();
  solve_cmd->add_option("-o,--out", solve.out, "write the game state (payoff and search path) here");
  solve_cmd->add_option("--budget", solve.budget, "mixed strategy sums to this budget with entries at most 1");
  solve_cmd->add_option("--seed", solve.seed, "seed for the auxiliary objective draw");

  ExtendArgs extend;
  auto* extend_cmd = app.add_subcommand("extend", "add an opponent action to a saved game");
  extend_cmd->add_option("state", extend.state, "state file written by solve or extend")->required();
  extend_cmd->add_option("column", extend.column, "new payoff column: numbers, or an extension document")
      ->required();
  extend_cmd->add_option("-o,--out", extend.out, "where to write the updated state (default: overwrite)");
  extend_cmd->add_option("--seed", extend.seed, "seed for a fallback full solve");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "measure how often a new action changes the strategy");
  sim_cmd->add_option("--n", sim.n, "player actions")->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  sim_cmd->add_option("--m", sim.m, "opponent action counts, comma separated")->delimiter(',');
  sim_cmd->add_option("--trials", sim.trials, "trials per m")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--low", sim.low, "lower payoff bound");
  sim_cmd->add_option("--high", sim.high, "upper payoff bound");
  sim_cmd->add_option("--threads", sim.threads, "worker threads, 0 for all cores");
  sim_cmd->add_flag("--no-perturbation", sim.no_perturbation, "use the raw uniform payoffs");
  sim_cmd->add_option("-o,--out", sim.out, "CSV destination (default: standard output)");

  ScenarioArgs scen;
  auto* scen_cmd = app.add_subcommand("scenario", "place checkpoints on attack paths in a graph");
  scen_cmd->add_option("graph", scen.graph, "graph file")->required();
  scen_cmd->add_option("--add-target", scen.add_targets, "add this target node afterwards (repeatable)");
  scen_cmd->add_option("-o,--out", scen.out, "write the final game state here");
  scen_cmd->add_option("--seed", scen.seed, "seed for the auxiliary objective draw");

  std::string verify_path;
  auto* verify_cmd = app.add_subcommand("verify", "check every table stored in a state file");
  verify_cmd->add_option("state", verify_path, "state file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve);
    if (*extend_cmd) return cmd_extend(extend);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*scen_cmd) return cmd_scenario(scen);
    return cmd_verify(verify_path);
  } catch (const Failure& f) {
    std::cerr << "shadowgame: " << f.message << "\n";
    return f.code;
  } catch (const sg::Error& e) {
    std::cerr << "shadowgame: " << e.what() << "\n";
    return code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "shadowgame: " << e.what() << "\n";
    return kSolverFailed;
  }
}
