#pragma once

// Checkpoint placement on a road graph. The defender spreads a budget of
// checkpoints over edges; attackers take a shortest path from a source to a
// target. Payoff is the number of checkpoints met along the path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shadowgame/errors.hpp"
#include "shadowgame/incremental.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/shadow_simplex.hpp"

namespace shadowgame {

struct SecurityGraph {
  std::size_t node_count = 0;
  // edge i joins edges[i].first and edges[i].second
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> sources;
  std::vector<std::size_t> targets;
  double budget = 1.0;

  std::size_t edge_count() const { return edges.size(); }
  bool is_source(std::size_t v) const { return std::find(sources.begin(), sources.end(), v) != sources.end(); }
  bool is_target(std::size_t v) const { return std::find(targets.begin(), targets.end(), v) != targets.end(); }
};

struct AttackPath {
  // sorted edge indices
  std::vector<std::size_t> edges;
  std::size_t source = 0;
  std::size_t target = 0;
};

struct PathSet {
  std::vector<AttackPath> paths;
  std::size_t size() const { return paths.size(); }
};

inline constexpr std::size_t kMaxPaths = 10000;

namespace detail {

using Adjacency = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

inline Adjacency adjacency(const SecurityGraph& g) {
  Adjacency adj(g.node_count);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    adj[g.edges[e].first].emplace_back(g.edges[e].second, e);
    adj[g.edges[e].second].emplace_back(g.edges[e].first, e);
  }
  return adj;
}

inline constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

inline std::vector<std::size_t> hop_distances(const Adjacency& adj, std::size_t from) {
  std::vector<std::size_t> dist(adj.size(), kUnreached);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (auto [w, e] : adj[v]) {
      (void)e;
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

inline bool reachable_from_any(const Adjacency& adj, const std::vector<std::size_t>& sources, std::size_t target) {
  for (auto s : sources)
    if (hop_distances(adj, s)[target] != kUnreached) return true;
  return false;
}

inline std::size_t parse_node(std::istringstream& in, std::size_t node_count, std::size_t line) {
  long long v = -1;
  if (!(in >> v)) throw ParseError(line, "expected a node id");
  if (v < 0 || static_cast<std::size_t>(v) >= node_count) throw ParseError(line, "node id out of range");
  return static_cast<std::size_t>(v);
}

// Walks the BFS layers from `source` towards `target`, appending every
// shortest path not already in `seen`.
inline void collect_paths(const Adjacency& adj, std::size_t source, std::size_t target, PathSet& out,
                          std::set<std::vector<std::size_t>>& seen) {
  const auto from_source = hop_distances(adj, source);
  if (from_source[target] == kUnreached) return;
  const auto to_target = hop_distances(adj, target);
  const std::size_t length = from_source[target];
  std::vector<std::size_t> stack;
  auto walk = [&](auto&& self, std::size_t v) -> void {
    if (v == target) {
      std::vector<std::size_t> key = stack;
      std::sort(key.begin(), key.end());
      if (!seen.insert(key).second) return;
      if (out.paths.size() >= kMaxPaths)
        throw Error(ErrorCode::TooManyPaths, "more than " + std::to_string(kMaxPaths) + " attack paths");
      out.paths.push_back(AttackPath{std::move(key), source, target});
      return;
    }
    for (auto [w, e] : adj[v]) {
      if (from_source[w] != from_source[v] + 1 || from_source[w] + to_target[w] != length) continue;
      stack.push_back(e);
      self(self, w);
      stack.pop_back();
    }
  };
  walk(walk, source);
}

}  // namespace detail

/// Parses the graph format:
///   nodes <N> budget <B>
///   edge <u> <v>      (one per edge, indexed in file order)
///   source <u>
///   target <u>
/// Lines starting with '#' and blank lines are ignored.
inline SecurityGraph load_graph(std::istream& in) {
  SecurityGraph g;
  std::string raw;
  std::size_t line = 0;
  bool header = false;
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  std::vector<std::size_t> target_lines;
  while (std::getline(in, raw)) {
    ++line;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    std::istringstream fields(raw);
    std::string keyword;
    fields >> keyword;
    if (!header) {
      long long nodes = 0;
      std::string budget_word;
      if (keyword != "nodes" || !(fields >> nodes >> budget_word) || budget_word != "budget" || !(fields >> g.budget))
        throw ParseError(line, "expected 'nodes <N> budget <B>'");
      if (nodes < 2) throw ParseError(line, "need at least 2 nodes");
      if (!std::isfinite(g.budget) || g.budget < 0.0) throw ParseError(line, "budget must be a non-negative number");
      g.node_count = static_cast<std::size_t>(nodes);
      header = true;
    } else if (keyword == "edge") {
      const std::size_t u = detail::parse_node(fields, g.node_count, line);
      const std::size_t v = detail::parse_node(fields, g.node_count, line);
      if (u == v) throw ParseError(line, "self-loop edge");
      if (!edge_set.insert({std::min(u, v), std::max(u, v)}).second) throw ParseError(line, "duplicate edge");
      g.edges.emplace_back(u, v);
    } else if (keyword == "source" || keyword == "target") {
      const std::size_t v = detail::parse_node(fields, g.node_count, line);
      if (g.is_source(v) || g.is_target(v)) throw ParseError(line, "node is already a source or target");
      if (keyword == "source") {
        g.sources.push_back(v);
      } else {
        g.targets.push_back(v);
        target_lines.push_back(line);
      }
    } else {
      throw ParseError(line, "unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(line, "unexpected trailing field '" + extra + "'");
  }
  if (!header) throw ParseError(line, "missing 'nodes' header");
  if (g.edges.size() < 2) throw ParseError(line, "need at least 2 edges");
  if (g.budget > static_cast<double>(g.edges.size())) throw ParseError(line, "budget exceeds the edge count");
  if (g.sources.empty()) throw ParseError(line, "no source nodes");
  if (g.targets.empty()) throw ParseError(line, "no target nodes");
  const auto adj = detail::adjacency(g);
  for (std::size_t k = 0; k < g.targets.size(); ++k)
    if (!detail::reachable_from_any(adj, g.sources, g.targets[k]))
      throw ParseError(target_lines[k], "target " + std::to_string(g.targets[k]) + " is unreachable");
  return g;
}

inline SecurityGraph load_graph(const std::string& text) {
  std::istringstream in(text);
  return load_graph(in);
}

/// All minimum-hop paths for every (source, target) pair in the given target
/// list, deduplicated by edge set.
inline PathSet enumerate_shortest_paths(const SecurityGraph& g, const std::vector<std::size_t>& targets) {
  const auto adj = detail::adjacency(g);
  PathSet out;
  std::set<std::vector<std::size_t>> seen;
  for (auto t : targets)
    for (auto s : g.sources) detail::collect_paths(adj, s, t, out, seen);
  return out;
}

inline PathSet enumerate_shortest_paths(const SecurityGraph& g) { return enumerate_shortest_paths(g, g.targets); }

/// Edge-by-path incidence matrix.
inline PayoffMatrix build_payoff(const PathSet& paths, std::size_t edge_count) {
  if (paths.paths.empty()) throw Error(ErrorCode::InvalidInput, "empty path set");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edge_count),
                                            static_cast<Eigen::Index>(paths.size()));
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (auto e : paths.paths[p].edges) G(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(p)) = 1.0;
  return PayoffMatrix(std::move(G));
}

inline Eigen::VectorXd incidence_column(const AttackPath& path, std::size_t edge_count) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edge_count));
  for (auto e : path.edges) g(static_cast<Eigen::Index>(e)) = 1.0;
  return g;
}

struct ScenarioState {
  SecurityGraph graph;
  PathSet paths;
  PayoffMatrix payoff;
  // empty (zero rows) when the budget is zero
  CanonicalLP<double> lp;
  Solution<double> solution;
  SearchPath<double> path;
  SolveStats stats;
};

namespace detail {

inline Solution<double> zero_budget_solution(std::size_t edge_count) {
  Solution<double> s;
  s.strategy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(edge_count));
  s.value = 0.0;
  s.status = SolutionStatus::optimal;
  return s;
}

}  // namespace detail

/// Builds and solves the budgeted checkpoint game. A zero budget places no
/// checkpoints and has value 0 without an LP.
inline ScenarioState solve_checkpoint_game(const SecurityGraph& g, const SolveOptions& options = {}) {
  ScenarioState state;
  state.graph = g;
  state.paths = enumerate_shortest_paths(g);
  state.payoff = build_payoff(state.paths, g.edge_count());
  if (g.budget == 0.0) {
    state.solution = detail::zero_budget_solution(g.edge_count());
    return state;
  }
  state.lp = canonicalize_budgeted<double>(state.payoff, g.budget);
  auto result = solve(state.lp, options);
  state.solution = std::move(result.solution);
  state.path = std::move(result.path);
  state.stats = std::move(result.stats);
  return state;
}

struct ColumnUpdate {
  std::size_t path_index = 0;
  bool retained = false;
  std::size_t pivots = 0;
};

struct TargetUpdate {
  std::vector<ColumnUpdate> columns;
  std::size_t new_paths = 0;
};

/// Adds a target node and folds each new attack path into the game as one
/// warm-started single-column update. On error the state is left unchanged.
inline TargetUpdate add_target(ScenarioState& state, std::size_t node, const SolveOptions& options = {}) {
  const SecurityGraph& g = state.graph;
  if (node >= g.node_count) throw Error(ErrorCode::InvalidInput, "node id out of range");
  if (g.is_source(node)) throw Error(ErrorCode::InvalidInput, "node is a source");
  if (g.is_target(node)) throw Error(ErrorCode::InvalidInput, "node is already a target");
  if (!detail::reachable_from_any(detail::adjacency(g), g.sources, node))
    throw ParseError(0, "target " + std::to_string(node) + " is unreachable");

  PathSet fresh;
  {
    const auto adj = detail::adjacency(g);
    std::set<std::vector<std::size_t>> seen;
    for (const auto& p : state.paths.paths) seen.insert(p.edges);
    std::size_t total = state.paths.size();
    for (auto s : g.sources) {
      PathSet batch;
      detail::collect_paths(adj, s, node, batch, seen);
      total += batch.size();
      if (total > kMaxPaths)
        throw Error(ErrorCode::TooManyPaths, "more than " + std::to_string(kMaxPaths) + " attack paths");
      for (auto& p : batch.paths) fresh.paths.push_back(std::move(p));
    }
  }
  if (fresh.paths.empty()) throw Error(ErrorCode::NoNewPaths, "target adds no new attack paths");

  ScenarioState next = state;
  next.graph.targets.push_back(node);
  TargetUpdate update;
  update.new_paths = fresh.size();
  for (auto& p : fresh.paths) {
    const Eigen::VectorXd column = incidence_column(p, g.edge_count());
    next.payoff = next.payoff.with_column(column);
    next.paths.paths.push_back(std::move(p));
    ColumnUpdate cu;
    cu.path_index = next.paths.size() - 1;
    if (g.budget == 0.0) {
      cu.retained = true;
      update.columns.push_back(cu);
      continue;
    }
    ExtensionEvent<double> event;
    event.new_lp = extend_with_action(next.lp, column);
    event.old_lp = std::move(next.lp);
    event.old_solution = std::move(next.solution);
    event.old_path = std::move(next.path);
    auto result = iterative_solve(event, options);
    next.lp = std::move(event.new_lp);
    next.solution = std::move(result.solution);
    next.path = std::move(result.path);
    next.stats.merge(result.stats);
    cu.retained = result.retained;
    cu.pivots = result.pivots_used;
    update.columns.push_back(cu);
  }
  state = std::move(next);
  return update;
}

}  // namespace shadowgame
