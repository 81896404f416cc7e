#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "shadowgame/incremental.hpp"
#include "shadowgame/path_io.hpp"

using namespace shadowgame;

namespace {

PayoffMatrix random_payoff(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> d(-10, 10);
  std::uniform_real_distribution<double> jitter(-1e-7, 1e-7);
  Eigen::MatrixXd g(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = d(rng) + jitter(rng);
  return PayoffMatrix(g);
}

std::string text_of(const SearchPath<double>& path, const CanonicalLP<double>& lp) {
  std::ostringstream out;
  write_search_path(out, path, lp);
  return out.str();
}

}  // namespace

TEST_CASE("search paths round-trip exactly", "[path-io]") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto lp = canonicalize(random_payoff(rng, 2 + trial % 4, 2 + trial % 6));
    const auto r = solve(lp);
    const std::string text = text_of(r.path, lp);
    std::istringstream in(text);
    const auto back = read_search_path(in, lp);
    REQUIRE(back.entries.size() == r.path.entries.size());
    CHECK(back.status == r.path.status);
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
      const auto& a = back.entries[i];
      const auto& b = r.path.entries[i];
      CHECK(a.vertex.active_set == b.vertex.active_set);
      CHECK(a.vertex.x == b.vertex.x);
      CHECK(a.table.alpha == b.table.alpha);
      CHECK(a.table.beta == b.table.beta);
      CHECK(a.table.qc == b.table.qc);
      CHECK(a.table.qu == b.table.qu);
      CHECK(a.table.gamma == b.table.gamma);
      CHECK(a.table.phi == b.table.phi);
    }
    // byte-stable
    CHECK(text_of(back, lp) == text);
  }
}

TEST_CASE("a reloaded path warm-starts the same update", "[path-io]") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto lp = canonicalize(random_payoff(rng, 3, 5));
    const auto r = solve(lp);
    std::istringstream in(text_of(r.path, lp));
    const auto reloaded = read_search_path(in, lp);
    const Eigen::VectorXd g = random_payoff(rng, 3, 1).entries().col(0);
    const auto ext = extend_with_action(lp, g);
    const auto a = iterative_solve(ExtensionEvent<double>{lp, ext, r.solution, r.path});
    const auto b = iterative_solve(ExtensionEvent<double>{lp, ext, r.solution, reloaded});
    CHECK(a.solution.value == b.solution.value);
    CHECK(a.pivots_used == b.pivots_used);
  }
}

TEST_CASE("documents for another LP are rejected", "[path-io]") {
  std::mt19937_64 rng(33);
  const auto lp = canonicalize(random_payoff(rng, 3, 4));
  const auto other = canonicalize(random_payoff(rng, 3, 4));
  CHECK(lp_digest(lp) != lp_digest(other));
  CHECK(lp_digest(lp) == lp_digest(lp));
  CHECK(lp_digest(lp).size() == 16);
  const std::string text = text_of(solve(lp).path, lp);
  std::istringstream in(text);
  CHECK_THROWS_AS(read_search_path(in, other), ParseError);
}

TEST_CASE("corrupted documents raise ParseError", "[path-io]") {
  std::mt19937_64 rng(34);
  const auto lp = canonicalize(random_payoff(rng, 2, 3));
  const std::string text = text_of(solve(lp).path, lp);
  auto rejects = [&](const std::string& doc) {
    std::istringstream in(doc);
    CHECK_THROWS_AS(read_search_path(in, lp), ParseError);
  };
  rejects(text.substr(0, text.size() / 2));
  rejects("");
  rejects("[]");
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("\"format_version\":1"), 18, "\"format_version\":9");
  rejects(wrong_version);
  std::string bad_status = text;
  bad_status.replace(bad_status.find("\"status\":\"optimal\""), 18, "\"status\":\"bogus\"");
  rejects(bad_status);
  std::string bad_index = text;
  bad_index.replace(bad_index.find("\"active_set\":["), 14, "\"active_set\":[99,");
  rejects(bad_index);
}

TEST_CASE("number formatting", "[path-io]") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-5.0) == "-5");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_THROWS_AS(format_number(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("extension events round-trip", "[path-io]") {
  const Eigen::VectorXd g = Eigen::Vector3d(-2, 0.25, 7);
  std::ostringstream out;
  write_extension_event(out, ExtensionRequest{g, "0123456789abcdef"});
  std::istringstream in(out.str());
  const auto back = read_extension_event(in);
  CHECK(back.g == g);
  CHECK(back.parent_digest == "0123456789abcdef");
  std::istringstream broken("{\"format_version\":1,\"g\":[1,\"x\"],\"parent_lp_digest\":\"a\"}");
  CHECK_THROWS_AS(read_extension_event(broken), ParseError);
}

TEST_CASE("game states round-trip", "[path-io]") {
  std::mt19937_64 rng(35);
  for (auto variant : {LpVariant::simplex, LpVariant::budgeted}) {
    GameState state;
    state.payoff = random_payoff(rng, 4, 3);
    state.variant = variant;
    state.budget = variant == LpVariant::budgeted ? 2.0 : 1.0;
    state.path = solve(state.lp()).path;
    std::ostringstream out;
    write_game_state(out, state);
    std::istringstream in(out.str());
    const auto back = read_game_state(in);
    CHECK(back.variant == variant);
    CHECK(back.budget == state.budget);
    CHECK(back.payoff.entries() == state.payoff.entries());
    CHECK(back.path.entries.size() == state.path.entries.size());
    std::ostringstream again;
    write_game_state(again, back);
    CHECK(again.str() == out.str());
  }
}

TEST_CASE("a state whose payoff was edited no longer matches its path", "[path-io]") {
  std::mt19937_64 rng(36);
  GameState state;
  state.payoff = random_payoff(rng, 3, 3);
  state.path = solve(state.lp()).path;
  std::ostringstream out;
  write_game_state(out, state);
  std::string text = out.str();
  const auto at = text.find("\"payoff\":[[") + 11;
  text.insert(at, "1");
  std::istringstream in(text);
  CHECK_THROWS_AS(read_game_state(in), ParseError);
}
