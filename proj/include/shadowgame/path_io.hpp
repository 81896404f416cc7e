#pragma once

// Text persistence for search paths and extension events.
//
// Documents are JSON. Numbers are written with 17 significant digits so that
// doubles round-trip exactly and identical inputs give identical bytes.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowgame/errors.hpp"
#include "shadowgame/lp_core.hpp"
#include "shadowgame/shadow_simplex.hpp"

namespace shadowgame {

inline constexpr int kPathFormatVersion = 1;

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "cannot serialize a non-finite number");
  // negative zero would not survive a parse
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// FNV-1a over the 17-digit text of (variant, budget, A, b, c).
inline std::string lp_digest(const CanonicalLP<double>& lp) {
  std::ostringstream text;
  text << static_cast<int>(lp.variant) << ' ' << format_number(lp.budget) << ' ' << lp.rows() << ' '
       << lp.variables() << ' ' << lp.normal_count << '\n';
  for (Eigen::Index i = 0; i < lp.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < lp.A.cols(); ++j) text << format_number(lp.A(i, j)) << ' ';
    text << "| " << format_number(lp.b(i)) << '\n';
  }
  for (Eigen::Index j = 0; j < lp.c.size(); ++j) text << format_number(lp.c(j)) << ' ';
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text.str()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace detail {

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_number(v(i));
  out << ']';
}

inline void write_rows(std::ostream& out, const Eigen::MatrixXd& m) {
  out << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << (i ? "," : "") << '[';
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << ']';
  }
  out << ']';
}

inline void write_indices(std::ostream& out, const ActiveSet& s) {
  out << '[';
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << s[i];
  out << ']';
}

[[noreturn]] inline void malformed(const std::string& what) { throw ParseError(0, "malformed document: " + what); }

inline Eigen::VectorXd read_vector(const nlohmann::json& j, std::size_t expected, const char* what) {
  if (!j.is_array() || j.size() != expected) malformed(std::string(what) + " has the wrong length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!j[i].is_number()) malformed(std::string(what) + " holds a non-number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Eigen::MatrixXd read_rows(const nlohmann::json& j, std::size_t rows, std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows) malformed(std::string(what) + " has the wrong row count");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) m.row(static_cast<Eigen::Index>(i)) = read_vector(j[i], cols, what).transpose();
  return m;
}

inline ActiveSet read_indices(const nlohmann::json& j, std::size_t expected, std::size_t bound) {
  if (!j.is_array() || j.size() != expected) malformed("active_set has the wrong length");
  ActiveSet s;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() >= bound) malformed("active_set index out of range");
    s.push_back(v.get<std::size_t>());
  }
  return s;
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) malformed(std::string("missing field ") + name);
  return j.at(name);
}

inline nlohmann::json parse_json(std::istream& in) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }
}

}  // namespace detail

/// Writes {format_version, n, m, lp_digest, entries, status}.
inline void write_search_path(std::ostream& out, const SearchPath<double>& path, const CanonicalLP<double>& lp) {
  out << "{\"format_version\":" << kPathFormatVersion << ",\"n\":" << lp.variables() << ",\"m\":" << lp.normal_count
      << ",\"lp_digest\":\"" << lp_digest(lp) << "\",\"status\":\""
      << (path.status == PathStatus::optimal ? "optimal" : "truncated") << "\",\n\"entries\":[";
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const auto& e = path.entries[i];
    out << (i ? ",\n" : "\n") << "{\"active_set\":";
    detail::write_indices(out, e.vertex.active_set);
    out << ",\"x\":";
    detail::write_vector(out, e.vertex.x);
    out << ",\"table\":{\"alpha\":";
    detail::write_vector(out, e.table.alpha);
    out << ",\"beta\":";
    detail::write_vector(out, e.table.beta);
    out << ",\"Qc\":" << format_number(e.table.qc) << ",\"Qu\":" << format_number(e.table.qu) << ",\"gamma\":";
    detail::write_rows(out, e.table.gamma);
    out << ",\"phi\":";
    detail::write_vector(out, e.table.phi);
    out << "}}";
  }
  out << "\n]}";
}

/// Parses a search-path document written for `lp`; a digest mismatch means
/// the path belongs to a different LP and raises ParseError.
inline SearchPath<double> read_search_path(const nlohmann::json& doc, const CanonicalLP<double>& lp) {
  using detail::field;
  if (field(doc, "format_version") != kPathFormatVersion) detail::malformed("unsupported format_version");
  if (field(doc, "n") != lp.variables() || field(doc, "m") != lp.normal_count)
    detail::malformed("dimensions do not match the LP");
  if (field(doc, "lp_digest") != lp_digest(lp)) detail::malformed("lp_digest does not match the LP");
  const auto& status = field(doc, "status");
  SearchPath<double> path;
  if (status == "optimal")
    path.status = PathStatus::optimal;
  else if (status == "truncated")
    path.status = PathStatus::truncated;
  else
    detail::malformed("unknown status");

  const std::size_t n = lp.variables();
  const std::size_t rows = lp.rows();
  const auto& entries = field(doc, "entries");
  if (!entries.is_array() || entries.empty()) detail::malformed("entries must be a non-empty array");
  for (const auto& e : entries) {
    PathEntry<double> entry;
    entry.vertex.active_set = detail::read_indices(field(e, "active_set"), n, rows);
    entry.vertex.x = detail::read_vector(field(e, "x"), n, "x");
    const auto& t = field(e, "table");
    entry.table.active_set = entry.vertex.active_set;
    entry.table.alpha = detail::read_vector(field(t, "alpha"), n, "alpha");
    entry.table.beta = detail::read_vector(field(t, "beta"), n, "beta");
    if (!field(t, "Qc").is_number() || !field(t, "Qu").is_number()) detail::malformed("Qc/Qu must be numbers");
    entry.table.qc = field(t, "Qc").get<double>();
    entry.table.qu = field(t, "Qu").get<double>();
    entry.table.gamma = detail::read_rows(field(t, "gamma"), rows, n, "gamma");
    entry.table.phi = detail::read_vector(field(t, "phi"), rows, "phi");
    path.entries.push_back(std::move(entry));
  }
  return path;
}

inline SearchPath<double> read_search_path(std::istream& in, const CanonicalLP<double>& lp) {
  return read_search_path(detail::parse_json(in), lp);
}

/// A new payoff column tied to the LP it extends.
struct ExtensionRequest {
  Eigen::VectorXd g;
  std::string parent_digest;
};

inline void write_extension_event(std::ostream& out, const ExtensionRequest& event) {
  out << "{\"format_version\":" << kPathFormatVersion << ",\"g\":";
  detail::write_vector(out, event.g);
  out << ",\"parent_lp_digest\":\"" << event.parent_digest << "\"}";
}

inline ExtensionRequest read_extension_event(std::istream& in) {
  const auto doc = detail::parse_json(in);
  using detail::field;
  if (field(doc, "format_version") != kPathFormatVersion) detail::malformed("unsupported format_version");
  const auto& g = field(doc, "g");
  if (!g.is_array()) detail::malformed("g must be an array");
  const auto& digest = field(doc, "parent_lp_digest");
  if (!digest.is_string()) detail::malformed("parent_lp_digest must be a string");
  return ExtensionRequest{detail::read_vector(g, g.size(), "g"), digest.get<std::string>()};
}

/// Everything needed to resume warm-started solves of one game: the payoff
/// matrix (from which the LP and its digest are rebuilt) and the search path.
struct GameState {
  PayoffMatrix payoff;
  LpVariant variant = LpVariant::simplex;
  double budget = 1.0;
  SearchPath<double> path;

  CanonicalLP<double> lp() const {
    return variant == LpVariant::budgeted ? canonicalize_budgeted<double>(payoff, budget) : canonicalize<double>(payoff);
  }
};

inline void write_game_state(std::ostream& out, const GameState& state) {
  const auto lp = state.lp();
  out << "{\"format_version\":" << kPathFormatVersion << ",\"variant\":\""
      << (state.variant == LpVariant::budgeted ? "budgeted" : "simplex") << "\",\"budget\":"
      << format_number(state.budget) << ",\"payoff\":";
  detail::write_rows(out, state.payoff.entries());
  out << ",\n\"search_path\":";
  write_search_path(out, state.path, lp);
  out << "}\n";
}

inline GameState read_game_state(std::istream& in) {
  const auto doc = detail::parse_json(in);
  using detail::field;
  if (field(doc, "format_version") != kPathFormatVersion) detail::malformed("unsupported format_version");
  GameState state;
  const auto& variant = field(doc, "variant");
  if (variant == "budgeted")
    state.variant = LpVariant::budgeted;
  else if (variant != "simplex")
    detail::malformed("unknown variant");
  if (!field(doc, "budget").is_number()) detail::malformed("budget must be a number");
  state.budget = field(doc, "budget").get<double>();
  const auto& payoff = field(doc, "payoff");
  if (!payoff.is_array() || payoff.empty() || !payoff[0].is_array()) detail::malformed("payoff must be a matrix");
  try {
    state.payoff = PayoffMatrix(detail::read_rows(payoff, payoff.size(), payoff[0].size(), "payoff"));
    state.path = read_search_path(field(doc, "search_path"), state.lp());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    detail::malformed(e.what());
  }
  return state;
}

}  // namespace shadowgame
