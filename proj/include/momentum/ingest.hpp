#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"

namespace momentum {

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// In-game score. Regular games use the tokens 0/15/30/40/AD mapped to the
/// ordinals 0..4; tiebreak games carry raw point counts.
struct Score {
  int ordinal = 0;
  bool tiebreak = false;

  friend bool operator==(const Score&, const Score&) = default;
};

inline std::string to_token(const Score& s) {
  if (s.tiebreak) return std::to_string(s.ordinal);
  static constexpr std::array<std::string_view, 5> kTokens{"0", "15", "30", "40", "AD"};
  return std::string(kTokens.at(static_cast<std::size_t>(s.ordinal)));
}

struct PlayerPoint {
  std::optional<int> games;
  std::optional<Score> score;
  std::optional<int> points_won;
  std::optional<int> ace, winner, double_fault, unf_err, net_pt, net_pt_won, break_pt, break_pt_won,
      force_err;
  std::optional<double> distance_run;
};

struct PointRecord {
  std::string match_id;
  int set_no = 0;  // 0 when the column is absent
  int game_no = 0;
  int point_no = 0;
  PlayerPoint p1, p2;
  std::optional<int> server, serve_no;
  int point_victor = 1;
  std::optional<int> game_victor, set_victor;
  std::optional<double> ball_speed, ball_spin, game_time;
  std::optional<int> rally_length;
  std::optional<std::string> serve_direction, serve_depth, return_depth;
};

struct MatchData {
  std::string match_id;
  std::vector<PointRecord> points;
};

// ---------------------------------------------------------------------------
// Schema: canonical field name -> accepted header names (first match wins).
// ---------------------------------------------------------------------------

struct Schema {
  std::map<std::string, std::vector<std::string>, std::less<>> aliases;
  std::vector<std::string> required;
};

inline Schema default_schema() {
  Schema s;
  auto same = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) s.aliases[n] = {n};
  };
  same({"match_id", "set_no", "game_no", "point_no", "p1_games", "p2_games", "server", "serve_no",
        "point_victor", "p1_points_won", "p2_points_won", "game_victor", "set_victor"});
  for (const char* p : {"p1", "p2"}) {
    const std::string pre = p;
    for (const char* f : {"ace", "winner", "double_fault", "unf_err", "net_pt", "net_pt_won",
                          "break_pt", "break_pt_won", "force_err", "distance_run"}) {
      s.aliases[pre + "_" + f] = {pre + "_" + f};
    }
    s.aliases[pre + "_score"] = {pre + "_score", pre + "_score_token"};
  }
  // The public Wimbledon point-by-point release names a few columns differently.
  s.aliases["ball_speed"] = {"ball_speed", "speed_mph", "speed_kmh"};
  s.aliases["ball_spin"] = {"ball_spin"};
  s.aliases["rally_length"] = {"rally_length", "rally_count"};
  s.aliases["game_time"] = {"game_time"};
  s.aliases["serve_direction"] = {"serve_direction", "serve_width"};
  s.aliases["serve_depth"] = {"serve_depth"};
  s.aliases["return_depth"] = {"return_depth"};
  s.required = {"match_id", "point_no", "point_victor"};
  return s;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

/// Reads one CSV record (RFC 4180 quoting). Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Tolerate integral values written as "3.0".
    double d = 0;
    auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (e2 != std::errc() || p2 != s.data() + s.size() || d != std::floor(d)) return std::nullopt;
    return static_cast<long long>(d);
  }
  return v;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

class RowReader {
 public:
  RowReader(const std::vector<std::string>& cells, std::size_t line,
            const std::unordered_map<std::string, std::size_t>& index)
      : cells_(cells), line_(line), index_(index) {}

  std::optional<std::string_view> raw(const std::string& field) const {
    auto it = index_.find(field);
    if (it == index_.end() || it->second >= cells_.size()) return std::nullopt;
    std::string_view v = cells_[it->second];
    if (is_missing(v)) return std::nullopt;
    return trim(v);
  }

  [[noreturn]] void bad(const std::string& field, std::string_view value) const {
    throw Error(ErrorCode::BadToken, "row " + std::to_string(line_) + ", column " + field +
                                         ", value '" + std::string(value) + "'");
  }

  std::optional<int> integer(const std::string& field, long long lo, long long hi) const {
    auto v = raw(field);
    if (!v) return std::nullopt;
    auto n = parse_int(*v);
    if (!n || *n < lo || *n > hi) bad(field, *v);
    return static_cast<int>(*n);
  }

  int required_integer(const std::string& field, long long lo, long long hi) const {
    auto v = integer(field, lo, hi);
    if (!v) bad(field, "");
    return *v;
  }

  std::optional<int> flag(const std::string& field) const { return integer(field, 0, 1); }

  std::optional<double> nonneg(const std::string& field) const {
    auto v = raw(field);
    if (!v) return std::nullopt;
    auto d = parse_double(*v);
    if (!d || *d < 0.0) bad(field, *v);
    return d;
  }

  std::optional<double> real(const std::string& field) const {
    auto v = raw(field);
    if (!v) return std::nullopt;
    auto d = parse_double(*v);
    if (!d) bad(field, *v);
    return d;
  }

  std::optional<std::string> text(const std::string& field) const {
    auto v = raw(field);
    if (!v) return std::nullopt;
    return std::string(*v);
  }

  std::optional<Score> score(const std::string& field, bool tiebreak) const {
    auto v = raw(field);
    if (!v) return std::nullopt;
    if (*v == "AD" || *v == "Ad" || *v == "ad") {
      if (tiebreak) bad(field, *v);
      return Score{4, false};
    }
    auto n = parse_int(*v);
    if (!n || *n < 0) bad(field, *v);
    if (tiebreak) return Score{static_cast<int>(*n), true};
    switch (*n) {
      case 0: return Score{0, false};
      case 15: return Score{1, false};
      case 30: return Score{2, false};
      case 40: return Score{3, false};
      default: bad(field, *v);
    }
  }

 private:
  const std::vector<std::string>& cells_;
  std::size_t line_;
  const std::unordered_map<std::string, std::size_t>& index_;
};

inline void read_player(const RowReader& r, const std::string& pre, PlayerPoint& p, bool tiebreak) {
  p.games = r.integer(pre + "_games", 0, 99);
  p.score = r.score(pre + "_score", tiebreak);
  p.points_won = r.integer(pre + "_points_won", 0, 1 << 20);
  p.ace = r.flag(pre + "_ace");
  p.winner = r.flag(pre + "_winner");
  p.double_fault = r.flag(pre + "_double_fault");
  p.unf_err = r.flag(pre + "_unf_err");
  p.net_pt = r.flag(pre + "_net_pt");
  p.net_pt_won = r.flag(pre + "_net_pt_won");
  p.break_pt = r.flag(pre + "_break_pt");
  p.break_pt_won = r.flag(pre + "_break_pt_won");
  p.force_err = r.flag(pre + "_force_err");
  p.distance_run = r.nonneg(pre + "_distance_run");
}

}  // namespace detail

/// Parses a point-by-point CSV into one MatchData per match_id, in order of
/// first appearance. Missing cells (empty or "NA") stay missing.
inline std::vector<MatchData> parse_csv(std::istream& in, const Schema& schema = default_schema()) {
  std::vector<std::string> header;
  if (!detail::read_csv_record(in, header) ||
      (header.size() == 1 && detail::trim(header[0]).empty())) {
    throw Error(ErrorCode::EmptyInput, "no header row");
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < header.size(); ++i) by_name.emplace(std::string(detail::trim(header[i])), i);

  // Canonical field -> column position.
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& [field, names] : schema.aliases) {
    for (const auto& n : names) {
      if (auto it = by_name.find(n); it != by_name.end()) {
        index.emplace(field, it->second);
        break;
      }
    }
  }
  for (const auto& req : schema.required) {
    if (!index.contains(req)) throw Error(ErrorCode::MissingColumn, req);
  }

  std::vector<MatchData> matches;
  std::unordered_map<std::string, std::size_t> match_pos;
  std::vector<std::string> cells;
  std::size_t line = 1;
  while (detail::read_csv_record(in, cells)) {
    ++line;
    if (cells.size() == 1 && detail::trim(cells[0]).empty()) continue;  // blank line
    detail::RowReader r(cells, line, index);
    PointRecord p;
    auto id = r.text("match_id");
    if (!id) r.bad("match_id", "");
    p.match_id = *id;
    p.set_no = r.integer("set_no", 1, 99).value_or(0);
    p.game_no = r.integer("game_no", 1, 999).value_or(0);
    p.point_no = r.required_integer("point_no", 1, 1 << 24);
    p.server = r.integer("server", 1, 2);
    p.serve_no = r.integer("serve_no", 1, 2);
    p.point_victor = r.required_integer("point_victor", 1, 2);
    p.game_victor = r.integer("game_victor", 0, 2);
    p.set_victor = r.integer("set_victor", 0, 2);
    const auto g1 = r.integer("p1_games", 0, 99);
    const auto g2 = r.integer("p2_games", 0, 99);
    const bool tiebreak = g1 && g2 && *g1 == 6 && *g2 == 6;
    detail::read_player(r, "p1", p.p1, tiebreak);
    detail::read_player(r, "p2", p.p2, tiebreak);
    p.ball_speed = r.nonneg("ball_speed");
    p.ball_spin = r.nonneg("ball_spin");
    p.rally_length = r.integer("rally_length", 0, 1 << 16);
    p.game_time = r.real("game_time");
    p.serve_direction = r.text("serve_direction");
    p.serve_depth = r.text("serve_depth");
    p.return_depth = r.text("return_depth");

    auto [it, fresh] = match_pos.emplace(p.match_id, matches.size());
    if (fresh) matches.push_back(MatchData{p.match_id, {}});
    auto& pts = matches[it->second].points;
    if (!pts.empty()) {
      const auto& q = pts.back();
      if (std::tie(q.set_no, q.game_no, q.point_no) >= std::tie(p.set_no, p.game_no, p.point_no)) {
        r.bad("point_no", std::to_string(p.point_no) + " (out of order)");
      }
    }
    pts.push_back(std::move(p));
  }
  if (matches.empty()) throw Error(ErrorCode::EmptyInput, "header only, no data rows");
  return matches;
}

/// Writes records with canonical column names; parse_csv reads them back.
inline void write_points_csv(std::ostream& out, const std::vector<MatchData>& matches) {
  static const std::vector<std::string> kCols = [] {
    std::vector<std::string> c{"match_id", "set_no", "game_no", "point_no", "p1_games", "p2_games",
                               "p1_score", "p2_score", "server", "serve_no", "point_victor",
                               "p1_points_won", "p2_points_won", "game_victor", "set_victor"};
    for (const char* f : {"ace", "winner", "double_fault", "unf_err", "net_pt", "net_pt_won",
                          "break_pt", "break_pt_won", "force_err", "distance_run"}) {
      c.push_back(std::string("p1_") + f);
      c.push_back(std::string("p2_") + f);
    }
    for (const char* f : {"ball_speed", "ball_spin", "rally_length", "game_time", "serve_direction",
                          "serve_depth", "return_depth"}) {
      c.emplace_back(f);
    }
    return c;
  }();
  auto num = [](const auto& v) -> std::string {
    if (!v) return "";
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
  };
  auto sc = [](const std::optional<Score>& s) -> std::string { return s ? to_token(*s) : ""; };
  auto txt = [](const std::optional<std::string>& s) { return s ? detail::csv_escape(*s) : ""; };

  for (std::size_t i = 0; i < kCols.size(); ++i) out << (i ? "," : "") << kCols[i];
  out << '\n';
  for (const auto& m : matches) {
    for (const auto& p : m.points) {
      auto opt = [](int v) { return v > 0 ? std::optional<int>(v) : std::nullopt; };
      std::vector<std::string> row{detail::csv_escape(p.match_id), num(opt(p.set_no)),
                                   num(opt(p.game_no)), std::to_string(p.point_no),
                                   num(p.p1.games), num(p.p2.games), sc(p.p1.score), sc(p.p2.score),
                                   num(p.server), num(p.serve_no), std::to_string(p.point_victor),
                                   num(p.p1.points_won), num(p.p2.points_won), num(p.game_victor),
                                   num(p.set_victor)};
      const std::array<const PlayerPoint*, 2> pl{&p.p1, &p.p2};
      for (auto member : {&PlayerPoint::ace, &PlayerPoint::winner, &PlayerPoint::double_fault,
                          &PlayerPoint::unf_err, &PlayerPoint::net_pt, &PlayerPoint::net_pt_won,
                          &PlayerPoint::break_pt, &PlayerPoint::break_pt_won,
                          &PlayerPoint::force_err}) {
        for (const auto* q : pl) row.push_back(num(q->*member));
      }
      for (const auto* q : pl) row.push_back(num(q->distance_run));
      row.push_back(num(p.ball_speed));
      row.push_back(num(p.ball_spin));
      row.push_back(num(p.rally_length));
      row.push_back(num(p.game_time));
      row.push_back(txt(p.serve_direction));
      row.push_back(txt(p.serve_depth));
      row.push_back(txt(p.return_depth));
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Engineered features x1..x16
// ---------------------------------------------------------------------------

inline constexpr int kFeatureCount = 16;

enum class Orientation { Positive, Negative };

/// Default orientation: double faults (x8) and unforced errors (x9) are
/// negative, everything else positive.
constexpr Orientation default_orientation(int feature_id) noexcept {
  return (feature_id == 8 || feature_id == 9) ? Orientation::Negative : Orientation::Positive;
}

inline std::string feature_name(int feature_id) { return "x" + std::to_string(feature_id); }

struct ImputedCell {
  int t;  // 0-based point index
  int feature_id;
  friend bool operator==(const ImputedCell&, const ImputedCell&) = default;
};

struct FeatureFrame {
  std::string match_id;
  Eigen::MatrixXd features;  // T x 16; column j holds x_{j+1}
  std::vector<int> outcome;  // 1 iff Player 1 won the point
  std::array<Orientation, kFeatureCount> orientation{};
  std::vector<ImputedCell> imputed;

  Eigen::Index size() const { return features.rows(); }
  auto column(int feature_id) const { return features.col(feature_id - 1); }
};

namespace detail {

template <typename T>
T need(const std::optional<T>& v, const char* feature, std::size_t t) {
  if (!v) {
    throw Error(ErrorCode::MissingRequired, std::string(feature) + " at point " + std::to_string(t + 1));
  }
  return *v;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Fills missing cells with the match median; throws MissingRequired when
/// nothing was observed.
inline std::vector<double> impute_median(const std::vector<std::optional<double>>& cells,
                                         const char* feature, std::vector<std::size_t>& filled) {
  std::vector<double> seen;
  for (const auto& c : cells) {
    if (c) seen.push_back(*c);
  }
  if (seen.empty()) {
    throw Error(ErrorCode::MissingRequired, std::string(feature) + " at point 1 (no observed values)");
  }
  const double med = median(std::move(seen));
  std::vector<double> out(cells.size());
  for (std::size_t t = 0; t < cells.size(); ++t) {
    if (cells[t]) {
      out[t] = *cells[t];
    } else {
      out[t] = med;
      filled.push_back(t);
    }
  }
  return out;
}

}  // namespace detail

/// Derives the sixteen engineered per-point features for Player 1.
///
/// Ratios x10/x11 use running totals through the current point (0/0 := 0).
/// x13 sums the distance run over the current and two preceding points.
/// Missing ball speed and distance cells are imputed with the match median.
inline FeatureFrame derive_features(const MatchData& m) {
  const std::size_t T = m.points.size();
  if (T == 0) throw Error(ErrorCode::EmptyInput, "match " + m.match_id + " has no points");
  FeatureFrame f;
  f.match_id = m.match_id;
  f.features.setZero(static_cast<Eigen::Index>(T), kFeatureCount);
  f.outcome.resize(T);
  for (int j = 1; j <= kFeatureCount; ++j) f.orientation[j - 1] = default_orientation(j);

  std::vector<std::optional<double>> speed(T), dist(T);
  for (std::size_t t = 0; t < T; ++t) {
    speed[t] = m.points[t].ball_speed;
    dist[t] = m.points[t].p1.distance_run;
  }
  std::vector<std::size_t> speed_filled, dist_filled;
  const auto speed_v = detail::impute_median(speed, "ball_speed", speed_filled);
  const auto dist_v = detail::impute_median(dist, "p1_distance_run", dist_filled);
  for (auto t : dist_filled) {
    for (int id : {12, 13, 14}) f.imputed.push_back({static_cast<int>(t), id});
  }
  for (auto t : speed_filled) {
    for (int id : {15, 16}) f.imputed.push_back({static_cast<int>(t), id});
  }
  std::sort(f.imputed.begin(), f.imputed.end(),
            [](const ImputedCell& a, const ImputedCell& b) {
              return std::tie(a.t, a.feature_id) < std::tie(b.t, b.feature_id);
            });

  int sets1 = 0, sets2 = 0;
  int net = 0, net_won = 0, brk = 0, brk_won = 0;
  double total_dist = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& p = m.points[t];
    const auto row = static_cast<Eigen::Index>(t);
    const Score s1 = detail::need(p.p1.score, "p1_score", t);
    const Score s2 = detail::need(p.p2.score, "p2_score", t);
    const int server = detail::need(p.server, "server", t);
    const int serve_no = detail::need(p.serve_no, "serve_no", t);

    net += detail::need(p.p1.net_pt, "p1_net_pt", t);
    net_won += detail::need(p.p1.net_pt_won, "p1_net_pt_won", t);
    brk += detail::need(p.p1.break_pt, "p1_break_pt", t);
    brk_won += detail::need(p.p1.break_pt_won, "p1_break_pt_won", t);
    total_dist += dist_v[t];
    double last3 = 0.0;
    for (std::size_t k = (t >= 2 ? t - 2 : 0); k <= t; ++k) last3 += dist_v[k];

    auto x = f.features.row(row);
    x(0) = detail::need(p.p1.games, "p1_games", t);
    x(1) = s1.ordinal - s2.ordinal;
    x(2) = (server == 1 && serve_no == 1) ? 1.0 : 0.0;
    x(3) = s1.ordinal >= s2.ordinal ? 1.0 : 0.0;
    x(4) = sets1 - sets2;
    x(5) = detail::need(p.p1.ace, "p1_ace", t);
    x(6) = detail::need(p.p1.winner, "p1_winner", t);
    x(7) = detail::need(p.p1.double_fault, "p1_double_fault", t);
    x(8) = detail::need(p.p1.unf_err, "p1_unf_err", t);
    x(9) = net > 0 ? static_cast<double>(net_won) / net : 0.0;
    x(10) = brk > 0 ? static_cast<double>(brk_won) / brk : 0.0;
    x(11) = total_dist;
    x(12) = last3;
    x(13) = dist_v[t];
    x(14) = speed_v[t];
    x(15) = speed_v[t] * serve_no;
    f.outcome[t] = p.point_victor == 1 ? 1 : 0;

    // Sets won before the next point.
    const int sv = detail::need(p.set_victor, "set_victor", t);
    if (sv == 1) ++sets1;
    if (sv == 2) ++sets2;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Min-max standardization
// ---------------------------------------------------------------------------

struct StandardizedFrame {
  Eigen::MatrixXd z;             // T x m, entries in [0,1]
  std::vector<int> column_ids;   // feature ids (1..16)
  std::vector<double> min, max;  // per column, before scaling
  std::vector<Orientation> orientation;

  std::string column_name(std::size_t j) const { return feature_name(column_ids.at(j)); }
};

/// Maps one column to [0,1]; constant columns become all zeros.
inline Eigen::VectorXd standardize_column(const Eigen::Ref<const Eigen::VectorXd>& x, Orientation o,
                                          double* lo = nullptr, double* hi = nullptr) {
  const double mn = x.minCoeff();
  const double mx = x.maxCoeff();
  if (lo) *lo = mn;
  if (hi) *hi = mx;
  if (!(mx > mn)) return Eigen::VectorXd::Zero(x.size());
  const double range = mx - mn;
  Eigen::VectorXd z = o == Orientation::Positive ? Eigen::VectorXd((x.array() - mn) / range)
                                                 : Eigen::VectorXd((mx - x.array()) / range);
  return z.cwiseMax(0.0).cwiseMin(1.0);
}

inline StandardizedFrame standardize(const FeatureFrame& f, const std::vector<int>& columns) {
  StandardizedFrame s;
  s.z.resize(f.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const int id = columns[j];
    if (id < 1 || id > kFeatureCount) throw Error(ErrorCode::UnknownColumn, std::to_string(id));
    double lo = 0, hi = 0;
    const auto o = f.orientation[id - 1];
    s.z.col(static_cast<Eigen::Index>(j)) = standardize_column(f.column(id), o, &lo, &hi);
    s.column_ids.push_back(id);
    s.min.push_back(lo);
    s.max.push_back(hi);
    s.orientation.push_back(o);
  }
  return s;
}

/// Row-wise concatenation of per-match frames (pooled modes).
inline FeatureFrame concat(const std::vector<FeatureFrame>& frames) {
  FeatureFrame out;
  if (frames.empty()) return out;
  Eigen::Index rows = 0;
  for (const auto& f : frames) rows += f.size();
  out.match_id = "pooled";
  out.orientation = frames.front().orientation;
  out.features.resize(rows, kFeatureCount);
  Eigen::Index at = 0;
  for (const auto& f : frames) {
    out.features.middleRows(at, f.size()) = f.features;
    for (const auto& c : f.imputed) out.imputed.push_back({c.t + static_cast<int>(at), c.feature_id});
    out.outcome.insert(out.outcome.end(), f.outcome.begin(), f.outcome.end());
    at += f.size();
  }
  return out;
}

/// Column-named CSV: t,x1..x16,outcome (t is 1-based).
inline void write_feature_csv(std::ostream& out, const FeatureFrame& f) {
  out << "t";
  for (int j = 1; j <= kFeatureCount; ++j) out << ',' << feature_name(j);
  out << ",outcome\n";
  std::ostringstream cell;
  for (Eigen::Index t = 0; t < f.size(); ++t) {
    out << (t + 1);
    for (int j = 0; j < kFeatureCount; ++j) {
      cell.str("");
      cell.precision(17);
      cell << f.features(t, j);
      out << ',' << cell.str();
    }
    out << ',' << f.outcome[static_cast<std::size_t>(t)] << '\n';
  }
}

}  // namespace momentum
