#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "momentum/error.hpp"
#include "momentum/ingest.hpp"
#include "momentum/rng.hpp"
#include "momentum/streaks.hpp"

namespace momentum {

using Sequences = std::vector<std::vector<int>>;

/// Added win probability given the signed current streak k entering a point
/// (k > 0: k straight wins, k < 0: |k| straight losses, 0 at the start).
using BoostFn = std::function<double(int)>;

struct GeneratorConfig {
  double p = 0.5;
  BoostFn boost;  // empty = no momentum
  int length = 200;
  int matches = 31;
  std::uint64_t seed = 1;
};

/// beta(k) = after_win for k >= 1, after_loss for k <= -1, 0 at k = 0.
inline BoostFn step_boost(double after_win, double after_loss) {
  return [=](int k) { return k > 0 ? after_win : (k < 0 ? after_loss : 0.0); };
}

namespace detail {

inline void check_generator(double p, int length, int matches) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be in [0,1]");
  if (length < 1 || matches < 1) throw Error(ErrorCode::InvalidArgument, "length and match count must be >= 1");
}

}  // namespace detail

/// Independent Bernoulli(p) points. Match m uses substream m of the seed.
inline Sequences gen_null(double p, int length, int matches, std::uint64_t seed) {
  detail::check_generator(p, length, matches);
  Sequences out(static_cast<std::size_t>(matches));
  for (int m = 0; m < matches; ++m) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(m));
    auto& s = out[static_cast<std::size_t>(m)];
    s.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) s.push_back(rng.uniform() < p ? 1 : 0);
  }
  return out;
}

/// Streak-dependent points: P(win) = clamp(p + beta(k), 0.01, 0.99). Draws
/// one uniform per point in the same order as gen_null, so beta == 0 gives the
/// same sequences.
inline Sequences gen_momentum(const GeneratorConfig& cfg) {
  detail::check_generator(cfg.p, cfg.length, cfg.matches);
  if (!cfg.boost) return gen_null(cfg.p, cfg.length, cfg.matches, cfg.seed);
  Sequences out(static_cast<std::size_t>(cfg.matches));
  for (int m = 0; m < cfg.matches; ++m) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(m));
    auto& s = out[static_cast<std::size_t>(m)];
    s.reserve(static_cast<std::size_t>(cfg.length));
    int k = 0;
    for (int t = 0; t < cfg.length; ++t) {
      const double b = cfg.boost(k);
      const double q = b == 0.0 ? cfg.p : std::clamp(cfg.p + b, 0.01, 0.99);
      const int win = rng.uniform() < q ? 1 : 0;
      s.push_back(win);
      k = win ? (k > 0 ? k + 1 : 1) : (k < 0 ? k - 1 : -1);
    }
  }
  return out;
}

struct CalibrationResult {
  int datasets = 0;
  int rejections = 0;
  double rate = 0.0;
  double standard_error = 0.0;  // sqrt(alpha (1 - alpha) / datasets)
  double ci_low = 0.0, ci_high = 0.0;  // Wilson 95% interval for the rate
};

using TableTest = std::function<TestResult(const ContingencyTable&)>;

/// Fraction of generated datasets whose test p-value falls below alpha.
/// Dataset d is generated from substream d of cfg.seed. Tables whose margins
/// make the test undefined count as non-rejections.
inline CalibrationResult calibrate(const TableTest& test, double alpha, int datasets, const GeneratorConfig& cfg,
                                   int cap = 7) {
  if (datasets < 500) throw Error(ErrorCode::InvalidArgument, "calibration needs at least 500 datasets");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in (0,1]");
  CalibrationResult r;
  r.datasets = datasets;
  for (int d = 0; d < datasets; ++d) {
    GeneratorConfig g = cfg;
    g.seed = mix_seed(cfg.seed) ^ mix_seed(static_cast<std::uint64_t>(d) + 1);
    const auto seqs = gen_momentum(g);
    try {
      if (test(build_contingency(seqs, cap)).p_value < alpha) ++r.rejections;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateMargins) throw;
    }
  }
  const double n = datasets;
  r.rate = r.rejections / n;
  r.standard_error = std::sqrt(alpha * (1.0 - alpha) / n);
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double centre = (r.rate + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(r.rate * (1 - r.rate) / n + z * z / (4 * n * n)) / denom;
  r.ci_low = std::max(0.0, centre - half);
  r.ci_high = std::min(1.0, centre + half);
  return r;
}

/// match_id,point_no,point_victor rows; match ids are "<prefix>-<index>".
inline void write_sequences_csv(std::ostream& out, const Sequences& seqs, const std::string& prefix = "synth") {
  out << "match_id,point_no,point_victor\n";
  for (std::size_t m = 0; m < seqs.size(); ++m) {
    for (std::size_t t = 0; t < seqs[m].size(); ++t) {
      out << prefix << '-' << (m + 1) << ',' << (t + 1) << ',' << (seqs[m][t] ? 1 : 2) << '\n';
    }
  }
}

/// Point-outcome sequences (1 = Player 1 won) of parsed matches.
inline Sequences outcome_sequences(const std::vector<MatchData>& matches) {
  Sequences out;
  for (const auto& m : matches) {
    std::vector<int> s;
    for (const auto& p : m.points) s.push_back(p.point_victor == 1 ? 1 : 0);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full-schema matches with a hidden momentum state
// ---------------------------------------------------------------------------

struct MatchSimConfig {
  int matches = 8;
  int sets_to_win = 2;
  double serve_win = 0.62;      // server's base point-win probability
  double swing = 0.12;          // added to Player 1's win probability in the hot state
  double switch_prob = 0.04;    // per-point probability of flipping the hidden state
  std::uint64_t seed = 1;
};

namespace detail {

struct ScoreState {
  int pts[2]{0, 0};
  int games[2]{0, 0};
  int sets[2]{0, 0};
  bool tiebreak = false;

  Score score_of(int who) const {
    if (tiebreak) return {pts[who], true};
    const int mine = pts[who], theirs = pts[1 - who];
    if (mine >= 3 && theirs >= 3) return {mine > theirs ? 4 : 3, false};
    return {std::min(mine, 3), false};
  }

  /// True when `who` wins the current game by taking the next point.
  bool game_point(int who) const {
    const int mine = pts[who] + 1, theirs = pts[1 - who];
    return tiebreak ? (mine >= 7 && mine - theirs >= 2) : (mine >= 4 && mine - theirs >= 2);
  }
};

}  // namespace detail

/// Simulates matches with simplified tennis scoring (sets to six games, a
/// tiebreak at 6-6) and a hidden two-state momentum process that shifts
/// Player 1's point-win probability by +/- swing. Point annotations (aces,
/// winners, errors, net approaches, distance, serve speed) are drawn
/// conditionally on the outcome so the engineered features carry signal.
inline std::vector<MatchData> simulate_matches(const MatchSimConfig& cfg) {
  if (cfg.matches < 1 || cfg.sets_to_win < 1) throw Error(ErrorCode::InvalidArgument, "bad match simulation size");
  std::vector<MatchData> out;
  for (int mi = 0; mi < cfg.matches; ++mi) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(mi));
    MatchData m;
    m.match_id = "sim-" + std::to_string(mi + 1);
    detail::ScoreState st;
    int server = 0;  // 0 = Player 1
    int tb_first_server = 0;
    int hot = rng.bernoulli(0.5) ? 1 : -1;
    int set_no = 1, game_no = 1, point_no = 0;
    int won[2]{0, 0};
    while (st.sets[0] < cfg.sets_to_win && st.sets[1] < cfg.sets_to_win) {
      if (rng.uniform() < cfg.switch_prob) hot = -hot;
      PointRecord p;
      p.match_id = m.match_id;
      p.set_no = set_no;
      p.game_no = game_no;
      p.point_no = ++point_no;
      p.p1.games = st.games[0];
      p.p2.games = st.games[1];
      p.p1.score = st.score_of(0);
      p.p2.score = st.score_of(1);
      if (st.tiebreak) {
        const int n = st.pts[0] + st.pts[1];
        server = ((n + 1) / 2) % 2 == 0 ? tb_first_server : 1 - tb_first_server;
      }
      p.server = server + 1;

      const bool first_in = rng.uniform() < 0.63;
      p.serve_no = first_in ? 1 : 2;
      const bool double_fault = !first_in && rng.uniform() < 0.09;
      const double p_server = cfg.serve_win - (first_in ? 0.0 : 0.08);
      double p1_win = server == 0 ? p_server : 1.0 - p_server;
      p1_win = std::clamp(p1_win + cfg.swing * hot, 0.02, 0.98);
      int victor;  // 0 = Player 1
      if (double_fault) {
        victor = 1 - server;
      } else {
        victor = rng.uniform() < p1_win ? 0 : 1;
      }
      p.point_victor = victor + 1;
      ++won[victor];
      p.p1.points_won = won[0];
      p.p2.points_won = won[1];

      const bool ace = !double_fault && victor == server && rng.uniform() < (first_in ? 0.16 : 0.05);
      const int rally = (ace || double_fault) ? 0 : 1 + static_cast<int>(-std::log(1.0 - rng.uniform()) * 4.0);
      const bool winner = !ace && !double_fault && rally > 0 && rng.uniform() < 0.35;
      const bool unforced = !ace && !double_fault && !winner && rng.uniform() < 0.45;
      const bool net = !ace && !double_fault && rng.uniform() < 0.14;
      auto flag = [](bool b) { return b ? 1 : 0; };
      for (int who : {0, 1}) {
        PlayerPoint& pp = who == 0 ? p.p1 : p.p2;
        const bool won_it = victor == who;
        pp.ace = flag(ace && won_it);
        pp.winner = flag(winner && won_it);
        pp.double_fault = flag(double_fault && server == who);
        pp.unf_err = flag(unforced && !won_it);
        pp.net_pt = flag(net && rng.uniform() < 0.5);
        pp.net_pt_won = flag(*pp.net_pt == 1 && won_it);
        pp.break_pt = flag(server != who && st.game_point(who) && !st.tiebreak);
        pp.break_pt_won = flag(*pp.break_pt == 1 && won_it);
        pp.force_err = flag(!ace && !double_fault && !winner && !unforced && !won_it);
        pp.distance_run = std::max(0.0, 3.0 * rally + rng.normal() * 4.0 + 5.0 + (won_it ? 0.0 : 2.0));
      }
      p.rally_length = rally;
      p.ball_speed = (first_in ? 118.0 : 96.0) + 8.0 * rng.normal();

      // Advance the score.
      const bool game_over = st.game_point(victor);
      ++st.pts[victor];
      if (game_over) {
        p.game_victor = victor + 1;
        ++st.games[victor];
        const int g0 = st.games[0], g1 = st.games[1];
        const bool set_over = st.tiebreak || (std::max(g0, g1) >= 6 && std::abs(g0 - g1) >= 2);
        const bool was_tiebreak = st.tiebreak;
        st.pts[0] = st.pts[1] = 0;
        st.tiebreak = false;
        server = was_tiebreak ? 1 - tb_first_server : 1 - server;
        ++game_no;
        if (set_over) {
          p.set_victor = victor + 1;
          ++st.sets[victor];
          st.games[0] = st.games[1] = 0;
          ++set_no;
          game_no = 1;
        } else {
          p.set_victor = 0;
          if (st.games[0] == 6 && st.games[1] == 6) {
            st.tiebreak = true;
            tb_first_server = server;
          }
        }
      } else {
        p.game_victor = 0;
        p.set_victor = 0;
      }
      m.points.push_back(std::move(p));
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace momentum
