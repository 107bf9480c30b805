#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "momentum/error.hpp"
#include "momentum/rng.hpp"
#include "momentum/special.hpp"

namespace momentum {

enum class StreakNext { Extension, Termination };

/// One prefix of a winning run: a run of length L yields records for
/// lengths 1..L, all extensions except the last.
struct StreakRecord {
  int length;
  StreakNext next;
  friend bool operator==(const StreakRecord&, const StreakRecord&) = default;
};

/// Winning-streak prefixes of a single match. The end of the sequence
/// terminates a run (truncation); nothing else does.
inline std::vector<StreakRecord> extract_streaks(std::span<const int> outcomes) {
  std::vector<StreakRecord> out;
  int run = 0;
  for (std::size_t t = 0; t <= outcomes.size(); ++t) {
    const bool win = t < outcomes.size() && outcomes[t] == 1;
    if (win) {
      if (run > 0) out.push_back({run, StreakNext::Extension});
      ++run;
    } else if (run > 0) {
      out.push_back({run, StreakNext::Termination});
      run = 0;
    }
  }
  return out;
}

/// k x 2 table of streak length against extension/termination. Row i-1 holds
/// W_i for i < cap; the last row pools every length >= cap.
struct ContingencyTable {
  int cap = 7;
  std::vector<std::array<long long, 2>> counts;

  std::size_t rows() const { return counts.size(); }
  long long row_total(std::size_t i) const { return counts[i][0] + counts[i][1]; }
  long long col_total(std::size_t j) const {
    long long s = 0;
    for (const auto& r : counts) s += r[j];
    return s;
  }
  long long total() const { return col_total(0) + col_total(1); }

  static ContingencyTable from_counts(std::vector<std::array<long long, 2>> c) {
    ContingencyTable t;
    t.cap = static_cast<int>(c.size());
    t.counts = std::move(c);
    return t;
  }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

inline ContingencyTable build_contingency(std::span<const StreakRecord> records, int cap = 7) {
  if (cap < 2) throw Error(ErrorCode::InvalidArgument, "cap must be >= 2, got " + std::to_string(cap));
  if (records.empty()) throw Error(ErrorCode::EmptyStreaks, "no winning streaks");
  ContingencyTable t;
  t.cap = cap;
  t.counts.assign(static_cast<std::size_t>(cap), {0, 0});
  for (const auto& r : records) {
    const auto row = static_cast<std::size_t>(std::min(r.length, cap) - 1);
    ++t.counts[row][r.next == StreakNext::Extension ? 0 : 1];
  }
  return t;
}

/// Streak table pooled over several matches; streaks never cross matches.
inline ContingencyTable build_contingency(const std::vector<std::vector<int>>& sequences, int cap = 7) {
  std::vector<StreakRecord> all;
  for (const auto& s : sequences) {
    auto r = extract_streaks(s);
    all.insert(all.end(), r.begin(), r.end());
  }
  return build_contingency(all, cap);
}

/// P(Extension | W_i) per row; nullopt where the row has no support.
inline std::vector<std::optional<double>> transition_probs(const ContingencyTable& t) {
  std::vector<std::optional<double>> p;
  p.reserve(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const auto n = t.row_total(i);
    if (n > 0) {
      p.emplace_back(static_cast<double>(t.counts[i][0]) / static_cast<double>(n));
    } else {
      p.emplace_back(std::nullopt);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Independence tests
// ---------------------------------------------------------------------------

enum class TestMethod { PearsonChi2, ExactMonteCarlo, ExactEnumeration };

inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::PearsonChi2: return "pearson_chi2";
    case TestMethod::ExactMonteCarlo: return "exact_mc";
    case TestMethod::ExactEnumeration: return "exact_enum";
  }
  return "?";
}

struct TestResult {
  TestMethod method = TestMethod::PearsonChi2;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool valid = false;  // every expected count >= 5 and n >= 50
  long long replicates = 0;
  double mc_standard_error = 0.0;
};

namespace detail {

/// Rows with zero support carry no information and are dropped before testing.
inline std::vector<std::array<long long, 2>> occupied_rows(const ContingencyTable& t) {
  std::vector<std::array<long long, 2>> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.row_total(i) > 0) rows.push_back(t.counts[i]);
  }
  if (rows.size() < 2) throw Error(ErrorCode::DegenerateMargins, "fewer than two non-empty rows");
  if (t.col_total(0) == 0 || t.col_total(1) == 0) {
    throw Error(ErrorCode::DegenerateMargins, "a column margin is zero");
  }
  return rows;
}

/// log P(table | margins) under the multivariate hypergeometric null, up to
/// the constant -log C(n, n_.1) shared by all tables with these margins.
inline double log_table_weight(std::span<const long long> col1, std::span<const long long> row_totals) {
  double s = 0.0;
  for (std::size_t i = 0; i < col1.size(); ++i) s += special::log_choose(row_totals[i], col1[i]);
  return s;
}

// Relative slack when comparing table probabilities (as in R's fisher.test).
inline constexpr double kProbSlack = 1e-7;

}  // namespace detail

/// Pearson chi-squared test of independence; df = (non-empty rows) - 1.
inline TestResult chi_squared_test(const ContingencyTable& t) {
  const auto rows = detail::occupied_rows(t);
  const double n = static_cast<double>(t.total());
  const std::array<double, 2> col{static_cast<double>(t.col_total(0)),
                                  static_cast<double>(t.col_total(1))};
  TestResult r;
  r.method = TestMethod::PearsonChi2;
  r.valid = n >= 50;
  for (const auto& row : rows) {
    const double ni = static_cast<double>(row[0] + row[1]);
    for (int j = 0; j < 2; ++j) {
      const double expected = ni * col[j] / n;
      if (expected < 5.0) r.valid = false;
      const double d = static_cast<double>(row[j]) - expected;
      r.statistic += d * d / expected;
    }
  }
  r.df = static_cast<int>(rows.size()) - 1;
  r.p_value = special::chi2_sf(r.statistic, r.df);
  return r;
}

/// Number of k x 2 tables sharing the margins of `t`, saturating at `limit + 1`.
inline long long count_tables(const ContingencyTable& t, long long limit) {
  const auto rows = detail::occupied_rows(t);
  // ways[c] = number of ways the rows processed so far can hold c column-1 items.
  const long long c1 = t.col_total(0);
  std::vector<long long> ways(static_cast<std::size_t>(c1 + 1), 0);
  ways[0] = 1;
  for (const auto& row : rows) {
    const long long ni = row[0] + row[1];
    std::vector<long long> next(ways.size(), 0);
    for (long long c = 0; c <= c1; ++c) {
      if (!ways[static_cast<std::size_t>(c)]) continue;
      for (long long a = 0; a <= ni && c + a <= c1; ++a) {
        auto& w = next[static_cast<std::size_t>(c + a)];
        w = std::min(limit + 1, w + ways[static_cast<std::size_t>(c)]);
      }
    }
    ways = std::move(next);
  }
  return ways[static_cast<std::size_t>(c1)];
}

struct ExactTestOptions {
  long long replicates = 100000;
  std::uint64_t seed = 1;
  /// Enumerate every table instead of sampling when at most this many exist
  /// (0 disables enumeration).
  long long enumerate_limit = 0;
};

/// Fisher-Freeman-Halton exact test for a k x 2 table.
///
/// The p-value is the null probability of tables no more probable than the
/// observed one. Sampling draws tables from the multivariate hypergeometric
/// null by allocating the column-1 items row by row; each row's count is a
/// hypergeometric draw from what remains.
inline TestResult exact_test(const ContingencyTable& t, const ExactTestOptions& opt = {}) {
  if (opt.replicates < 1000) {
    throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1000");
  }
  const auto rows = detail::occupied_rows(t);
  const std::size_t k = rows.size();
  std::vector<long long> row_totals(k), observed(k);
  for (std::size_t i = 0; i < k; ++i) {
    row_totals[i] = rows[i][0] + rows[i][1];
    observed[i] = rows[i][0];
  }
  const long long n = t.total();
  const long long c1 = t.col_total(0);
  const double obs = detail::log_table_weight(observed, row_totals);
  const double cutoff = obs + detail::kProbSlack;
  const double log_norm = special::log_choose(n, c1);

  TestResult r;
  r.df = static_cast<int>(k) - 1;
  r.valid = true;
  r.statistic = std::exp(obs - log_norm);  // probability of the observed table

  if (opt.enumerate_limit > 0 && count_tables(t, opt.enumerate_limit) <= opt.enumerate_limit) {
    r.method = TestMethod::ExactEnumeration;
    std::vector<long long> a(k, 0);
    double p = 0.0;
    // Depth-first over column-1 allocations with feasible remainders.
    std::vector<long long> suffix(k + 1, 0);
    for (std::size_t i = k; i-- > 0;) suffix[i] = suffix[i + 1] + row_totals[i];
    auto recurse = [&](auto&& self, std::size_t i, long long left) -> void {
      if (i + 1 == k) {
        a[i] = left;
        const double w = detail::log_table_weight(a, row_totals);
        if (w <= cutoff) p += std::exp(w - log_norm);
        return;
      }
      const long long lo = std::max(0LL, left - suffix[i + 1]);
      const long long hi = std::min(row_totals[i], left);
      for (long long v = lo; v <= hi; ++v) {
        a[i] = v;
        self(self, i + 1, left - v);
      }
    };
    recurse(recurse, 0, c1);
    r.p_value = std::min(1.0, p);
    return r;
  }

  r.method = TestMethod::ExactMonteCarlo;
  r.replicates = opt.replicates;
  std::vector<long long> remaining(k + 1, 0);  // items in rows i..k-1
  for (std::size_t i = k; i-- > 0;) remaining[i] = remaining[i + 1] + row_totals[i];
  Rng rng(opt.seed);
  std::vector<long long> a(k);
  long long hits = 0;
  for (long long rep = 0; rep < opt.replicates; ++rep) {
    long long successes = c1;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      long long items = remaining[i];
      long long got = 0;
      for (long long d = 0; d < row_totals[i] && successes > 0; ++d, --items) {
        if (rng.below(static_cast<std::uint64_t>(items)) < static_cast<std::uint64_t>(successes)) {
          ++got;
          --successes;
        }
      }
      a[i] = got;
    }
    a[k - 1] = successes;
    if (detail::log_table_weight(a, row_totals) <= cutoff) ++hits;
  }
  r.p_value = static_cast<double>(hits) / static_cast<double>(opt.replicates);
  r.mc_standard_error = std::sqrt(r.p_value * (1.0 - r.p_value) / static_cast<double>(opt.replicates));
  return r;
}

// ---------------------------------------------------------------------------
// Conditional win probabilities after winning / losing runs
// ---------------------------------------------------------------------------

struct ConditionalEntry {
  int length = 0;  // the last entry pools lengths >= cap
  long long support = 0;
  long long next_wins = 0;
  std::optional<double> probability;  // nullopt when support == 0
};

struct ConditionalProbTable {
  int cap = 7;
  std::vector<ConditionalEntry> after_wins;    // P(W_next | W_k)
  std::vector<ConditionalEntry> after_losses;  // P(W_next | L_k)
};

/// Probability that the point following a current run of exactly k wins
/// (or losses) is a win. Lookups never cross sequence boundaries.
inline ConditionalProbTable conditional_win_probs(const std::vector<std::vector<int>>& sequences,
                                                  int cap = 7) {
  if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "no sequences");
  if (cap < 2) throw Error(ErrorCode::InvalidArgument, "cap must be >= 2");
  ConditionalProbTable tab;
  tab.cap = cap;
  for (auto* side : {&tab.after_wins, &tab.after_losses}) {
    side->resize(static_cast<std::size_t>(cap));
    for (int i = 0; i < cap; ++i) (*side)[static_cast<std::size_t>(i)].length = i + 1;
  }
  for (const auto& seq : sequences) {
    int run = 0;  // signed: >0 wins, <0 losses
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const bool win = seq[t] == 1;
      run = win ? (run > 0 ? run + 1 : 1) : (run < 0 ? run - 1 : -1);
      if (t + 1 == seq.size()) break;
      auto& side = run > 0 ? tab.after_wins : tab.after_losses;
      const auto bucket = static_cast<std::size_t>(std::min(std::abs(run), cap) - 1);
      ++side[bucket].support;
      if (seq[t + 1] == 1) ++side[bucket].next_wins;
    }
  }
  for (auto* side : {&tab.after_wins, &tab.after_losses}) {
    for (auto& e : *side) {
      if (e.support > 0) e.probability = static_cast<double>(e.next_wins) / static_cast<double>(e.support);
    }
  }
  return tab;
}

/// Plain-text rendering in the usual streak x subsequent-point layout.
inline std::string format_table(const ContingencyTable& t) {
  std::ostringstream s;
  s << std::left << std::setw(8) << "Streak" << std::right << std::setw(12) << "Extension"
    << std::setw(13) << "Termination" << std::setw(10) << "n_i." << '\n';
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::string label = "W_" + std::to_string(i + 1);
    if (static_cast<int>(i + 1) == t.cap) label += "+";
    s << std::left << std::setw(8) << label << std::right << std::setw(12) << t.counts[i][0]
      << std::setw(13) << t.counts[i][1] << std::setw(10) << t.row_total(i) << '\n';
  }
  s << std::left << std::setw(8) << "n_.j" << std::right << std::setw(12) << t.col_total(0)
    << std::setw(13) << t.col_total(1) << std::setw(10) << t.total() << '\n';
  return s.str();
}

}  // namespace momentum
