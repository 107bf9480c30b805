#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "momentum/changepoint.hpp"
#include "momentum/error.hpp"
#include "momentum/ewm.hpp"
#include "momentum/explain.hpp"
#include "momentum/model.hpp"
#include "momentum/shift.hpp"
#include "momentum/stats.hpp"
#include "momentum/streaks.hpp"
#include "momentum/synth.hpp"

namespace momentum::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json to_json(const ContingencyTable& t) {
  json rows = json::array();
  for (const auto& r : t.counts) rows.push_back({r[0], r[1]});
  return {{"cap", t.cap}, {"counts", rows}, {"total", t.total()}};
}

inline json to_json(const TestResult& r) {
  json j{{"method", to_string(r.method)}, {"statistic", r.statistic}, {"df", r.df}, {"p_value", r.p_value},
         {"valid", r.valid}};
  if (r.replicates > 0) {
    j["replicates"] = r.replicates;
    j["mc_standard_error"] = r.mc_standard_error;
  }
  return j;
}

inline json to_json(const ConditionalProbTable& t) {
  auto side = [](const std::vector<ConditionalEntry>& es) {
    json a = json::array();
    for (const auto& e : es) {
      a.push_back({{"length", e.length},
                   {"support", e.support},
                   {"next_wins", e.next_wins},
                   {"probability", e.probability ? json(*e.probability) : json(nullptr)}});
    }
    return a;
  };
  return {{"cap", t.cap}, {"after_wins", side(t.after_wins)}, {"after_losses", side(t.after_losses)}};
}

inline json to_json(const WeightVector& w) {
  json cols = json::array();
  for (int id : w.column_ids) cols.push_back(feature_name(id));
  return {{"columns", cols}, {"weights", w.weights}, {"entropies", w.entropies}, {"epsilon", w.epsilon}};
}

inline json to_json(const ChangePointSet& s) {
  return {{"count", s.size()}, {"positive", s.positives()}, {"negative", s.negatives()},
          {"times", s.times},  {"signs", s.signs},          {"durations", s.durations}};
}

inline json to_json(const MetricsReport& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"auc", m.auc},
          {"threshold", m.threshold}, {"tp", m.tp},         {"fp", m.fp}, {"tn", m.tn},
          {"fn", m.fn}};
}

inline json to_json(const SelectionTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json names = json::array();
    for (int id : s.features) names.push_back(feature_name(id));
    steps.push_back({{"action", s.action == StepAction::Added ? "added" : "removed"},
                     {"feature", feature_name(s.feature)},
                     {"features", names},
                     {"auc", s.auc}});
  }
  json sel = json::array();
  for (int id : t.selected) sel.push_back(feature_name(id));
  return {{"steps", steps}, {"selected", sel}, {"auc", t.auc}};
}

inline json to_json(const CalibrationResult& r) {
  return {{"datasets", r.datasets}, {"rejections", r.rejections}, {"rate", r.rate},
          {"standard_error", r.standard_error}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}};
}

inline json to_json(const std::vector<FeatureImportance>& ranking) {
  json a = json::array();
  for (const auto& f : ranking) a.push_back({{"feature", f.feature}, {"mean_abs_shap", f.mean_abs}, {"rank", f.rank}});
  return a;
}

inline json to_json(const ScenarioRow& row) {
  json aucs = json::array();
  for (const auto& r : row.runs) aucs.push_back({{"seed", r.seed}, {"auc", r.metrics.auc}});
  return {{"scenario", row.spec.id}, {"columns", row.spec.columns}, {"mean", to_json(row.mean)}, {"per_seed", aucs}};
}

// ---------------------------------------------------------------------------
// TrainedNet documents
// ---------------------------------------------------------------------------

inline json to_json(const TrainedNet& n) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "trained_net"},
          {"config",
           {{"input_dim", n.config.input_dim},
            {"hidden", n.config.hidden},
            {"hidden_activation", "tanh"},
            {"output_activation", "sigmoid"}}},
          {"features", n.features},
          {"seed", n.seed},
          {"params", n.params},
          {"scaler", {{"min", n.scaler.min}, {"max", n.scaler.max}, {"clip", {n.scaler.clip_lo, n.scaler.clip_hi}}}},
          {"history",
           {{"pso_best", n.history.pso_best},
            {"epoch_loss", n.history.epoch_loss},
            {"final_loss", n.history.final_loss}}}};
}

inline TrainedNet trained_net_from_json(const json& j) {
  try {
    if (j.at("kind").get<std::string>() != "trained_net") {
      throw Error(ErrorCode::InvalidArgument, "document is not a trained network");
    }
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::InvalidArgument, "unsupported schema_version " + std::to_string(version));
    }
    TrainedNet n;
    n.config.input_dim = j.at("config").at("input_dim").get<int>();
    n.config.hidden = j.at("config").at("hidden").get<std::vector<int>>();
    n.config.validate();
    n.features = j.at("features").get<std::vector<std::string>>();
    n.seed = j.at("seed").get<std::uint64_t>();
    n.params = j.at("params").get<std::vector<double>>();
    n.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
    n.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
    n.scaler.clip_lo = j.at("scaler").at("clip").at(0).get<double>();
    n.scaler.clip_hi = j.at("scaler").at("clip").at(1).get<double>();
    n.history.pso_best = j.at("history").at("pso_best").get<std::vector<double>>();
    n.history.epoch_loss = j.at("history").at("epoch_loss").get<std::vector<double>>();
    n.history.final_loss = j.at("history").at("final_loss").get<double>();
    if (static_cast<Eigen::Index>(n.params.size()) != n.config.param_count() ||
        n.scaler.size() != static_cast<std::size_t>(n.config.input_dim)) {
      throw Error(ErrorCode::DimMismatch, "parameter or scaler size does not match the config");
    }
    return n;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed network document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Round-trip text for a double (17 significant digits).
inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::EmptyInput, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace momentum::io
