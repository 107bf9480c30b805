#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "momentum/io.hpp"
#include "momentum/momentum.hpp"

namespace fs = std::filesystem;
using namespace momentum;
using io::json;

namespace {

struct RunConfig {
  std::string input;
  std::string match_id;
  std::string out = "out";
  std::uint64_t seed = 1;
  int cap = 7;
  std::optional<double> drift;
  std::optional<double> threshold;
  std::optional<int> target;
  bool pooled_weights = false;
  long long replicates = 0;
  std::string scenario = "all";
  std::string split = "stratified";
  double train_ratio = 0.8;
  int seeds = 5;
  std::vector<int> hidden{8};
  int epochs = 500;
  double learning_rate = 0.05;
  int swarm = 30;
  int pso_iterations = 100;
  int background = 100;
  int explain_rows = 100;
  std::string model;
  double p = 0.5;
  double beta = 0.0;
  int length = 200;
  int matches = 31;
  bool full = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collects artifacts so every write goes through one place.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& content) {
    io::write_atomic(dir_ / name, content);
    written_.push_back(name);
  }
  void doc(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

const char* kPlotScript = R"(#!/usr/bin/env python3
# Plots every plot-data CSV in this directory.
import glob
import os

import matplotlib.pyplot as plt
import pandas as pd

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    df = pd.read_csv(path)
    x = df.columns[0]
    ys = [c for c in df.columns[1:] if pd.api.types.is_numeric_dtype(df[c])]
    if not ys:
        continue
    ax = df.plot(x=x, y=ys, figsize=(10, 4))
    ax.set_title(os.path.basename(path))
    plt.tight_layout()
    plt.savefig(path[:-4] + ".png")
    plt.close()
)";

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

std::vector<MatchData> load(const RunConfig& c) {
  if (c.input.empty()) throw UsageError("--input is required");
  std::ifstream in(c.input, std::ios::binary);
  if (!in) throw Error(ErrorCode::EmptyInput, "cannot open " + c.input);
  auto matches = parse_csv(in);
  if (c.match_id.empty()) return matches;
  for (auto& m : matches) {
    if (m.match_id == c.match_id) return {std::move(m)};
  }
  throw Error(ErrorCode::InvalidArgument, "match '" + c.match_id + "' not in " + c.input);
}

std::vector<FeatureFrame> frames_of(const std::vector<MatchData>& matches) {
  std::vector<FeatureFrame> out;
  for (const auto& m : matches) out.push_back(derive_features(m));
  return out;
}

MomentumOptions momentum_options(const RunConfig& c) {
  MomentumOptions o;
  o.pooled_weights = c.pooled_weights;
  o.target = c.target;
  o.drift = c.drift;
  o.threshold = c.threshold;
  return o;
}

ScenarioOptions scenario_options(const RunConfig& c) {
  ScenarioOptions o;
  o.train_ratio = c.train_ratio;
  o.chronological = c.split == "chronological";
  o.seeds.clear();
  for (int s = 0; s < c.seeds; ++s) o.seeds.push_back(c.seed + static_cast<std::uint64_t>(s));
  o.net.hidden = c.hidden;
  o.pso.swarm = c.swarm;
  o.pso.iterations = c.pso_iterations;
  o.bp.epochs = c.epochs;
  o.bp.learning_rate = c.learning_rate;
  return o;
}

std::vector<ScenarioSpec> scenarios_of(const RunConfig& c) {
  if (c.scenario == "all") return standard_scenarios();
  return {find_scenario(c.scenario)};
}

DataTable model_table(const RunConfig& c) {
  const auto frames = frames_of(load(c));
  return build_model_table(frames, analyze_matches(frames, momentum_options(c)));
}

std::vector<int> labels_at(const DataTable& d, const std::vector<Eigen::Index>& rows) {
  std::vector<int> y;
  for (auto i : rows) y.push_back(d.labels[static_cast<std::size_t>(i)]);
  return y;
}

std::string momentum_csv(const MatchMomentum& m) {
  std::ostringstream s;
  s << "t,M\n";
  for (std::size_t t = 0; t < m.momentum.values.size(); ++t) s << t + 1 << ',' << io::fmt(m.momentum.values[t]) << '\n';
  return s.str();
}

std::string cusum_csv(const MatchMomentum& m) {
  std::ostringstream s;
  s << "t,c_pos,c_neg,CP\n";
  const auto& tr = m.cusum.trace;
  for (std::size_t t = 0; t < tr.c_pos.size(); ++t) {
    s << t + 1 << ',' << io::fmt(tr.c_pos[t]) << ',' << io::fmt(tr.c_neg[t]) << ','
      << m.cusum.changepoints.labels[t] << '\n';
  }
  return s.str();
}

std::string shift_csv(const MatchMomentum& m) {
  std::ostringstream s;
  s << "t,V\n";
  for (std::size_t t = 0; t < m.shift.values.size(); ++t) s << t + 1 << ',' << io::fmt(m.shift.values[t]) << '\n';
  return s.str();
}

json changepoint_doc(const MatchMomentum& m) {
  json j{{"match_id", m.match_id},
         {"mu", m.cusum.mu},
         {"drift", m.params.drift},
         {"threshold", m.params.threshold},
         {"changepoints", io::to_json(m.cusum.changepoints)}};
  if (m.tuning) {
    j["tuning"] = {{"iterations", m.tuning->iterations}, {"converged", m.tuning->converged}};
  }
  return j;
}

json header(const std::string& kind) { return {{"schema_version", io::kSchemaVersion}, {"kind", kind}}; }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

json cmd_ingest(const RunConfig& c, Artifacts& out) {
  const auto matches = load(c);
  json doc = header("ingest");
  doc["matches"] = json::array();
  long long points = 0;
  for (const auto& m : matches) {
    const auto f = derive_features(m);
    std::ostringstream s;
    write_feature_csv(s, f);
    out.text("features_" + safe_name(m.match_id) + ".csv", s.str());
    doc["matches"].push_back({{"match_id", m.match_id}, {"points", f.size()}, {"imputed_cells", f.imputed.size()}});
    points += f.size();
  }
  out.doc("ingest.json", doc);
  return {{"matches", matches.size()}, {"points", points}};
}

json cmd_test_momentum(const RunConfig& c, Artifacts& out) {
  const auto seqs = outcome_sequences(load(c));
  const auto table = build_contingency(seqs, c.cap);
  const auto chi = chi_squared_test(table);
  json doc = header("test_momentum");
  doc["table"] = io::to_json(table);
  doc["transition_probs"] = json::array();
  for (const auto& p : transition_probs(table)) doc["transition_probs"].push_back(p ? json(*p) : json(nullptr));
  doc["chi_squared"] = io::to_json(chi);
  json summary{{"chi2", chi.statistic}, {"df", chi.df}, {"p_value", chi.p_value}};
  if (c.replicates > 0) {
    const auto ex = exact_test(table, {.replicates = c.replicates, .seed = c.seed});
    doc["exact"] = io::to_json(ex);
    summary["exact_p_value"] = ex.p_value;
  }
  doc["conditional"] = io::to_json(conditional_win_probs(seqs, c.cap));
  out.doc("test_momentum.json", doc);
  out.text("contingency.txt", format_table(table));
  return summary;
}

json cmd_select_features(const RunConfig& c, Artifacts& out) {
  const auto pooled = concat(frames_of(load(c)));
  std::vector<int> ids;
  for (int j = 1; j <= kFeatureCount; ++j) ids.push_back(j);
  const auto tr = stepwise_select(pooled, ids);
  json doc = header("feature_selection");
  doc["trace"] = io::to_json(tr);
  out.doc("selection.json", doc);
  return {{"selected", doc["trace"]["selected"]}, {"auc", tr.auc}};
}

json cmd_momentum(const RunConfig& c, Artifacts& out, bool cps, bool shift) {
  const auto frames = frames_of(load(c));
  const auto mm = analyze_matches(frames, momentum_options(c));
  json doc = header(shift ? "shift" : cps ? "changepoints" : "momentum");
  doc["matches"] = json::array();
  std::size_t total_cp = 0;
  for (const auto& m : mm) {
    const auto name = safe_name(m.match_id);
    json entry{{"match_id", m.match_id}, {"points", m.momentum.values.size()}};
    if (!cps && !shift) {
      entry["weights"] = io::to_json(m.momentum.weights);
      out.text("momentum_" + name + ".csv", momentum_csv(m));
    } else if (!shift) {
      entry = changepoint_doc(m);
      out.text("cusum_" + name + ".csv", cusum_csv(m));
    } else {
      entry["d_max"] = m.shift.d_max;
      entry["anchor_times"] = m.shift.anchor_times;
      entry["anchor_values"] = m.shift.anchor_values;
      out.text("shift_" + name + ".csv", shift_csv(m));
    }
    total_cp += m.cusum.changepoints.size();
    doc["matches"].push_back(entry);
  }
  const std::string file = shift ? "shift.json" : cps ? "changepoints.json" : "momentum.json";
  out.doc(file, doc);
  json summary{{"matches", mm.size()}};
  if (cps || shift) summary["changepoints"] = total_cp;
  return summary;
}

TrainedNet train_on_split(const RunConfig& c, const DataTable& d, const ScenarioSpec& spec, const Split& split) {
  const auto opt = scenario_options(c);
  PsoConfig pso = opt.pso;
  pso.seed = c.seed;
  auto net = train_bp_pso(detail::take_rows(d.select(spec.columns), split.train), labels_at(d, split.train), opt.net,
                          pso, opt.bp);
  net.features = spec.columns;
  return net;
}

ScenarioSpec single_scenario(const RunConfig& c) {
  return c.scenario == "all" ? standard_scenarios().back() : find_scenario(c.scenario);
}

json cmd_train(const RunConfig& c, Artifacts& out) {
  const auto d = model_table(c);
  const auto spec = single_scenario(c);
  const auto split = make_split(d.labels, scenario_options(c), c.seed);
  const auto net = train_on_split(c, d, spec, split);
  const Eigen::VectorXd s = net.predict(detail::take_rows(d.select(spec.columns), split.test));
  const auto m = classification_metrics(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                                        labels_at(d, split.test));
  out.doc("model.json", io::to_json(net));
  json doc = header("training");
  doc["scenario"] = spec.id;
  doc["train_rows"] = split.train.size();
  doc["test_rows"] = split.test.size();
  doc["test_metrics"] = io::to_json(m);
  out.doc("training.json", doc);
  return {{"scenario", spec.id}, {"final_loss", net.history.final_loss}, {"test_auc", m.auc}};
}

json cmd_evaluate(const RunConfig& c, Artifacts& out) {
  const auto d = model_table(c);
  const auto rows = scenario_matrix(d, scenarios_of(c), scenario_options(c));
  json doc = header("evaluation");
  doc["scenarios"] = json::array();
  json aucs = json::object();
  for (const auto& r : rows) {
    doc["scenarios"].push_back(io::to_json(r));
    aucs[r.spec.id] = r.mean.auc;
    std::ostringstream s;
    s << "fpr,tpr,seed\n";
    for (const auto& run : r.runs) {
      for (const auto& p : run.roc.curve) s << io::fmt(p.fpr) << ',' << io::fmt(p.tpr) << ',' << run.seed << '\n';
    }
    out.text("roc_" + safe_name(r.spec.id) + ".csv", s.str());
  }
  out.doc("evaluation.json", doc);
  return {{"mean_auc", aucs}};
}

json cmd_shap(const RunConfig& c, Artifacts& out) {
  const auto d = model_table(c);
  const auto split = make_split(d.labels, scenario_options(c), c.seed);
  TrainedNet net;
  if (!c.model.empty()) {
    net = io::trained_net_from_json(json::parse(io::read_file(c.model)));
  } else {
    net = train_on_split(c, d, single_scenario(c), split);
  }
  const Eigen::MatrixXd X = d.select(net.features);
  const auto bg = sample_background(detail::take_rows(X, split.train), {c.background, c.seed});
  std::vector<Eigen::Index> rows = split.test;
  if (c.explain_rows > 0 && rows.size() > static_cast<std::size_t>(c.explain_rows)) {
    rows.resize(static_cast<std::size_t>(c.explain_rows));
  }
  const BatchPredictor f = [&net](const Eigen::MatrixXd& B) { return net.predict(B); };
  const auto rep = explain_rows(f, detail::take_rows(X, rows), bg, net.features);
  const auto rank = mean_abs_shap(rep);

  std::ostringstream s;
  s << "row";
  for (const auto& name : rep.features) s << ",phi_" << name;
  s << ",prediction\n";
  for (Eigen::Index i = 0; i < rep.phi.rows(); ++i) {
    s << rows[static_cast<std::size_t>(i)] + 1;
    for (Eigen::Index j = 0; j < rep.phi.cols(); ++j) s << ',' << io::fmt(rep.phi(i, j));
    s << ',' << io::fmt(rep.predictions[static_cast<std::size_t>(i)]) << '\n';
  }
  out.text("shap_values.csv", s.str());
  json doc = header("shap");
  doc["base"] = rep.base;
  doc["instances"] = rep.phi.rows();
  doc["background_rows"] = bg.rows();
  doc["ranking"] = io::to_json(rank);
  out.doc("shap.json", doc);
  json order = json::array();
  for (const auto& r : rank) order.push_back(r.feature);
  return {{"ranking", order}};
}

json cmd_synth(const RunConfig& c, Artifacts& out) {
  std::ostringstream s;
  if (c.full) {
    write_points_csv(s, simulate_matches({.matches = c.matches, .seed = c.seed}));
  } else {
    GeneratorConfig g{.p = c.p, .boost = {}, .length = c.length, .matches = c.matches, .seed = c.seed};
    if (c.beta != 0.0) g.boost = step_boost(c.beta, 0.0);
    write_sequences_csv(s, gen_momentum(g));
  }
  out.text("synth.csv", s.str());
  return {{"matches", c.matches}, {"path", (fs::path(c.out) / "synth.csv").string()}};
}

json cmd_report(const RunConfig& c, Artifacts& out) {
  auto matches = load(c);
  matches.resize(1);
  const auto frames = frames_of(matches);
  const auto m = analyze_matches(frames, momentum_options(c)).front();
  const auto name = safe_name(m.match_id);
  json doc = header("report");
  doc["match_id"] = m.match_id;
  doc["points"] = m.momentum.values.size();
  try {
    const auto table = build_contingency(outcome_sequences(matches), c.cap);
    doc["streak_table"] = io::to_json(table);
    doc["chi_squared"] = io::to_json(chi_squared_test(table));
  } catch (const Error& e) {
    doc["chi_squared"] = {{"error", e.what()}};
  }
  doc["weights"] = io::to_json(m.momentum.weights);
  doc["changepoints"] = changepoint_doc(m);
  doc["shift"] = {{"d_max", m.shift.d_max}, {"anchor_times", m.shift.anchor_times},
                  {"anchor_values", m.shift.anchor_values}};
  out.text("momentum_" + name + ".csv", momentum_csv(m));
  out.text("cusum_" + name + ".csv", cusum_csv(m));
  out.text("shift_" + name + ".csv", shift_csv(m));
  out.doc("report.json", doc);
  return {{"match_id", m.match_id}, {"changepoints", m.cusum.changepoints.size()}};
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Momentum analysis for point-by-point tennis data"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--input", c.input, "point-by-point CSV");
  app.add_option("--match-id", c.match_id, "restrict to one match (empty = all)");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--cap", c.cap, "streak length pooled into the last table row")->check(CLI::Range(2, 1000));
  app.add_option("--drift", c.drift, "CUSUM drift d (default 0.05 * stdev of M)");
  app.add_option("--threshold", c.threshold, "fixed CUSUM threshold h (disables tuning)");
  app.add_option("--target-changepoints", c.target, "change points per match (default round(T * 40 / 325))");
  app.add_flag("--pooled-weights", c.pooled_weights, "one entropy weight vector across matches");
  app.add_option("--replicates", c.replicates, "Monte-Carlo exact test replicates (0 = skip)")->check(CLI::NonNegativeNumber);
  app.add_option("--scenario", c.scenario, "Base, Base+M, Base+M+CP, Base+M+CP+V or all");
  app.add_option("--split", c.split, "train/test split")->check(CLI::IsMember({"stratified", "chronological"}));
  app.add_option("--train-ratio", c.train_ratio, "training fraction")->check(CLI::Range(0.05, 0.95));
  app.add_option("--seeds", c.seeds, "evaluation seeds (seed, seed+1, ...)")->check(CLI::PositiveNumber);
  app.add_option("--hidden", c.hidden, "hidden layer widths")->delimiter(',');
  app.add_option("--epochs", c.epochs, "gradient-descent epochs after PSO")->check(CLI::NonNegativeNumber);
  app.add_option("--learning-rate", c.learning_rate, "gradient-descent step size")->check(CLI::PositiveNumber);
  app.add_option("--swarm", c.swarm, "PSO particles")->check(CLI::Range(2, 100000));
  app.add_option("--pso-iterations", c.pso_iterations, "PSO iterations")->check(CLI::NonNegativeNumber);
  app.add_option("--background", c.background, "SHAP background rows")->check(CLI::PositiveNumber);
  app.add_option("--explain-rows", c.explain_rows, "test rows explained by shap (0 = all)")->check(CLI::NonNegativeNumber);
  app.add_option("--model", c.model, "trained network JSON for shap");
  app.add_option("--p", c.p, "synth: base win probability")->check(CLI::Range(0.0, 1.0));
  app.add_option("--beta", c.beta, "synth: win-probability boost after a won point")->check(CLI::Range(-1.0, 1.0));
  app.add_option("--length", c.length, "synth: points per match")->check(CLI::PositiveNumber);
  app.add_option("--matches", c.matches, "synth: number of matches")->check(CLI::PositiveNumber);
  app.add_flag("--full", c.full, "synth: full-schema simulated matches");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"ingest", "parse the CSV and write engineered features"},
      {"test-momentum", "streak contingency table and independence tests"},
      {"select-features", "stepwise AUC feature selection"},
      {"momentum", "entropy weights and the momentum series"},
      {"changepoints", "CUSUM change points"},
      {"shift", "relative-distance shift intensity"},
      {"train", "train the BP+PSO network for one scenario"},
      {"evaluate", "scenario comparison over seeds"},
      {"shap", "exact Shapley feature attribution"},
      {"synth", "generate synthetic point sequences"},
      {"report", "full pipeline for one match"}};
  for (const auto& [name, desc] : commands) app.add_subcommand(name, desc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    Artifacts out(c.out);
    json summary;
    if (cmd == "ingest") summary = cmd_ingest(c, out);
    else if (cmd == "test-momentum") summary = cmd_test_momentum(c, out);
    else if (cmd == "select-features") summary = cmd_select_features(c, out);
    else if (cmd == "momentum") summary = cmd_momentum(c, out, false, false);
    else if (cmd == "changepoints") summary = cmd_momentum(c, out, true, false);
    else if (cmd == "shift") summary = cmd_momentum(c, out, false, true);
    else if (cmd == "train") summary = cmd_train(c, out);
    else if (cmd == "evaluate") summary = cmd_evaluate(c, out);
    else if (cmd == "shap") summary = cmd_shap(c, out);
    else if (cmd == "synth") summary = cmd_synth(c, out);
    else summary = cmd_report(c, out);
    if (std::any_of(out.written().begin(), out.written().end(),
                    [](const std::string& f) { return f.ends_with(".csv") && f != "synth.csv"; })) {
      out.text("plot.py", kPlotScript);
    }
    json line{{"command", cmd}, {"status", "ok"}};
    line.update(summary);
    line["artifacts"] = out.written();
    std::cout << line.dump() << '\n';
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InvalidArgument: " << e.what() << '\n';
    return 1;
  }
}
