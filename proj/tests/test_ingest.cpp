#include <gtest/gtest.h>

#include <sstream>

#include "momentum/ingest.hpp"
#include "momentum/synth.hpp"

using namespace momentum;

namespace {

const char* kHeader =
    "match_id,set_no,game_no,point_no,p1_games,p2_games,p1_score,p2_score,server,serve_no,point_victor,"
    "p1_points_won,p2_points_won,game_victor,set_victor,p1_ace,p2_ace,p1_winner,p2_winner,"
    "p1_double_fault,p2_double_fault,p1_unf_err,p2_unf_err,p1_net_pt,p2_net_pt,p1_net_pt_won,"
    "p2_net_pt_won,p1_break_pt,p2_break_pt,p1_break_pt_won,p2_break_pt_won,p1_distance_run,"
    "p2_distance_run,speed_mph,rally_count\n";

// Four points of one game: 15-0, 15-15, 30-15 (net point won, winner), game.
std::string small_match() {
  std::string s = kHeader;
  s += "m1,1,1,1,0,0,0,0,1,1,1,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,5.5,6.0,120,1\n";
  s += "m1,1,1,2,0,0,15,0,1,2,2,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,10.0,9.0,95,4\n";
  s += "m1,1,1,3,0,0,15,15,1,1,1,1,1,0,0,0,0,1,0,0,0,0,0,1,0,1,0,0,0,0,0,,12.0,,6\n";
  s += "m1,1,1,4,0,0,40,AD,1,1,1,2,1,1,1,0,0,0,0,0,0,0,0,0,0,0,0,0,1,0,0,8.0,4.0,130,2\n";
  return s;
}

std::vector<MatchData> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ParseCsv, ReadsRecordsAndAliases) {
  const auto ms = parse(small_match());
  ASSERT_EQ(ms.size(), 1u);
  const auto& p = ms[0].points;
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[1].point_victor, 2);
  EXPECT_EQ(*p[0].ball_speed, 120.0);
  EXPECT_EQ(*p[1].rally_length, 4);
  EXPECT_FALSE(p[2].ball_speed.has_value());
  EXPECT_FALSE(p[2].p1.distance_run.has_value());
  EXPECT_EQ(p[3].p2.score->ordinal, 4);
  EXPECT_EQ(to_token(*p[3].p2.score), "AD");
  EXPECT_EQ(p[3].p1.score->ordinal, 3);
}

TEST(ParseCsv, Errors) {
  EXPECT_EQ(code_of([] { parse(""); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { parse(std::string(kHeader)); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { parse("match_id,point_no\nm,1\n"); }), ErrorCode::MissingColumn);
  EXPECT_EQ(code_of([] { parse("match_id,point_no,point_victor\nm,1,3\n"); }), ErrorCode::BadToken);
  EXPECT_EQ(code_of([] { parse("match_id,point_no,point_victor\nm,2,1\nm,1,1\n"); }), ErrorCode::BadToken);
  std::string bad_score = small_match();
  bad_score.replace(bad_score.find(",15,15,"), 7, ",15,17,");
  EXPECT_EQ(code_of([&] { parse(bad_score); }), ErrorCode::BadToken);
}

TEST(ParseCsv, BadTokenMessageNamesRowColumnValue) {
  try {
    parse("match_id,point_no,point_victor\nm,1,3\n");
    FAIL();
  } catch (const Error& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("row 2"), std::string::npos);
    EXPECT_NE(w.find("point_victor"), std::string::npos);
    EXPECT_NE(w.find("'3'"), std::string::npos);
  }
}

TEST(ParseCsv, MinimalSchemaAndMultipleMatches) {
  const auto ms = parse("match_id,point_no,point_victor\na,1,1\nb,1,2\na,2,2\n");
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].match_id, "a");
  EXPECT_EQ(ms[0].points.size(), 2u);
  EXPECT_EQ(ms[1].points[0].point_victor, 2);
}

TEST(ParseCsv, QuotedFieldsAndNA) {
  const auto ms = parse("match_id,point_no,point_victor,serve_width\n\"x,1\",1,1,NA\n\"x,1\",2,1,\"B\"\n");
  EXPECT_EQ(ms[0].match_id, "x,1");
  EXPECT_FALSE(ms[0].points[0].serve_direction.has_value());
  EXPECT_EQ(*ms[0].points[1].serve_direction, "B");
}

TEST(DeriveFeatures, DefinitionsOnSmallMatch) {
  const auto f = derive_features(parse(small_match())[0]);
  ASSERT_EQ(f.size(), 4);
  // Point 3: score 15-15, Player 1 serving first serve, hits a winner, wins a net point.
  EXPECT_EQ(f.column(2)(2), 0.0);
  EXPECT_EQ(f.column(3)(2), 1.0);
  EXPECT_EQ(f.column(4)(2), 1.0);
  EXPECT_EQ(f.column(7)(2), 1.0);
  EXPECT_EQ(f.column(10)(2), 1.0);
  // First point: no net approaches yet -> 0/0 := 0.
  EXPECT_EQ(f.column(10)(0), 0.0);
  // Point 4: 40-AD -> x2 = 3 - 4, x4 = 0.
  EXPECT_EQ(f.column(2)(3), -1.0);
  EXPECT_EQ(f.column(4)(3), 0.0);
  // Point 2: second serve.
  EXPECT_EQ(f.column(3)(1), 0.0);
  EXPECT_EQ(f.column(9)(1), 1.0);
  EXPECT_EQ(f.column(16)(1), 95.0 * 2);
  EXPECT_EQ(f.column(6)(0), 1.0);
  // Missing speed/distance at point 3 imputed with medians.
  EXPECT_EQ(f.column(15)(2), 120.0);
  EXPECT_EQ(f.column(14)(2), 8.0);
  EXPECT_EQ(f.column(12)(3), 5.5 + 10.0 + 8.0 + 8.0);
  EXPECT_EQ(f.column(13)(3), 10.0 + 8.0 + 8.0);
  EXPECT_EQ(f.imputed.size(), 5u);
  EXPECT_EQ(f.outcome, (std::vector<int>{1, 0, 1, 1}));
  // Break point ratio: Player 1 never had one.
  EXPECT_EQ(f.column(11)(3), 0.0);
}

TEST(DeriveFeatures, SetDifferenceAfterSetVictor) {
  const auto ms = simulate_matches({.matches = 1, .seed = 5});
  const auto f = derive_features(ms[0]);
  int sets1 = 0, sets2 = 0;
  for (std::size_t t = 0; t < ms[0].points.size(); ++t) {
    EXPECT_EQ(f.column(5)(static_cast<Eigen::Index>(t)), sets1 - sets2);
    if (*ms[0].points[t].set_victor == 1) ++sets1;
    if (*ms[0].points[t].set_victor == 2) ++sets2;
  }
}

TEST(DeriveFeatures, MissingRequired) {
  EXPECT_EQ(code_of([] { derive_features(parse("match_id,point_no,point_victor\na,1,1\n")[0]); }),
            ErrorCode::MissingRequired);
}

TEST(Standardize, OrientationAndConstantColumns) {
  FeatureFrame f;
  f.features.setZero(3, kFeatureCount);
  f.features.col(0) << 2, 4, 6;
  f.features.col(8) << 2, 4, 6;
  f.features.col(2) << 5, 5, 5;
  for (int j = 1; j <= kFeatureCount; ++j) f.orientation[j - 1] = default_orientation(j);
  const auto s = standardize(f, {1, 9, 3});
  EXPECT_EQ(s.z.col(0), Eigen::Vector3d(0, 0.5, 1));
  EXPECT_EQ(s.z.col(1), Eigen::Vector3d(1, 0.5, 0));
  EXPECT_EQ(s.z.col(2), Eigen::Vector3d(0, 0, 0));
  EXPECT_EQ(s.min[0], 2.0);
  EXPECT_EQ(s.max[0], 6.0);
  EXPECT_EQ(code_of([&] { standardize(f, {17}); }), ErrorCode::UnknownColumn);
}

TEST(Standardize, NegativeIsComplementOfPositive) {
  const Eigen::VectorXd x = Eigen::VectorXd::Random(50);
  const auto p = standardize_column(x, Orientation::Positive);
  const auto n = standardize_column(x, Orientation::Negative);
  EXPECT_LT((p + n - Eigen::VectorXd::Ones(50)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 1.0);
  // Idempotent on a column already spanning [0, 1].
  EXPECT_LT((standardize_column(p, Orientation::Positive) - p).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RoundTrip, WriteThenParseGivesIdenticalFeatures) {
  const auto ms = simulate_matches({.matches = 2, .seed = 11});
  std::ostringstream out;
  write_points_csv(out, ms);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto a = derive_features(ms[i]);
    const auto b = derive_features(back[i]);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.outcome, b.outcome);
  }
}

TEST(FeatureCsv, HeaderAndRows) {
  const auto f = derive_features(parse(small_match())[0]);
  std::ostringstream out;
  write_feature_csv(out, f);
  const auto s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,x11,x12,x13,x14,x15,x16,outcome");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
