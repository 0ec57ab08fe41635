// Tests for monthly indicator-panel assembly: per-column semantics against a
// fully hand-computed three-month corpus, demographic weighting modes,
// missing-data behaviour, CSV round-trips and schema validation.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "forumcast/indicators.hpp"

using namespace forumcast;
using indicators::CityExternals;
using indicators::IndicatorPanel;
using indicators::PanelConfig;
using ingest::ForumPost;
using ingest::ProfileMap;
using ingest::UserProfile;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

ForumPost make_post(const std::string& id, const std::string& thread,
                    const std::string& author, const std::string& instant,
                    bool is_root, const std::string& body,
                    const std::string& city = "rome") {
  ForumPost p;
  p.post_id = id;
  p.thread_id = thread;
  p.city = city;
  p.author_id = author;
  const auto ts = parse_instant(instant);
  REQUIRE(ts.has_value());
  p.timestamp = *ts;
  p.is_root = is_root;
  p.language = "en";
  p.body = body;
  return p;
}

UserProfile make_profile(const std::string& id, const std::string& gender,
                         int age, int level, int photos) {
  UserProfile u;
  u.user_id = id;
  u.gender = gender;
  u.age = age;
  u.level = level;
  u.photo_count = photos;
  return u;
}

MonthlySeries make_series(const std::string& name, YearMonth start,
                          std::vector<double> values) {
  MonthlySeries s;
  s.name = name;
  s.start = start;
  s.values = std::move(values);
  return s;
}

std::filesystem::path make_temp_dir(const std::string& tag) {
  std::mt19937_64 rng(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path() /
                   (tag + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

// Three-month fixture, city "rome", 2007-01 .. 2007-03.
//
// January (6 posts, two threads):
//   T1: root A  01-02 10:00 "good trip"
//       reply B 01-02 12:00 "bad food"    (gap  2h)
//       reply C 01-03 12:00 "nothing"     (gap 24h)
//   T2: root B  01-10 00:00 "good good"
//       reply A 01-10 06:00 "plain"       (gap  6h)
//       reply D 01-11 06:00 "okay then"   (gap 24h)
// February: no posts.
// March (3 posts, one thread):
//   T3: root D  03-05 00:00 "bad"
//       reply A 03-05 01:00 "good"        (gap 1h)
//       reply A 03-05 02:00 "good bad x"  (gap 1h)
std::vector<ForumPost> hand_posts() {
  return {
      make_post("p1", "T1", "A", "2007-01-02T10:00:00", true, "good trip"),
      make_post("p2", "T1", "B", "2007-01-02T12:00:00", false, "bad food"),
      make_post("p3", "T1", "C", "2007-01-03T12:00:00", false, "nothing"),
      make_post("p4", "T2", "B", "2007-01-10T00:00:00", true, "good good"),
      make_post("p5", "T2", "A", "2007-01-10T06:00:00", false, "plain"),
      make_post("p6", "T2", "D", "2007-01-11T06:00:00", false, "okay then"),
      make_post("p7", "T3", "D", "2007-03-05T00:00:00", true, "bad"),
      make_post("p8", "T3", "A", "2007-03-05T01:00:00", false, "good"),
      make_post("p9", "T3", "A", "2007-03-05T02:00:00", false, "good bad x"),
  };
}

ProfileMap hand_profiles() {
  ProfileMap m;
  m["A"] = make_profile("A", "m", 30, 3, 10);
  m["B"] = make_profile("B", "f", 40, 2, 5);
  m["C"] = make_profile("C", "u", -1, 6, 0);
  m["D"] = make_profile("D", "m", 20, 1, 7);
  return m;
}

CityExternals hand_externals() {
  const YearMonth start{2007, 1};
  CityExternals ext;
  ext.trend_flights = make_series("google_trend_flights", start, {50, 60, 70});
  ext.trend_holidays = make_series("google_trend_holidays", start, {40, 30, 20});
  ext.target = make_series("target_arrivals", start, {100, 110, 120});
  return ext;
}

// Two sub-window snapshots per 31-day month: below the presence floor, so
// the leadership-rotation column is pinned to 0 and stays hand-checkable.
PanelConfig hand_config(const text::SentimentScorer& scorer,
                        bool post_weighted = false) {
  PanelConfig cfg;
  cfg.rotating = {15, 15, 3};
  cfg.post_weighted_demographics = post_weighted;
  cfg.scorer = &scorer;
  return cfg;
}

IndicatorPanel hand_panel(const text::SentimentScorer& scorer,
                          bool post_weighted = false) {
  std::map<std::string, CityExternals> externals;
  externals["rome"] = hand_externals();
  return indicators::compute_panel(hand_posts(), hand_profiles(), externals,
                                   YearMonth{2007, 1}, 3,
                                   hand_config(scorer, post_weighted));
}

const text::LexiconScorer& good_bad_scorer() {
  static const text::LexiconScorer scorer({{"good", 1.0}, {"bad", -1.0}});
  return scorer;
}

double cell(const IndicatorPanel& p, const std::string& var, int t,
            const std::string& city = "rome") {
  const auto c = p.city_index(city);
  REQUIRE(c.has_value());
  const auto v = indicators::variable_index(var);
  REQUIRE(v.has_value());
  return p.values[*c][*v][static_cast<std::size_t>(t)];
}

double aux_cell(const IndicatorPanel& p, std::size_t v, int t,
                const std::string& city = "rome") {
  const auto c = p.city_index(city);
  REQUIRE(c.has_value());
  return p.aux[*c][v][static_cast<std::size_t>(t)];
}

}  // namespace

TEST_CASE("panel variable catalogue is fixed and indexable") {
  const std::array<std::string_view, 15> expected = {
      "users_photos",       "users_level",
      "percentage_male",    "average_age",
      "activity",           "group_betweenness_centrality",
      "group_degree_centrality", "rotating_leadership",
      "sentiment",          "complexity",
      "avg_response_time",  "new_users",
      "google_trend_flights", "google_trend_holidays",
      "target_arrivals"};
  REQUIRE(indicators::kPanelVariables == expected);
  REQUIRE(indicators::kVariableCount == 15);
  REQUIRE(indicators::kSsiCount == 12);

  const std::array<std::string_view, 3> aux = {"n_posts",
                                               "avg_replies_per_thread",
                                               "user_level_sd"};
  REQUIRE(indicators::kAuxVariables == aux);

  CHECK(indicators::variable_index("users_photos") == 0);
  CHECK(indicators::variable_index("sentiment") == 8);
  CHECK(indicators::variable_index("target_arrivals") == 14);
  CHECK_FALSE(indicators::variable_index("no_such_column").has_value());
}

TEST_CASE("hand corpus: January columns match hand-derived values") {
  const auto panel = hand_panel(good_bad_scorer());
  REQUIRE(panel.cities == std::vector<std::string>{"rome"});
  REQUIRE(panel.start == YearMonth{2007, 1});
  REQUIRE(panel.n_months == 3);

  // Distinct January authors: A(m,30,l3,ph10) B(f,40,l2,ph5) C(u,-,l6,ph0)
  // D(m,20,l1,ph7).
  CHECK_THAT(cell(panel, "users_photos", 0), WithinAbs(22.0, 1e-12));
  CHECK_THAT(cell(panel, "users_level", 0), WithinAbs(12.0, 1e-12));
  // Known genders m,f,m -> 2/3; C's unknown gender is excluded.
  CHECK_THAT(cell(panel, "percentage_male", 0), WithinAbs(2.0 / 3.0, 1e-12));
  // Ages 30,40,20 over the three known -> 30.
  CHECK_THAT(cell(panel, "average_age", 0), WithinAbs(30.0, 1e-12));

  // Reply arcs B->A, C->A, A->B, D->B.
  CHECK_THAT(cell(panel, "activity", 0), WithinAbs(4.0, 1e-12));
  // Undirected simple graph is the path C-A-B-D. Betweenness (normalised by
  // (n-1)(n-2) with both directions counted): A=B=2/3, C=D=0, so the group
  // value is (0+0+2/3+2/3)/(n-1) = 4/9. Degrees: A=B=2/3, C=D=1/3, group
  // value (0+0+1/3+1/3)/(n-2) = 1/3.
  CHECK_THAT(cell(panel, "group_betweenness_centrality", 0),
             WithinAbs(4.0 / 9.0, 1e-12));
  CHECK_THAT(cell(panel, "group_degree_centrality", 0),
             WithinAbs(1.0 / 3.0, 1e-12));
  // 15-day sub-windows give two snapshots, under the presence floor.
  CHECK_THAT(cell(panel, "rotating_leadership", 0), WithinAbs(0.0, 1e-12));

  // Post scores: 0.5+0.5tanh(1), 0.5-0.5tanh(1), 0.5, 0.5+0.5tanh(1), 0.5,
  // 0.5 -> mean = 0.5 + tanh(1)/12.
  CHECK_THAT(cell(panel, "sentiment", 0),
             WithinAbs(0.5 + std::tanh(1.0) / 12.0, 1e-12));
  // Document frequencies over the 6 January posts: good appears in 2 docs,
  // every other word in 1. Per-post means of ln(6/df):
  //   (ln3+ln6)/2, ln6, ln6, ln3, ln6, ln6.
  const double ln3 = std::log(3.0), ln6 = std::log(6.0);
  CHECK_THAT(cell(panel, "complexity", 0),
             WithinAbs(((ln3 + ln6) / 2 + 4 * ln6 + ln3) / 6.0, 1e-12));

  // Reply gaps 2h, 24h, 6h, 24h -> 14h.
  CHECK_THAT(cell(panel, "avg_response_time", 0), WithinAbs(14.0, 1e-12));
  CHECK_THAT(cell(panel, "new_users", 0), WithinAbs(4.0, 1e-12));

  CHECK_THAT(cell(panel, "google_trend_flights", 0), WithinAbs(50.0, 1e-12));
  CHECK_THAT(cell(panel, "google_trend_holidays", 0), WithinAbs(40.0, 1e-12));
  CHECK_THAT(cell(panel, "target_arrivals", 0), WithinAbs(100.0, 1e-12));

  // Substitute metrics: 6 posts; 4 replies over 2 threads; sample sd of the
  // distinct levels {3,2,6,1} = sqrt(14/3).
  CHECK_THAT(aux_cell(panel, 0, 0), WithinAbs(6.0, 1e-12));
  CHECK_THAT(aux_cell(panel, 1, 0), WithinAbs(2.0, 1e-12));
  CHECK_THAT(aux_cell(panel, 2, 0), WithinAbs(std::sqrt(14.0 / 3.0), 1e-12));
}

TEST_CASE("hand corpus: empty February joins externals only") {
  const auto panel = hand_panel(good_bad_scorer());
  for (const auto var :
       {"users_photos", "users_level", "percentage_male", "average_age",
        "activity", "group_betweenness_centrality", "group_degree_centrality",
        "rotating_leadership", "sentiment", "complexity",
        "avg_response_time"}) {
    INFO("variable " << var);
    CHECK(is_missing(cell(panel, var, 1)));
  }
  CHECK_THAT(cell(panel, "new_users", 1), WithinAbs(0.0, 1e-12));
  CHECK_THAT(cell(panel, "google_trend_flights", 1), WithinAbs(60.0, 1e-12));
  CHECK_THAT(cell(panel, "google_trend_holidays", 1), WithinAbs(30.0, 1e-12));
  CHECK_THAT(cell(panel, "target_arrivals", 1), WithinAbs(110.0, 1e-12));
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(is_missing(aux_cell(panel, v, 1)));
  }
}

TEST_CASE("hand corpus: March columns, two-node month") {
  const auto panel = hand_panel(good_bad_scorer());

  // Distinct March authors: D(m,20,l1,ph7), A(m,30,l3,ph10).
  CHECK_THAT(cell(panel, "users_photos", 2), WithinAbs(17.0, 1e-12));
  CHECK_THAT(cell(panel, "users_level", 2), WithinAbs(4.0, 1e-12));
  CHECK_THAT(cell(panel, "percentage_male", 2), WithinAbs(1.0, 1e-12));
  CHECK_THAT(cell(panel, "average_age", 2), WithinAbs(25.0, 1e-12));

  // Two reply arcs A->D; only two graph nodes, so neither centralization is
  // defined.
  CHECK_THAT(cell(panel, "activity", 2), WithinAbs(2.0, 1e-12));
  CHECK(is_missing(cell(panel, "group_betweenness_centrality", 2)));
  CHECK(is_missing(cell(panel, "group_degree_centrality", 2)));
  CHECK_THAT(cell(panel, "rotating_leadership", 2), WithinAbs(0.0, 1e-12));

  // Scores 0.5-0.5tanh(1), 0.5+0.5tanh(1), 0.5 (the matched weights of
  // "good bad x" cancel) -> mean 0.5.
  CHECK_THAT(cell(panel, "sentiment", 2), WithinAbs(0.5, 1e-12));
  // Three docs; df(bad)=2, df(good)=2, df(x)=1.
  const double ln15 = std::log(1.5), ln3 = std::log(3.0);
  CHECK_THAT(cell(panel, "complexity", 2),
             WithinAbs((2 * ln15 + (2 * ln15 + ln3) / 3.0) / 3.0, 1e-12));

  CHECK_THAT(cell(panel, "avg_response_time", 2), WithinAbs(1.0, 1e-12));
  // A and D both first posted in January.
  CHECK_THAT(cell(panel, "new_users", 2), WithinAbs(0.0, 1e-12));

  CHECK_THAT(cell(panel, "google_trend_flights", 2), WithinAbs(70.0, 1e-12));
  CHECK_THAT(cell(panel, "google_trend_holidays", 2), WithinAbs(20.0, 1e-12));
  CHECK_THAT(cell(panel, "target_arrivals", 2), WithinAbs(120.0, 1e-12));

  CHECK_THAT(aux_cell(panel, 0, 2), WithinAbs(3.0, 1e-12));
  CHECK_THAT(aux_cell(panel, 1, 2), WithinAbs(2.0, 1e-12));
  CHECK_THAT(aux_cell(panel, 2, 2), WithinAbs(std::sqrt(2.0), 1e-12));
}

TEST_CASE("hand corpus: missing census counts every absent cell") {
  const auto panel = hand_panel(good_bad_scorer());
  const auto& census = panel.missing_census;
  CHECK(census.at("users_photos") == 1);
  CHECK(census.at("percentage_male") == 1);
  CHECK(census.at("activity") == 1);
  CHECK(census.at("group_betweenness_centrality") == 2);
  CHECK(census.at("group_degree_centrality") == 2);
  CHECK(census.at("rotating_leadership") == 1);
  CHECK(census.at("sentiment") == 1);
  CHECK(census.at("complexity") == 1);
  CHECK(census.at("avg_response_time") == 1);
  CHECK(census.at("new_users") == 0);
  CHECK(census.at("google_trend_flights") == 0);
  CHECK(census.at("target_arrivals") == 0);
}

TEST_CASE("post-weighted demographics reweight only the demographic block") {
  const auto plain = hand_panel(good_bad_scorer(), false);
  const auto weighted = hand_panel(good_bad_scorer(), true);

  // January post counts: A=2, B=2, C=1, D=1.
  CHECK_THAT(cell(weighted, "users_photos", 0),
             WithinAbs(2 * 10 + 2 * 5 + 0 + 7, 1e-12));  // 37
  CHECK_THAT(cell(weighted, "users_level", 0),
             WithinAbs(2 * 3 + 2 * 2 + 6 + 1, 1e-12));  // 17
  CHECK_THAT(cell(weighted, "percentage_male", 0),
             WithinAbs(3.0 / 5.0, 1e-12));
  CHECK_THAT(cell(weighted, "average_age", 0),
             WithinAbs((2 * 30 + 2 * 40 + 20) / 5.0, 1e-12));  // 32

  // Everything outside the demographic block is untouched, including the
  // level-dispersion substitute (always over distinct authors).
  for (const auto var :
       {"activity", "group_betweenness_centrality", "group_degree_centrality",
        "rotating_leadership", "sentiment", "complexity", "avg_response_time",
        "new_users", "google_trend_flights", "google_trend_holidays",
        "target_arrivals"}) {
    INFO("variable " << var);
    CHECK(cell(weighted, var, 0) == cell(plain, var, 0));
  }
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(aux_cell(weighted, v, 0) == aux_cell(plain, v, 0));
  }
}

TEST_CASE("demographics count each author once however much they post") {
  // X posts 50 roots, Y posts one: by default both count once.
  std::vector<ForumPost> posts;
  for (int i = 0; i < 50; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2007-01-%02dT%02d:00:00", 1 + i / 24,
                  i % 24);
    posts.push_back(make_post("x" + std::to_string(i), "tx" + std::to_string(i),
                              "X", buf, true, "w"));
  }
  posts.push_back(make_post("y0", "ty", "Y", "2007-01-30T12:00:00", true, "w"));

  ProfileMap profiles;
  profiles["X"] = make_profile("X", "m", 50, 4, 9);
  profiles["Y"] = make_profile("Y", "f", 20, 0, 1);

  std::map<std::string, CityExternals> externals;
  CityExternals ext;
  ext.trend_flights = make_series("google_trend_flights", {2007, 1}, {1});
  ext.trend_holidays = make_series("google_trend_holidays", {2007, 1}, {1});
  ext.target = make_series("target_arrivals", {2007, 1}, {1});
  externals["rome"] = ext;

  const auto panel = indicators::compute_panel(
      posts, profiles, externals, {2007, 1}, 1, hand_config(good_bad_scorer()));
  CHECK_THAT(cell(panel, "users_photos", 0), WithinAbs(10.0, 1e-12));
  CHECK_THAT(cell(panel, "percentage_male", 0), WithinAbs(0.5, 1e-12));
  CHECK_THAT(cell(panel, "average_age", 0), WithinAbs(35.0, 1e-12));

  const auto weighted = indicators::compute_panel(
      posts, profiles, externals, {2007, 1}, 1,
      hand_config(good_bad_scorer(), true));
  CHECK_THAT(cell(weighted, "users_photos", 0),
             WithinAbs(50 * 9 + 1.0, 1e-12));
  CHECK_THAT(cell(weighted, "percentage_male", 0),
             WithinAbs(50.0 / 51.0, 1e-12));
  CHECK_THAT(cell(weighted, "average_age", 0),
             WithinAbs((50 * 50 + 20) / 51.0, 1e-12));
}

TEST_CASE("authors without a profile are invisible to demographics") {
  std::vector<ForumPost> posts = {
      make_post("p1", "T1", "A", "2007-01-02T10:00:00", true, "w"),
      make_post("p2", "T1", "ghost", "2007-01-02T12:00:00", false, "w"),
  };
  ProfileMap profiles;
  profiles["A"] = make_profile("A", "m", 30, 3, 10);

  std::map<std::string, CityExternals> externals;
  CityExternals ext;
  ext.trend_flights = make_series("google_trend_flights", {2007, 1}, {1});
  ext.trend_holidays = make_series("google_trend_holidays", {2007, 1}, {1});
  ext.target = make_series("target_arrivals", {2007, 1}, {1});
  externals["rome"] = ext;

  const auto panel = indicators::compute_panel(
      posts, profiles, externals, {2007, 1}, 1, hand_config(good_bad_scorer()));
  CHECK_THAT(cell(panel, "users_photos", 0), WithinAbs(10.0, 1e-12));
  CHECK_THAT(cell(panel, "percentage_male", 0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(cell(panel, "average_age", 0), WithinAbs(30.0, 1e-12));
  // A lone profiled author gives no level dispersion.
  CHECK(is_missing(aux_cell(panel, 2, 0)));
  // Activity still sees the unprofiled replier.
  CHECK_THAT(cell(panel, "activity", 0), WithinAbs(1.0, 1e-12));
  // New-user counting is profile-free as well.
  CHECK_THAT(cell(panel, "new_users", 0), WithinAbs(2.0, 1e-12));

  SECTION("a month of only unprofiled authors has no demographics at all") {
    std::vector<ForumPost> ghost_posts = {
        make_post("g1", "G1", "ghost", "2007-01-02T10:00:00", true, "w"),
        make_post("g2", "G1", "ghoul", "2007-01-02T12:00:00", false, "w"),
    };
    const auto p2 = indicators::compute_panel(ghost_posts, profiles, externals,
                                              {2007, 1}, 1,
                                              hand_config(good_bad_scorer()));
    CHECK(is_missing(cell(p2, "users_photos", 0)));
    CHECK(is_missing(cell(p2, "users_level", 0)));
    CHECK(is_missing(cell(p2, "percentage_male", 0)));
    CHECK(is_missing(cell(p2, "average_age", 0)));
    CHECK_THAT(cell(p2, "activity", 0), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("external series outside their span come through as missing") {
  auto posts = hand_posts();
  auto profiles = hand_profiles();
  std::map<std::string, CityExternals> externals;
  CityExternals ext;
  // Only February is covered.
  ext.trend_flights = make_series("google_trend_flights", {2007, 2}, {61});
  ext.trend_holidays = make_series("google_trend_holidays", {2007, 2}, {31});
  ext.target = make_series("target_arrivals", {2007, 2}, {111});
  externals["rome"] = ext;

  const auto panel = indicators::compute_panel(
      posts, profiles, externals, {2007, 1}, 3, hand_config(good_bad_scorer()));
  CHECK(is_missing(cell(panel, "google_trend_flights", 0)));
  CHECK(is_missing(cell(panel, "target_arrivals", 0)));
  CHECK_THAT(cell(panel, "google_trend_flights", 1), WithinAbs(61.0, 1e-12));
  CHECK_THAT(cell(panel, "target_arrivals", 1), WithinAbs(111.0, 1e-12));
  CHECK(is_missing(cell(panel, "google_trend_flights", 2)));
  CHECK(is_missing(cell(panel, "target_arrivals", 2)));
  // Forum columns are unaffected by the externals' span.
  CHECK_THAT(cell(panel, "activity", 0), WithinAbs(4.0, 1e-12));
}

TEST_CASE("panel assembly validates its inputs") {
  std::map<std::string, CityExternals> externals;
  externals["rome"] = hand_externals();

  SECTION("a sentiment scorer is required") {
    PanelConfig cfg;
    cfg.rotating = {15, 15, 3};
    cfg.scorer = nullptr;
    REQUIRE_THROWS_AS(indicators::compute_panel(hand_posts(), hand_profiles(),
                                                externals, {2007, 1}, 3, cfg),
                      ValidationError);
  }
  SECTION("every posting city needs external series") {
    std::map<std::string, CityExternals> none;
    REQUIRE_THROWS_WITH(
        indicators::compute_panel(hand_posts(), hand_profiles(), none,
                                  {2007, 1}, 3,
                                  hand_config(good_bad_scorer())),
        ContainsSubstring("rome"));
  }
  SECTION("at least one month") {
    REQUIRE_THROWS_AS(indicators::compute_panel(hand_posts(), hand_profiles(),
                                                externals, {2007, 1}, 0,
                                                hand_config(good_bad_scorer())),
                      ValidationError);
  }
}

TEST_CASE("externals-only cities get rows with only the joined columns") {
  std::map<std::string, CityExternals> externals;
  externals["rome"] = hand_externals();
  CityExternals ghost;
  ghost.trend_flights = make_series("google_trend_flights", {2007, 1}, {1, 2, 3});
  ghost.trend_holidays = make_series("google_trend_holidays", {2007, 1}, {4, 5, 6});
  ghost.target = make_series("target_arrivals", {2007, 1}, {7, 8, 9});
  externals["ghosttown"] = ghost;

  const auto panel = indicators::compute_panel(
      hand_posts(), hand_profiles(), externals, {2007, 1}, 3,
      hand_config(good_bad_scorer()));
  REQUIRE(panel.cities == std::vector<std::string>{"ghosttown", "rome"});
  for (int t = 0; t < 3; ++t) {
    CHECK(is_missing(cell(panel, "activity", t, "ghosttown")));
    CHECK(is_missing(cell(panel, "sentiment", t, "ghosttown")));
    CHECK_THAT(cell(panel, "new_users", t, "ghosttown"), WithinAbs(0.0, 1e-12));
  }
  CHECK_THAT(cell(panel, "google_trend_flights", 1, "ghosttown"),
             WithinAbs(2.0, 1e-12));
  CHECK_THAT(cell(panel, "target_arrivals", 2, "ghosttown"),
             WithinAbs(9.0, 1e-12));
  // The populated city is computed exactly as before.
  CHECK_THAT(cell(panel, "activity", 0), WithinAbs(4.0, 1e-12));
}

TEST_CASE("panel export/import round-trips values, gaps and the census") {
  const auto panel = hand_panel(good_bad_scorer());
  const auto dir = make_temp_dir("fc_panel_");
  indicators::export_panel(panel, dir / "panel.csv");
  indicators::export_aux(panel, dir / "aux.csv");

  auto back = indicators::import_panel(dir / "panel.csv");
  CHECK(back == panel);
  CHECK(back.missing_census == panel.missing_census);

  indicators::import_aux_into(back, dir / "aux.csv");
  for (std::size_t v = 0; v < 3; ++v) {
    for (int t = 0; t < 3; ++t) {
      const double a = aux_cell(panel, v, t);
      const double b = aux_cell(back, v, t);
      if (is_missing(a)) {
        CHECK(is_missing(b));
      } else {
        CHECK(a == b);
      }
    }
  }

  // A second export of the re-imported panel is byte-identical.
  indicators::export_panel(back, dir / "panel2.csv");
  CHECK(read_text_file(dir / "panel.csv") == read_text_file(dir / "panel2.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("panel schema violations are named precisely") {
  const std::string header = indicators::panel_header();

  SECTION("missing column") {
    std::string h = header;
    const auto pos = h.find(",complexity");
    REQUIRE(pos != std::string::npos);
    h.erase(pos, std::string(",complexity").size());
    REQUIRE_THROWS_WITH(indicators::parse_panel(h + "\n"),
                        ContainsSubstring("missing columns: complexity"));
  }
  SECTION("unexpected column") {
    REQUIRE_THROWS_WITH(indicators::parse_panel(header + ",extra\n"),
                        ContainsSubstring("unexpected columns: extra"));
  }
  SECTION("right columns, wrong order") {
    std::string h = header;
    const auto a = h.find("users_photos");
    h.replace(a, std::string("users_photos").size(), "XTEMPX");
    const auto b = h.find("users_level");
    h.replace(b, std::string("users_level").size(), "users_photos");
    const auto c = h.find("XTEMPX");
    h.replace(c, std::string("XTEMPX").size(), "users_level");
    REQUIRE_THROWS_WITH(indicators::parse_panel(h + "\n"),
                        ContainsSubstring("columns out of order"));
  }
  SECTION("empty and row-less files") {
    REQUIRE_THROWS_AS(indicators::parse_panel(""), ValidationError);
    REQUIRE_THROWS_AS(indicators::parse_panel(header + "\n"), ValidationError);
  }
}

TEST_CASE("hand-written panel rows parse to exact cells") {
  const std::string content =
      indicators::panel_header() +
      "\n"
      "rome,2007-01,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15\n"
      "rome,2007-03,,,,,,,,,,,,,50,,120\n";
  const auto panel = indicators::parse_panel(content);
  REQUIRE(panel.cities == std::vector<std::string>{"rome"});
  REQUIRE(panel.start == YearMonth{2007, 1});
  // The absent interior month is padded.
  REQUIRE(panel.n_months == 3);

  for (std::size_t v = 0; v < indicators::kVariableCount; ++v) {
    CHECK(panel.values[0][v][0] == static_cast<double>(v + 1));
    CHECK(is_missing(panel.values[0][v][1]));
  }
  CHECK(panel.values[0][12][2] == 50.0);
  CHECK(panel.values[0][14][2] == 120.0);
  CHECK(is_missing(panel.values[0][0][2]));
  CHECK(is_missing(panel.values[0][13][2]));

  CHECK(panel.missing_census.at("users_photos") == 2);
  CHECK(panel.missing_census.at("google_trend_flights") == 1);
  CHECK(panel.missing_census.at("target_arrivals") == 1);

  SECTION("duplicate city-month rows are rejected") {
    REQUIRE_THROWS_WITH(
        indicators::parse_panel(
            content + "rome,2007-01,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15\n"),
        ContainsSubstring("duplicate panel row"));
  }
  SECTION("non-numeric cells are rejected with the offending token") {
    REQUIRE_THROWS_WITH(
        indicators::parse_panel(
            indicators::panel_header() +
            "\nrome,2007-01,x,2,3,4,5,6,7,8,9,10,11,12,13,14,15\n"),
        ContainsSubstring("bad number 'x'"));
  }
  SECTION("wrong field counts are rejected") {
    REQUIRE_THROWS_WITH(
        indicators::parse_panel(indicators::panel_header() +
                                "\nrome,2007-01,1,2,3\n"),
        ContainsSubstring("expected 17 fields"));
  }
  SECTION("bad month strings are rejected") {
    REQUIRE_THROWS_WITH(
        indicators::parse_panel(
            indicators::panel_header() +
            "\nrome,2007-13,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15\n"),
        ContainsSubstring("bad city or month"));
  }
}

TEST_CASE("synthetic two-year corpus builds a gap-free, deterministic panel") {
  ingest::SyntheticConfig cfg;
  cfg.n_months = 24;
  cfg.n_users = 80;
  cfg.posts_per_month = 300;
  cfg.vocabulary_size = 500;
  cfg.seed = 11;
  const auto data = ingest::generate_synthetic(cfg);

  std::map<std::string, CityExternals> externals;
  externals[cfg.city] = CityExternals{data.trend_flights, data.trend_holidays,
                                      data.target};
  const text::LexiconScorer scorer(data.lexicon);
  PanelConfig pc;
  pc.scorer = &scorer;

  ingest::ProfileMap profiles;
  for (const auto& pr : data.profiles) profiles[pr.user_id] = pr;
  const auto panel = indicators::compute_panel(data.posts, profiles,
                                               externals, cfg.start,
                                               cfg.n_months, pc);
  REQUIRE(panel.cities == std::vector<std::string>{cfg.city});
  REQUIRE(panel.start == cfg.start);
  REQUIRE(panel.n_months == 24);
  REQUIRE(panel.values.size() == 1);
  REQUIRE(panel.aux.size() == 1);
  REQUIRE(panel.has_aux());

  for (int t = 0; t < 24; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (std::size_t v = 0; v < indicators::kVariableCount; ++v) {
      INFO("variable " << indicators::kPanelVariables[v] << " month " << t);
      CHECK_FALSE(is_missing(panel.values[0][v][ti]));
    }
    CHECK(panel.values[0][2][ti] >= 0.0);   // percentage_male
    CHECK(panel.values[0][2][ti] <= 1.0);
    CHECK(panel.values[0][5][ti] >= 0.0);   // group betweenness centralization
    CHECK(panel.values[0][5][ti] <= 1.0);
    CHECK(panel.values[0][6][ti] >= 0.0);   // group degree centralization
    CHECK(panel.values[0][6][ti] <= 1.0);
    CHECK(panel.values[0][7][ti] >= 0.0);   // rotation is a mean change count
    CHECK(panel.values[0][8][ti] >= 0.0);   // sentiment
    CHECK(panel.values[0][8][ti] <= 1.0);
    CHECK(panel.values[0][9][ti] >= 0.0);   // complexity
    CHECK(panel.values[0][10][ti] > 0.0);   // response gaps are positive
    CHECK(panel.values[0][11][ti] >= 0.0);  // new users
    CHECK(panel.values[0][14][ti] == data.target.values[ti]);
    CHECK(panel.values[0][12][ti] == data.trend_flights.values[ti]);
  }
  // Everyone is new in the first month, so the count equals the distinct
  // January authors, and later months never exceed it.
  CHECK(panel.values[0][11][0] > 0.0);
  for (const auto& [var, n] : panel.missing_census) {
    INFO("variable " << var);
    CHECK(n == 0);
  }

  const auto again = indicators::compute_panel(data.posts, profiles,
                                               externals, cfg.start,
                                               cfg.n_months, pc);
  CHECK(again == panel);
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(again.aux[0][v] == panel.aux[0][v]);
  }
}
