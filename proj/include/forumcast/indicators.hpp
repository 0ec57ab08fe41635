#pragma once

// Panel assembly: one row of monthly indicators per (city, month) — network
// structure, language metrics, community demographics, external interest
// series and the forecast target — plus a small sidecar of simpler activity
// metrics used by the robustness model.

#include <array>
#include <map>

#include "core.hpp"
#include "ingest.hpp"
#include "network.hpp"
#include "text.hpp"

namespace forumcast::indicators {

using ingest::ForumPost;
using ingest::ProfileMap;

// Panel variables, in file-column order. The first twelve are the
// forum-derived socio-semantic predictors; the last three are joined from
// external series.
inline constexpr std::array<std::string_view, 15> kPanelVariables = {
    "users_photos",
    "users_level",
    "percentage_male",
    "average_age",
    "activity",
    "group_betweenness_centrality",
    "group_degree_centrality",
    "rotating_leadership",
    "sentiment",
    "complexity",
    "avg_response_time",
    "new_users",
    "google_trend_flights",
    "google_trend_holidays",
    "target_arrivals",
};
inline constexpr std::size_t kVariableCount = kPanelVariables.size();
inline constexpr std::size_t kSsiCount = 12;  // forum-derived block

// Simpler substitutes used by the robustness bridge model.
inline constexpr std::array<std::string_view, 3> kAuxVariables = {
    "n_posts", "avg_replies_per_thread", "user_level_sd"};

inline std::optional<std::size_t> variable_index(std::string_view name) {
  for (std::size_t i = 0; i < kPanelVariables.size(); ++i) {
    if (kPanelVariables[i] == name) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Panel
// ---------------------------------------------------------------------------

struct IndicatorPanel {
  std::vector<std::string> cities;
  YearMonth start{};
  int n_months = 0;
  // values[city][variable][month]; aux[city][aux-variable][month]
  std::vector<std::array<std::vector<double>, kVariableCount>> values;
  std::vector<std::array<std::vector<double>, 3>> aux;
  std::map<std::string, std::size_t> missing_census;  // variable -> cells

  std::optional<std::size_t> city_index(std::string_view name) const {
    for (std::size_t i = 0; i < cities.size(); ++i) {
      if (cities[i] == name) return i;
    }
    return std::nullopt;
  }

  MonthlySeries series(std::size_t city, std::size_t variable) const {
    MonthlySeries s;
    s.name = std::string(kPanelVariables[variable]);
    s.start = start;
    s.values = values[city][variable];
    return s;
  }

  MonthlySeries aux_series(std::size_t city, std::size_t variable) const {
    MonthlySeries s;
    s.name = std::string(kAuxVariables[variable]);
    s.start = start;
    s.values = aux[city][variable];
    return s;
  }

  bool has_aux() const {
    return !aux.empty() && !aux.front()[0].empty();
  }

  friend bool operator==(const IndicatorPanel& a, const IndicatorPanel& b) {
    if (a.cities != b.cities || !(a.start == b.start) ||
        a.n_months != b.n_months) {
      return false;
    }
    auto cell_equal = [](double x, double y) {
      return (is_missing(x) && is_missing(y)) || x == y;
    };
    for (std::size_t c = 0; c < a.values.size(); ++c) {
      for (std::size_t v = 0; v < kVariableCount; ++v) {
        if (a.values[c][v].size() != b.values[c][v].size()) return false;
        for (std::size_t t = 0; t < a.values[c][v].size(); ++t) {
          if (!cell_equal(a.values[c][v][t], b.values[c][v][t])) return false;
        }
      }
    }
    return true;
  }
};

// External series for one city.
struct CityExternals {
  MonthlySeries trend_flights;
  MonthlySeries trend_holidays;
  MonthlySeries target;
};

struct PanelConfig {
  network::RotatingLeadershipConfig rotating{};
  // Demographics use distinct in-month authors by default; when set, each
  // author is weighted by their in-month post count instead.
  bool post_weighted_demographics = false;
  const text::SentimentScorer* scorer = nullptr;  // required
};

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

inline void compute_city_columns(
    const std::vector<ForumPost>& city_posts,  // sorted by timestamp
    const ProfileMap& profiles, const CityExternals& externals,
    YearMonth start, int n_months, const PanelConfig& cfg,
    std::array<std::vector<double>, kVariableCount>& cols,
    std::array<std::vector<double>, 3>& aux_cols) {
  for (auto& col : cols) {
    col.assign(static_cast<std::size_t>(n_months), missing_value());
  }
  for (auto& col : aux_cols) {
    col.assign(static_cast<std::size_t>(n_months), missing_value());
  }

  const auto roots = network::build_root_index(city_posts);
  const auto new_users =
      network::new_users_by_month(city_posts, start, n_months);
  const auto art =
      network::avg_response_time_by_month(city_posts, start, n_months);

  // Month slices: posts are sorted, so each month is a contiguous range.
  std::vector<std::pair<std::size_t, std::size_t>> slices(
      static_cast<std::size_t>(n_months), {0, 0});
  {
    std::size_t i = 0;
    while (i < city_posts.size() &&
           month_of_instant(city_posts[i].timestamp) < start) {
      ++i;
    }
    for (int t = 0; t < n_months; ++t) {
      const std::size_t begin = i;
      const YearMonth ym = start.plus(t);
      while (i < city_posts.size() &&
             month_of_instant(city_posts[i].timestamp) == ym) {
        ++i;
      }
      slices[static_cast<std::size_t>(t)] = {begin, i};
    }
  }

  for (int t = 0; t < n_months; ++t) {
    const YearMonth ym = start.plus(t);
    const auto [begin, end] = slices[static_cast<std::size_t>(t)];
    const std::vector<ForumPost> month_posts(city_posts.begin() + begin,
                                             city_posts.begin() + end);
    const auto ti = static_cast<std::size_t>(t);

    if (!month_posts.empty()) {
      // Demographics over in-month authors that have a profile.
      std::map<std::string, std::size_t> author_posts;
      for (const auto& p : month_posts) ++author_posts[p.author_id];
      double photos = 0, levels = 0, age_sum = 0;
      double males = 0, females = 0, age_n = 0, profiled = 0;
      std::vector<double> level_values;
      for (const auto& [author, n_posts] : author_posts) {
        const auto it = profiles.find(author);
        if (it == profiles.end()) continue;
        const auto& u = it->second;
        const double w = cfg.post_weighted_demographics
                             ? static_cast<double>(n_posts)
                             : 1.0;
        profiled += w;
        photos += w * u.photo_count;
        levels += w * u.level;
        level_values.push_back(static_cast<double>(u.level));
        if (u.gender == "m") males += w;
        if (u.gender == "f") females += w;
        if (u.age >= 0) {
          age_sum += w * u.age;
          age_n += w;
        }
      }
      if (profiled > 0) {
        cols[0][ti] = photos;
        cols[1][ti] = levels;
      }
      if (males + females > 0) cols[2][ti] = males / (males + females);
      if (age_n > 0) cols[3][ti] = age_sum / age_n;

      // Network block.
      const TimeWindow win = TimeWindow::for_month(ym);
      const auto g = network::build_graph(month_posts, win, nullptr, &roots);
      cols[4][ti] = static_cast<double>(network::activity(g));
      const auto bc = network::betweenness_centrality(g);
      const auto dc = network::degree_centrality(g);
      if (auto v = network::group_centralization(bc)) cols[5][ti] = *v;
      if (auto v = network::group_centralization(dc)) cols[6][ti] = *v;
      cols[7][ti] = network::rotating_leadership(month_posts, win,
                                                 cfg.rotating, nullptr, &roots);

      // Language block.
      if (cfg.scorer) {
        cols[8][ti] = text::monthly_sentiment(month_posts, *cfg.scorer);
      }
      cols[9][ti] = text::monthly_complexity(month_posts);

      // Simple substitutes.
      aux_cols[0][ti] = static_cast<double>(month_posts.size());
      std::set<std::string> threads_active;
      std::size_t replies = 0;
      for (const auto& p : month_posts) {
        threads_active.insert(p.thread_id);
        if (!p.is_root) ++replies;
      }
      aux_cols[1][ti] = static_cast<double>(replies) /
                        static_cast<double>(threads_active.size());
      if (level_values.size() >= 2) {
        double mean = 0;
        for (double v : level_values) mean += v;
        mean /= static_cast<double>(level_values.size());
        double ss = 0;
        for (double v : level_values) ss += (v - mean) * (v - mean);
        aux_cols[2][ti] = std::sqrt(
            ss / static_cast<double>(level_values.size() - 1));
      }
    }

    cols[10][ti] = art[ti];
    cols[11][ti] = static_cast<double>(new_users[ti]);
    cols[12][ti] = externals.trend_flights.at(ym);
    cols[13][ti] = externals.trend_holidays.at(ym);
    cols[14][ti] = externals.target.at(ym);
  }
}

// Builds the panel for all cities found in `posts`, in sorted city order.
// `externals` must provide series for every city. Months run from `start`
// for `n_months`.
inline IndicatorPanel compute_panel(
    const std::vector<ForumPost>& posts, const ProfileMap& profiles,
    const std::map<std::string, CityExternals>& externals, YearMonth start,
    int n_months, const PanelConfig& cfg) {
  if (n_months < 1) throw ValidationError("panel needs at least one month");
  if (!cfg.scorer) throw ValidationError("panel config needs a sentiment scorer");

  std::map<std::string, std::vector<ForumPost>> by_city;
  for (const auto& p : posts) by_city[p.city].push_back(p);
  for (const auto& [city, ext] : externals) {
    by_city[city];  // ensure cities with only external data appear
  }

  IndicatorPanel panel;
  panel.start = start;
  panel.n_months = n_months;
  for (auto& [city, city_posts] : by_city) {
    const auto it = externals.find(city);
    if (it == externals.end()) {
      throw ValidationError("no external series supplied for city '" + city +
                            "'");
    }
    panel.cities.push_back(city);
    panel.values.emplace_back();
    panel.aux.emplace_back();
    compute_city_columns(city_posts, profiles, it->second, start, n_months,
                         cfg, panel.values.back(), panel.aux.back());
  }

  for (std::size_t v = 0; v < kVariableCount; ++v) {
    std::size_t n = 0;
    for (const auto& city_vals : panel.values) {
      for (double x : city_vals[v]) {
        if (is_missing(x)) ++n;
      }
    }
    panel.missing_census[std::string(kPanelVariables[v])] = n;
  }
  return panel;
}

// ---------------------------------------------------------------------------
// Panel file: CSV, one row per (city, month), missing = empty cell.
// ---------------------------------------------------------------------------

inline std::string panel_header() {
  std::string h = "city,month";
  for (const auto& v : kPanelVariables) {
    h += ',';
    h += std::string(v);
  }
  return h;
}

inline std::string serialize_panel(const IndicatorPanel& panel) {
  std::string out = panel_header();
  out += '\n';
  for (std::size_t c = 0; c < panel.cities.size(); ++c) {
    for (int t = 0; t < panel.n_months; ++t) {
      out += panel.cities[c];
      out += ',';
      out += panel.start.plus(t).str();
      for (std::size_t v = 0; v < kVariableCount; ++v) {
        out += ',';
        out += format_double(panel.values[c][v][static_cast<std::size_t>(t)]);
      }
      out += '\n';
    }
  }
  return out;
}

inline void export_panel(const IndicatorPanel& panel,
                         const std::filesystem::path& path) {
  write_text_file(path, serialize_panel(panel));
}

inline IndicatorPanel parse_panel(std::string_view content) {
  const auto lines = split_lines(content);
  if (lines.empty()) throw ValidationError("panel file is empty");

  // Schema check: exact column set, in order after city/month.
  const auto header = split(trim(lines[0]), ',');
  std::vector<std::string> expected = {"city", "month"};
  for (const auto& v : kPanelVariables) expected.emplace_back(v);
  if (header != expected) {
    std::string msg = "panel schema mismatch;";
    std::vector<std::string> missing_cols, unexpected;
    for (const auto& e : expected) {
      if (std::find(header.begin(), header.end(), e) == header.end()) {
        missing_cols.push_back(e);
      }
    }
    for (const auto& h : header) {
      if (std::find(expected.begin(), expected.end(), h) == expected.end()) {
        unexpected.push_back(h);
      }
    }
    if (!missing_cols.empty()) {
      msg += " missing columns:";
      for (const auto& m : missing_cols) msg += " " + m;
      msg += ";";
    }
    if (!unexpected.empty()) {
      msg += " unexpected columns:";
      for (const auto& u : unexpected) msg += " " + u;
      msg += ";";
    }
    if (missing_cols.empty() && unexpected.empty()) {
      msg += " columns out of order";
    }
    throw ValidationError(msg);
  }

  struct Row {
    std::string city;
    YearMonth month;
    std::array<double, kVariableCount> vals;
  };
  std::vector<Row> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto f = split(lines[li], ',');
    if (f.size() != kVariableCount + 2) {
      throw ValidationError("panel line " + std::to_string(li + 1) +
                            ": expected " +
                            std::to_string(kVariableCount + 2) + " fields");
    }
    Row r;
    r.city = std::string(trim(f[0]));
    const auto ym = YearMonth::parse(trim(f[1]));
    if (r.city.empty() || !ym) {
      throw ValidationError("panel line " + std::to_string(li + 1) +
                            ": bad city or month");
    }
    r.month = *ym;
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      const auto cell = trim(f[v + 2]);
      if (cell.empty()) {
        r.vals[v] = missing_value();
      } else if (auto x = parse_double(cell)) {
        r.vals[v] = *x;
      } else {
        throw ValidationError("panel line " + std::to_string(li + 1) +
                              ": bad number '" + std::string(cell) + "'");
      }
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ValidationError("panel file has no data rows");

  int lo = rows.front().month.index(), hi = lo;
  std::set<std::string> city_set;
  for (const auto& r : rows) {
    lo = std::min(lo, r.month.index());
    hi = std::max(hi, r.month.index());
    city_set.insert(r.city);
  }

  IndicatorPanel panel;
  panel.start = YearMonth::from_index(lo);
  panel.n_months = hi - lo + 1;
  panel.cities.assign(city_set.begin(), city_set.end());
  panel.values.resize(panel.cities.size());
  for (auto& cv : panel.values) {
    for (auto& col : cv) {
      col.assign(static_cast<std::size_t>(panel.n_months), missing_value());
    }
  }
  panel.aux.resize(panel.cities.size());

  std::set<std::pair<std::string, int>> seen;
  for (const auto& r : rows) {
    if (!seen.emplace(r.city, r.month.index()).second) {
      throw ValidationError("duplicate panel row for " + r.city + " " +
                            r.month.str());
    }
    const auto c = *panel.city_index(r.city);
    const auto t = static_cast<std::size_t>(r.month.index() - lo);
    for (std::size_t v = 0; v < kVariableCount; ++v) {
      panel.values[c][v][t] = r.vals[v];
    }
  }

  for (std::size_t v = 0; v < kVariableCount; ++v) {
    std::size_t n = 0;
    for (const auto& cv : panel.values) {
      for (double x : cv[v]) {
        if (is_missing(x)) ++n;
      }
    }
    panel.missing_census[std::string(kPanelVariables[v])] = n;
  }
  return panel;
}

inline IndicatorPanel import_panel(const std::filesystem::path& path) {
  return parse_panel(read_text_file(path));
}

// Sidecar with the simple substitute metrics, same row layout.
inline std::string serialize_aux(const IndicatorPanel& panel) {
  std::string out = "city,month";
  for (const auto& v : kAuxVariables) {
    out += ',';
    out += std::string(v);
  }
  out += '\n';
  for (std::size_t c = 0; c < panel.cities.size(); ++c) {
    for (int t = 0; t < panel.n_months; ++t) {
      out += panel.cities[c];
      out += ',';
      out += panel.start.plus(t).str();
      for (std::size_t v = 0; v < 3; ++v) {
        out += ',';
        out += format_double(panel.aux[c][v][static_cast<std::size_t>(t)]);
      }
      out += '\n';
    }
  }
  return out;
}

inline void export_aux(const IndicatorPanel& panel,
                       const std::filesystem::path& path) {
  write_text_file(path, serialize_aux(panel));
}

// Loads aux columns written by export_aux into an imported panel.
inline void import_aux_into(IndicatorPanel& panel,
                            const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ValidationError("aux file is empty");
  std::string expected = "city,month";
  for (const auto& v : kAuxVariables) {
    expected += ',';
    expected += std::string(v);
  }
  if (trim(lines[0]) != expected) {
    throw ValidationError("aux schema mismatch; expected header '" + expected +
                          "'");
  }
  for (auto& cv : panel.aux) {
    for (auto& col : cv) {
      col.assign(static_cast<std::size_t>(panel.n_months), missing_value());
    }
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto f = split(lines[li], ',');
    if (f.size() != 5) {
      throw ValidationError("aux line " + std::to_string(li + 1) +
                            ": expected 5 fields");
    }
    const auto c = panel.city_index(trim(f[0]));
    const auto ym = YearMonth::parse(trim(f[1]));
    if (!c || !ym) continue;  // aux rows for unknown cities are ignored
    const int off = ym->index() - panel.start.index();
    if (off < 0 || off >= panel.n_months) continue;
    for (std::size_t v = 0; v < 3; ++v) {
      const auto cell = trim(f[v + 2]);
      panel.aux[*c][v][static_cast<std::size_t>(off)] =
          cell.empty() ? missing_value() : parse_double(cell).value_or(
                                               missing_value());
    }
  }
}

}  // namespace forumcast::indicators
