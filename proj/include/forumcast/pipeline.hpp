#pragma once

// Orchestration layer shared by the command-line tool and the tests: a
// single resolved RunConfig drives data generation, panel construction,
// rolling forecasts, the causality table and the weight-quartile table.
// Every command writes its outputs plus a manifest (input/output digests and
// the resolved configuration) so a re-run can prove it reproduced the bytes.

#include <map>
#include <memory>

#include "json.hpp"

#include "eval.hpp"
#include "ingest.hpp"
#include "text.hpp"

namespace forumcast::pipeline {

inline constexpr std::string_view kToolName = "forumcast";
inline constexpr std::string_view kToolVersion = "0.1.0";

// File names produced/consumed inside the data directory.
inline constexpr std::string_view kPostsFile = "posts.psv";
inline constexpr std::string_view kProfilesFile = "profiles.csv";
inline constexpr std::string_view kLexiconFile = "lexicon.csv";
inline constexpr std::string_view kPanelFile = "panel.csv";
inline constexpr std::string_view kPanelAuxFile = "panel_aux.csv";
inline constexpr std::string_view kForecastsFile = "forecasts.csv";
inline constexpr std::string_view kForecastWeightsFile =
    "forecast_weights.csv";
inline constexpr std::string_view kAccuracyFile = "report_accuracy.csv";
inline constexpr std::string_view kPlotDataFile = "plotdata.csv";
inline constexpr std::string_view kGrangerFile = "granger.csv";
inline constexpr std::string_view kQuartilesFile = "weight_quartiles.csv";
inline constexpr std::string_view kResolvedConfigFile = "config_resolved.json";

struct RunConfig {
  // Paths.
  std::string data_dir = "out";
  std::string out_dir;  // empty -> same as data_dir
  std::string lexicon;  // empty -> data_dir/lexicon.csv when present

  // Corpus scope.
  std::vector<std::string> cities;  // empty -> every city found in the data

  // Synthetic generator (the `generate` command).
  ingest::SyntheticConfig synthetic;

  // Panel construction.
  bool post_weighted_demographics = false;

  // Forecasting engine.
  std::vector<int> horizons = {1, 3, 6, 12};
  int window = 60;
  std::vector<models::ModelKind> model_kinds = {
      models::ModelKind::ar, models::ModelKind::faar,
      models::ModelKind::bridge_gf, models::ModelKind::fabm_gf,
      models::ModelKind::bridge_oth_gf};
  models::ModelSettings model;
  std::string eval_begin;  // YYYY-MM; empty -> start + window + max horizon
  std::string eval_end;    // YYYY-MM; empty -> last panel month

  // Forecast comparison.
  double alpha = 0.10;
  int n_boot = 5000;
  int block_length = 0;  // 0 -> max(2, ceil(n^(1/3)))
  std::uint64_t mcs_seed = 20070101ULL;

  // Causality table.
  int granger_max_lag = 3;
  bool granger_on_differences = true;
  tsprep::DeseasonMethod deseason = tsprep::DeseasonMethod::classical_additive;

  // Weight-quartile table.
  int weights_horizon = 1;
};

// ---------------------------------------------------------------------------
// JSON round-trip
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline ValidationError config_error(const std::string& key,
                                    const std::string& what) {
  return ValidationError("config: key '" + key + "' " + what);
}

inline void expect(bool ok, const std::string& key, const char* type) {
  if (!ok) throw config_error(key, std::string("must be ") + type);
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["data_dir"] = cfg.data_dir;
  j["out_dir"] = cfg.out_dir;
  j["lexicon"] = cfg.lexicon;
  j["cities"] = cfg.cities;
  j["seed"] = cfg.synthetic.seed;
  j["start"] = cfg.synthetic.start.str();
  j["months"] = cfg.synthetic.n_months;
  nlohmann::json s;
  s["city"] = cfg.synthetic.city;
  s["n_users"] = cfg.synthetic.n_users;
  s["posts_per_month"] = cfg.synthetic.posts_per_month;
  s["hub_fraction"] = cfg.synthetic.hub_fraction;
  s["vocabulary_size"] = cfg.synthetic.vocabulary_size;
  s["latent_rho"] = cfg.synthetic.latent_rho;
  s["factor_loading"] = cfg.synthetic.factor_loading;
  s["noise_sd"] = cfg.synthetic.noise_sd;
  s["target_ar"] = cfg.synthetic.target_ar;
  s["target_mean"] = cfg.synthetic.target_mean;
  s["seasonal_amplitude"] = cfg.synthetic.seasonal_amplitude;
  j["synthetic"] = s;
  j["post_weighted_demographics"] = cfg.post_weighted_demographics;
  j["horizons"] = cfg.horizons;
  j["window"] = cfg.window;
  std::vector<std::string> names;
  names.reserve(cfg.model_kinds.size());
  for (auto k : cfg.model_kinds) names.push_back(models::model_name(k));
  j["models"] = names;
  j["p_max"] = cfg.model.p_max;
  j["q_max"] = cfg.model.q_max;
  j["r_max"] = cfg.model.r_max;
  j["cov_threshold"] = cfg.model.cov_threshold;
  j["bridge_gf_first_lag"] = cfg.model.bridge_gf_first_lag;
  j["fabm_gf_first_lag"] = cfg.model.fabm_gf_first_lag;
  j["eval_begin"] = cfg.eval_begin;
  j["eval_end"] = cfg.eval_end;
  j["alpha"] = cfg.alpha;
  j["n_boot"] = cfg.n_boot;
  j["block_length"] = cfg.block_length;
  j["mcs_seed"] = cfg.mcs_seed;
  j["granger_max_lag"] = cfg.granger_max_lag;
  j["granger_on_differences"] = cfg.granger_on_differences;
  j["deseason"] = cfg.deseason == tsprep::DeseasonMethod::stl_loess
                      ? "stl_loess"
                      : "classical_additive";
  j["weights_horizon"] = cfg.weights_horizon;
  return j;
}

// Applies `j` over `cfg`. Unknown keys are rejected so typos cannot silently
// fall back to defaults.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  using detail::config_error;
  using detail::expect;
  if (!j.is_object()) throw ValidationError("config: root must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "data_dir") {
      expect(value.is_string(), key, "a string");
      cfg.data_dir = value.get<std::string>();
    } else if (key == "out_dir") {
      expect(value.is_string(), key, "a string");
      cfg.out_dir = value.get<std::string>();
    } else if (key == "lexicon") {
      expect(value.is_string(), key, "a string");
      cfg.lexicon = value.get<std::string>();
    } else if (key == "cities") {
      expect(value.is_array(), key, "an array of strings");
      cfg.cities.clear();
      for (const auto& c : value) {
        expect(c.is_string(), key, "an array of strings");
        cfg.cities.push_back(c.get<std::string>());
      }
    } else if (key == "seed") {
      expect(value.is_number_unsigned() || value.is_number_integer(), key,
             "an integer");
      cfg.synthetic.seed = value.get<std::uint64_t>();
    } else if (key == "start") {
      expect(value.is_string(), key, "a YYYY-MM string");
      const auto ym = YearMonth::parse(value.get<std::string>());
      if (!ym) throw config_error(key, "must be a valid YYYY-MM month");
      cfg.synthetic.start = *ym;
    } else if (key == "months") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.synthetic.n_months = value.get<int>();
    } else if (key == "synthetic") {
      expect(value.is_object(), key, "an object");
      for (const auto& [sk, sv] : value.items()) {
        const std::string full = "synthetic." + sk;
        if (sk == "city") {
          expect(sv.is_string(), full, "a string");
          cfg.synthetic.city = sv.get<std::string>();
        } else if (sk == "n_users") {
          expect(sv.is_number_integer(), full, "an integer");
          cfg.synthetic.n_users = sv.get<int>();
        } else if (sk == "posts_per_month") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.posts_per_month = sv.get<double>();
        } else if (sk == "hub_fraction") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.hub_fraction = sv.get<double>();
        } else if (sk == "vocabulary_size") {
          expect(sv.is_number_integer(), full, "an integer");
          cfg.synthetic.vocabulary_size = sv.get<int>();
        } else if (sk == "latent_rho") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.latent_rho = sv.get<double>();
        } else if (sk == "factor_loading") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.factor_loading = sv.get<double>();
        } else if (sk == "noise_sd") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.noise_sd = sv.get<double>();
        } else if (sk == "target_ar") {
          expect(sv.is_array(), full, "an array of numbers");
          cfg.synthetic.target_ar.clear();
          for (const auto& c : sv) {
            expect(c.is_number(), full, "an array of numbers");
            cfg.synthetic.target_ar.push_back(c.get<double>());
          }
        } else if (sk == "target_mean") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.target_mean = sv.get<double>();
        } else if (sk == "seasonal_amplitude") {
          expect(sv.is_number(), full, "a number");
          cfg.synthetic.seasonal_amplitude = sv.get<double>();
        } else {
          throw config_error(full, "is not a recognized setting");
        }
      }
    } else if (key == "post_weighted_demographics") {
      expect(value.is_boolean(), key, "a boolean");
      cfg.post_weighted_demographics = value.get<bool>();
    } else if (key == "horizons") {
      expect(value.is_array(), key, "an array of integers");
      cfg.horizons.clear();
      for (const auto& c : value) {
        expect(c.is_number_integer(), key, "an array of integers");
        cfg.horizons.push_back(c.get<int>());
      }
    } else if (key == "window") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.window = value.get<int>();
    } else if (key == "models") {
      expect(value.is_array(), key, "an array of model names");
      cfg.model_kinds.clear();
      for (const auto& c : value) {
        expect(c.is_string(), key, "an array of model names");
        const auto kind = models::parse_model(c.get<std::string>());
        if (!kind) {
          throw config_error(key, "contains unknown model '" +
                                      c.get<std::string>() + "'");
        }
        cfg.model_kinds.push_back(*kind);
      }
    } else if (key == "p_max") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.model.p_max = value.get<int>();
    } else if (key == "q_max") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.model.q_max = value.get<int>();
    } else if (key == "r_max") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.model.r_max = value.get<int>();
    } else if (key == "cov_threshold") {
      expect(value.is_number(), key, "a number");
      cfg.model.cov_threshold = value.get<double>();
    } else if (key == "bridge_gf_first_lag") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.model.bridge_gf_first_lag = value.get<int>();
    } else if (key == "fabm_gf_first_lag") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.model.fabm_gf_first_lag = value.get<int>();
    } else if (key == "eval_begin") {
      expect(value.is_string(), key, "a string");
      cfg.eval_begin = value.get<std::string>();
    } else if (key == "eval_end") {
      expect(value.is_string(), key, "a string");
      cfg.eval_end = value.get<std::string>();
    } else if (key == "alpha") {
      expect(value.is_number(), key, "a number");
      cfg.alpha = value.get<double>();
    } else if (key == "n_boot") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.n_boot = value.get<int>();
    } else if (key == "block_length") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.block_length = value.get<int>();
    } else if (key == "mcs_seed") {
      expect(value.is_number_unsigned() || value.is_number_integer(), key,
             "an integer");
      cfg.mcs_seed = value.get<std::uint64_t>();
    } else if (key == "granger_max_lag") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.granger_max_lag = value.get<int>();
    } else if (key == "granger_on_differences") {
      expect(value.is_boolean(), key, "a boolean");
      cfg.granger_on_differences = value.get<bool>();
    } else if (key == "deseason") {
      expect(value.is_string(), key, "a string");
      const auto s = value.get<std::string>();
      if (s == "stl_loess") {
        cfg.deseason = tsprep::DeseasonMethod::stl_loess;
      } else if (s == "classical_additive") {
        cfg.deseason = tsprep::DeseasonMethod::classical_additive;
      } else {
        throw config_error(key,
                           "must be 'stl_loess' or 'classical_additive'");
      }
    } else if (key == "weights_horizon") {
      expect(value.is_number_integer(), key, "an integer");
      cfg.weights_horizon = value.get<int>();
    } else {
      throw config_error(key, "is not a recognized setting");
    }
  }
}

inline void apply_config_file(RunConfig& cfg,
                              const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config file " + path.string() +
                          ": " + e.what());
  }
  apply_json(cfg, j);
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

namespace detail {

inline std::filesystem::path out_dir(const RunConfig& cfg) {
  return cfg.out_dir.empty() ? std::filesystem::path(cfg.data_dir)
                             : std::filesystem::path(cfg.out_dir);
}

inline std::filesystem::path data_dir(const RunConfig& cfg) {
  return std::filesystem::path(cfg.data_dir);
}

// Writes config_resolved.json and manifest_<command>.json. Manifests carry
// content digests, never timestamps, so a reproduced run is byte-identical.
inline void write_manifest(const RunConfig& cfg, const std::string& command,
                           const std::vector<std::filesystem::path>& inputs,
                           const std::vector<std::filesystem::path>& outputs) {
  const auto dir = out_dir(cfg);
  write_text_file(dir / kResolvedConfigFile, to_json(cfg).dump(2) + "\n");

  json manifest;
  manifest["command"] = command;
  manifest["tool"] = {{"name", std::string(kToolName)},
                      {"version", std::string(kToolVersion)}};
  manifest["config"] = to_json(cfg);
  json in = json::object();
  for (const auto& p : inputs) {
    in[p.filename().string()] = "fnv1a64:" + fnv1a64_hex(read_text_file(p));
  }
  manifest["inputs"] = in;
  json outj = json::object();
  for (const auto& p : outputs) {
    outj[p.filename().string()] = "fnv1a64:" + fnv1a64_hex(read_text_file(p));
  }
  manifest["outputs"] = outj;
  write_text_file(dir / ("manifest_" + command + ".json"),
                  manifest.dump(2) + "\n");
}

inline void require_file(const std::filesystem::path& p,
                         const std::string& hint) {
  if (!std::filesystem::exists(p)) {
    throw ValidationError("missing input file " + p.string() + " (" + hint +
                          ")");
  }
}

// Raises a ValidationError when a loader reported record/corpus problems.
template <typename T>
T take_or_throw(LoadResult<T> res, const std::string& what) {
  if (!res.ok()) {
    throw ValidationError(what + ": " + res.error_summary());
  }
  return std::move(res.value);
}

inline std::filesystem::path series_path(const RunConfig& cfg,
                                         const std::string& city,
                                         std::string_view suffix) {
  return data_dir(cfg) / (city + "_" + std::string(suffix) + ".csv");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

inline void run_generate(const RunConfig& cfg) {
  const auto data = ingest::generate_synthetic(cfg.synthetic);
  const auto dir = detail::data_dir(cfg);
  const auto& city = cfg.synthetic.city;

  ingest::write_posts(dir / kPostsFile, data.posts);
  ingest::write_profiles(dir / kProfilesFile, data.profiles);
  ingest::write_lexicon(dir / kLexiconFile, data.lexicon);
  ingest::write_series(detail::series_path(cfg, city, "arrivals"),
                       data.target);
  ingest::write_series(detail::series_path(cfg, city, "trend_flights"),
                       data.trend_flights);
  ingest::write_series(detail::series_path(cfg, city, "trend_holidays"),
                       data.trend_holidays);

  detail::write_manifest(cfg, "generate", {},
                         {dir / kPostsFile, dir / kProfilesFile,
                          dir / kLexiconFile,
                          detail::series_path(cfg, city, "arrivals"),
                          detail::series_path(cfg, city, "trend_flights"),
                          detail::series_path(cfg, city, "trend_holidays")});
}

// ---------------------------------------------------------------------------
// indicators
// ---------------------------------------------------------------------------

inline indicators::IndicatorPanel build_panel(const RunConfig& cfg) {
  const auto dir = detail::data_dir(cfg);
  detail::require_file(dir / kPostsFile, "run `generate` or supply a corpus");
  detail::require_file(dir / kProfilesFile, "profiles CSV");

  auto posts = detail::take_or_throw(ingest::load_posts(dir / kPostsFile),
                                     "posts file");
  const auto profiles = detail::take_or_throw(
      ingest::load_profiles(dir / kProfilesFile), "profiles file");

  std::vector<std::string> cities = cfg.cities;
  if (cities.empty()) {
    std::set<std::string> seen;
    for (const auto& p : posts) seen.insert(p.city);
    cities.assign(seen.begin(), seen.end());
  }
  if (cities.empty()) {
    throw ValidationError("no posts and no city list; nothing to compute");
  }

  std::map<std::string, indicators::CityExternals> externals;
  std::optional<YearMonth> start;
  int n_months = 0;
  for (const auto& city : cities) {
    indicators::CityExternals ext;
    const auto arrivals = detail::series_path(cfg, city, "arrivals");
    const auto flights = detail::series_path(cfg, city, "trend_flights");
    const auto holidays = detail::series_path(cfg, city, "trend_holidays");
    detail::require_file(arrivals, "monthly target series for " + city);
    detail::require_file(flights, "monthly search-volume series for " + city);
    detail::require_file(holidays, "monthly search-volume series for " + city);
    ext.target = detail::take_or_throw(
        ingest::load_series(arrivals, "target_arrivals"), arrivals.string());
    ext.trend_flights = detail::take_or_throw(
        ingest::load_series(flights, "google_trend_flights"),
        flights.string());
    ext.trend_holidays = detail::take_or_throw(
        ingest::load_series(holidays, "google_trend_holidays"),
        holidays.string());
    if (!start) {
      start = ext.target.start;
      n_months = static_cast<int>(ext.target.values.size());
    } else if (!(*start == ext.target.start) ||
               n_months != static_cast<int>(ext.target.values.size())) {
      throw ValidationError(
          "target series of all cities must cover the same months");
    }
    externals.emplace(city, std::move(ext));
  }

  // Sentiment scorer: an explicit lexicon path must exist; the default
  // lexicon is used when present and a neutral scorer otherwise.
  std::unique_ptr<text::SentimentScorer> scorer;
  std::filesystem::path lexicon_path =
      cfg.lexicon.empty() ? dir / kLexiconFile
                          : std::filesystem::path(cfg.lexicon);
  if (!cfg.lexicon.empty()) {
    detail::require_file(lexicon_path, "sentiment lexicon");
  }
  if (std::filesystem::exists(lexicon_path)) {
    scorer = std::make_unique<text::LexiconScorer>(
        text::LexiconScorer::from_file(lexicon_path));
  } else {
    scorer = std::make_unique<text::NeutralScorer>();
  }

  indicators::PanelConfig pc;
  pc.post_weighted_demographics = cfg.post_weighted_demographics;
  pc.scorer = scorer.get();
  return indicators::compute_panel(posts, profiles, externals, *start,
                                   n_months, pc);
}

inline void run_indicators(const RunConfig& cfg) {
  const auto panel = build_panel(cfg);
  const auto dir = detail::out_dir(cfg);
  indicators::export_panel(panel, dir / kPanelFile);
  indicators::export_aux(panel, dir / kPanelAuxFile);

  const auto ddir = detail::data_dir(cfg);
  std::vector<std::filesystem::path> inputs = {ddir / kPostsFile,
                                               ddir / kProfilesFile};
  for (const auto& city : panel.cities) {
    inputs.push_back(detail::series_path(cfg, city, "arrivals"));
    inputs.push_back(detail::series_path(cfg, city, "trend_flights"));
    inputs.push_back(detail::series_path(cfg, city, "trend_holidays"));
  }
  detail::write_manifest(cfg, "indicators", inputs,
                         {dir / kPanelFile, dir / kPanelAuxFile});
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

namespace detail {

inline indicators::IndicatorPanel load_panel(const RunConfig& cfg) {
  const auto dir = out_dir(cfg);
  require_file(dir / kPanelFile, "run `indicators` first");
  auto panel = indicators::import_panel(dir / kPanelFile);
  if (std::filesystem::exists(dir / kPanelAuxFile)) {
    indicators::import_aux_into(panel, dir / kPanelAuxFile);
  }
  return panel;
}

inline std::vector<std::string> forecast_cities(
    const RunConfig& cfg, const indicators::IndicatorPanel& panel) {
  if (cfg.cities.empty()) return panel.cities;
  for (const auto& c : cfg.cities) {
    if (!panel.city_index(c)) {
      throw ValidationError("city '" + c + "' is not in the panel");
    }
  }
  return cfg.cities;
}

struct EvalSpan {
  YearMonth begin;
  YearMonth end;
};

inline EvalSpan eval_span(const RunConfig& cfg,
                          const indicators::IndicatorPanel& panel) {
  int max_h = 0;
  for (int h : cfg.horizons) max_h = std::max(max_h, h);
  EvalSpan span;
  if (cfg.eval_begin.empty()) {
    span.begin = panel.start.plus(cfg.window + max_h);
  } else {
    const auto b = YearMonth::parse(cfg.eval_begin);
    if (!b) throw ValidationError("eval_begin must be YYYY-MM");
    span.begin = *b;
  }
  if (cfg.eval_end.empty()) {
    span.end = panel.start.plus(panel.n_months - 1);
  } else {
    const auto e = YearMonth::parse(cfg.eval_end);
    if (!e) throw ValidationError("eval_end must be YYYY-MM");
    span.end = *e;
  }
  if (span.end < span.begin) {
    throw ValidationError("evaluation span is empty");
  }
  return span;
}

}  // namespace detail

inline void run_forecast(const RunConfig& cfg) {
  if (cfg.horizons.empty()) throw ValidationError("no horizons configured");
  for (int h : cfg.horizons) {
    if (h < 1) throw ValidationError("horizons must be >= 1");
  }
  if (cfg.model_kinds.empty()) throw ValidationError("no models configured");
  const bool has_ar =
      std::find(cfg.model_kinds.begin(), cfg.model_kinds.end(),
                models::ModelKind::ar) != cfg.model_kinds.end();
  if (!has_ar) {
    throw ValidationError(
        "the autoregressive baseline must be among the configured models");
  }

  const auto panel = detail::load_panel(cfg);
  const auto cities = detail::forecast_cities(cfg, panel);
  const auto span = detail::eval_span(cfg, panel);

  std::vector<models::ForecastRun> runs;
  std::vector<eval::AccuracyRow> report;
  for (const auto& city : cities) {
    const auto cs = models::city_series(panel, city);
    for (int h : cfg.horizons) {
      std::vector<std::size_t> run_idx;
      std::size_t ar_idx = 0;
      for (auto kind : cfg.model_kinds) {
        runs.push_back(models::rolling_run(cs, kind, h, cfg.window,
                                           span.begin, span.end, cfg.model));
        run_idx.push_back(runs.size() - 1);
        if (kind == models::ModelKind::ar) ar_idx = runs.size() - 1;
      }
      // Confidence set over the models of this (city, horizon) cell.
      std::vector<const models::ForecastRun*> cell;
      for (auto i : run_idx) cell.push_back(&runs[i]);
      std::vector<bool> retained(run_idx.size(), true);
      if (cell.size() >= 2) {
        const auto losses = eval::aligned_losses(cell);
        const auto mcs = eval::model_confidence_set(
            losses, cfg.alpha, cfg.n_boot, cfg.block_length, cfg.mcs_seed);
        retained.assign(run_idx.size(), false);
        for (auto i : mcs.retained) retained[i] = true;
      }
      for (std::size_t k = 0; k < run_idx.size(); ++k) {
        const auto& run = runs[run_idx[k]];
        eval::AccuracyRow row;
        row.city = city;
        row.h = h;
        row.model = models::model_name(run.kind);
        row.rel_mse = eval::relative_mse(run, runs[ar_idx]);
        row.rmse = eval::rmse(run);
        row.in_superior_set = retained[k];
        report.push_back(std::move(row));
      }
    }
  }

  std::vector<const models::ForecastRun*> all;
  std::vector<const models::ForecastRun*> factor_runs;
  for (const auto& r : runs) {
    all.push_back(&r);
    if (r.kind == models::ModelKind::faar ||
        r.kind == models::ModelKind::fabm_gf) {
      factor_runs.push_back(&r);
    }
  }

  const auto dir = detail::out_dir(cfg);
  write_text_file(dir / kForecastsFile, eval::serialize_forecasts(all));
  write_text_file(dir / kForecastWeightsFile,
                  eval::serialize_forecast_weights(factor_runs));
  write_text_file(dir / kAccuracyFile, eval::serialize_accuracy(report));

  // Tidy forecast-vs-actual rows for plotting.
  std::string plot = "city,h,model,origin,target_month,forecast,actual\n";
  for (const auto& r : runs) {
    for (const auto& rec : r.records) {
      plot += r.city + "," + std::to_string(r.horizon) + "," +
              models::model_name(r.kind) + "," + rec.origin.str() + "," +
              rec.target.str() + "," + format_double(rec.forecast) + "," +
              format_double(rec.actual) + "\n";
    }
  }
  write_text_file(dir / kPlotDataFile, plot);

  detail::write_manifest(
      cfg, "forecast", {dir / kPanelFile},
      {dir / kForecastsFile, dir / kForecastWeightsFile, dir / kAccuracyFile,
       dir / kPlotDataFile});
}

// ---------------------------------------------------------------------------
// granger
// ---------------------------------------------------------------------------

struct GrangerReport {
  std::vector<eval::GrangerRow> rows;
  std::vector<std::string> diagnostics;
};

inline GrangerReport granger_table(const RunConfig& cfg,
                                   const indicators::IndicatorPanel& panel) {
  if (cfg.granger_max_lag < 1) {
    throw ValidationError("granger_max_lag must be >= 1");
  }
  GrangerReport out;
  const auto target_v = *indicators::variable_index("target_arrivals");

  // Per unit preparation: gap-fill, deseasonalize, optionally difference.
  const auto prep = [&](const MonthlySeries& s) -> std::optional<std::vector<double>> {
    MonthlySeries filled = s;
    tsprep::fill_single_gaps(filled.values);
    for (double v : filled.values) {
      if (is_missing(v)) return std::nullopt;
    }
    MonthlySeries adj = tsprep::deseasonalize(filled, cfg.deseason);
    std::vector<double> v = adj.values;
    if (cfg.granger_on_differences) {
      v = models::detail::aligned_difference(v);
      v.erase(v.begin());
    }
    return v;
  };

  for (std::size_t var = 0; var < indicators::kSsiCount; ++var) {
    std::vector<std::vector<double>> y_units, x_units;
    for (std::size_t c = 0; c < panel.cities.size(); ++c) {
      const auto y = prep(panel.series(c, target_v));
      const auto x = prep(panel.series(c, var));
      if (!y || !x) {
        out.diagnostics.push_back(
            "variable " + std::string(indicators::kPanelVariables[var]) +
            ", city " + panel.cities[c] + ": dropped (missing values)");
        continue;
      }
      y_units.push_back(*y);
      x_units.push_back(*x);
    }
    if (y_units.empty()) {
      out.diagnostics.push_back(
          "variable " + std::string(indicators::kPanelVariables[var]) +
          ": no usable city, skipped");
      continue;
    }
    for (int k = 1; k <= cfg.granger_max_lag; ++k) {
      const auto res = eval::dumitrescu_hurlin(y_units, x_units, k);
      for (const auto& d : res.diagnostics) {
        out.diagnostics.push_back(
            "variable " + std::string(indicators::kPanelVariables[var]) +
            ", lag " + std::to_string(k) + ": " + d);
      }
      eval::GrangerRow row;
      row.variable = std::string(indicators::kPanelVariables[var]);
      row.lag = k;
      row.zbar = res.z_bar;
      row.zbar_tilde = res.z_bar_tilde;
      row.pvalue = res.p_value;
      out.rows.push_back(std::move(row));
    }
  }
  if (out.rows.empty()) {
    throw ComputationError("no variable produced a causality row");
  }
  return out;
}

inline void run_granger(const RunConfig& cfg) {
  const auto panel = detail::load_panel(cfg);
  const auto report = granger_table(cfg, panel);
  const auto dir = detail::out_dir(cfg);
  write_text_file(dir / kGrangerFile, eval::serialize_granger(report.rows));
  detail::write_manifest(cfg, "granger", {dir / kPanelFile},
                         {dir / kGrangerFile});
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

inline void run_weights(const RunConfig& cfg) {
  const bool has_faar =
      std::find(cfg.model_kinds.begin(), cfg.model_kinds.end(),
                models::ModelKind::faar) != cfg.model_kinds.end();
  if (!has_faar) {
    throw ValidationError(
        "the weight analysis needs factor-augmented runs; add FAAR to the "
        "configured models");
  }
  const auto panel = detail::load_panel(cfg);
  const auto cities = detail::forecast_cities(cfg, panel);
  const auto span = detail::eval_span(cfg, panel);

  std::vector<models::ForecastRun> runs;
  for (const auto& city : cities) {
    const auto cs = models::city_series(panel, city);
    runs.push_back(models::rolling_run(cs, models::ModelKind::faar,
                                       cfg.weights_horizon, cfg.window,
                                       span.begin, span.end, cfg.model));
  }
  std::vector<const models::ForecastRun*> ptrs;
  for (const auto& r : runs) ptrs.push_back(&r);
  const auto table = eval::weight_quartiles(ptrs);

  const auto dir = detail::out_dir(cfg);
  write_text_file(dir / kQuartilesFile,
                  eval::serialize_weight_quartiles(table));
  detail::write_manifest(cfg, "weights", {dir / kPanelFile},
                         {dir / kQuartilesFile});
}

}  // namespace forumcast::pipeline
