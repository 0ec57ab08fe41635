#pragma once

// Rolling-window pseudo-real-time forecasting. For every origin in the
// evaluation span the engine re-applies the full preparation chain on data
// up to the origin only — gap filling, stationarity transforms,
// window-local standardization — re-selects model orders, forecasts h
// steps ahead, and inverts the transforms back to the level scale. No
// computation ever reads an observation dated after the origin.

#include "indicators.hpp"
#include "models.hpp"
#include "tsprep.hpp"

namespace forumcast::models {

// Level-scale inputs for one city, extracted from an indicator panel.
struct CitySeries {
  std::string city;
  MonthlySeries target;                       // forecast target, levels
  std::vector<MonthlySeries> predictors;      // the 12 forum-derived columns
  MonthlySeries gf;                           // exogenous search-volume index
  std::vector<MonthlySeries> simple_metrics;  // 3 extras for the robustness
                                              // bridge (may be empty)
};

inline CitySeries city_series(const indicators::IndicatorPanel& panel,
                              const std::string& city) {
  const auto ci = panel.city_index(city);
  if (!ci) throw ValidationError("unknown city '" + city + "'");
  CitySeries out;
  out.city = city;
  out.target = panel.series(*ci, *indicators::variable_index("target_arrivals"));
  out.gf = panel.series(
      *ci, *indicators::variable_index("google_trend_flights"));
  for (std::size_t v = 0; v < indicators::kSsiCount; ++v) {
    out.predictors.push_back(panel.series(*ci, v));
  }
  if (panel.has_aux()) {
    for (std::size_t v = 0; v < indicators::kAuxVariables.size(); ++v) {
      out.simple_metrics.push_back(panel.aux_series(*ci, v));
    }
  }
  return out;
}

struct ForecastRecord {
  YearMonth origin{};   // last month whose data the forecast used
  YearMonth target{};   // month being forecast (origin + h)
  double forecast = 0;  // level scale
  double actual = 0;    // realized level
  int p = 0;            // selected autoregressive order (h-step fit)
  int q = -1;           // selected exogenous lag order; -1 when not applicable
  int r = -1;           // retained factor count; -1 when not applicable,
                        // 0 when the factor step fell back to the base model
  std::vector<double> weights;  // per-predictor max |factor weight| (factor
                                // models only), aligned with kPanelVariables
};

struct ForecastRun {
  std::string city;
  ModelKind kind = ModelKind::ar;
  int horizon = 1;
  int window = 60;
  std::vector<ForecastRecord> records;
  std::vector<std::string> diagnostics;
  std::size_t infeasible_origins = 0;
};

namespace detail {

// Index-aligned first difference: out[t] = v[t] - v[t-1], out[0] missing.
inline std::vector<double> aligned_difference(const std::vector<double>& v) {
  std::vector<double> out(v.size(), missing_value());
  for (std::size_t i = 1; i < v.size(); ++i) {
    out[i] = v[i] - v[i - 1];  // missing propagates
  }
  return out;
}

// One column prepared for regression use: level slice [0..origin] run
// through gap filling, optional differencing, optional standardization.
// Returns nullopt (with a reason) when the window rows are unusable.
struct PreparedColumn {
  std::vector<double> values;
};

inline std::optional<PreparedColumn> prepare_column(
    const std::vector<double>& levels, int origin, int window, bool diff,
    bool standardize, std::string* reason) {
  std::vector<double> v(levels.begin(), levels.begin() + origin + 1);
  tsprep::fill_single_gaps(v);
  if (diff) v = aligned_difference(v);
  const int lo = origin - window + 1;
  for (int t = lo; t <= origin; ++t) {
    if (is_missing(v[static_cast<std::size_t>(t)])) {
      if (reason) *reason = "missing value in window at month offset " +
                            std::to_string(t);
      return std::nullopt;
    }
  }
  if (standardize) {
    const auto st = tsprep::window_stats(v, static_cast<std::size_t>(lo),
                                         static_cast<std::size_t>(origin + 1));
    if (!st) {
      if (reason) *reason = "degenerate (constant) values in window";
      return std::nullopt;
    }
    for (auto& x : v) {
      if (!is_missing(x)) x = tsprep::standardize_value(x, *st);
    }
  }
  return PreparedColumn{std::move(v)};
}

}  // namespace detail

// Runs one (city, model, horizon) rolling forecast over the evaluation span
// [eval_begin, eval_end] of TARGET months. `window` counts the months of
// transformed data available at each origin; an origin is feasible when the
// target history reaches back `window` months in transformed scale and every
// series the model needs is complete over that window.
inline ForecastRun rolling_run(const CitySeries& series, ModelKind kind, int h,
                               int window, YearMonth eval_begin,
                               YearMonth eval_end,
                               const ModelSettings& settings = {},
                               const tsprep::TransformSpec& transform = {}) {
  if (h < 1) throw ValidationError("horizon must be >= 1");
  if (eval_end < eval_begin) {
    throw ValidationError("evaluation span is empty");
  }
  if (window <= settings.p_max + h + 5) {
    throw ValidationError("window must exceed p_max + h + 5");
  }
  const bool needs_factors =
      kind == ModelKind::faar || kind == ModelKind::fabm_gf;
  const bool needs_gf = kind == ModelKind::bridge_gf ||
                        kind == ModelKind::fabm_gf ||
                        kind == ModelKind::bridge_oth_gf;
  const bool needs_simple = kind == ModelKind::bridge_oth_gf;
  if (needs_simple && series.simple_metrics.size() != 3) {
    throw ValidationError(
        "this model needs the three extra activity series; the panel has none");
  }
  if (needs_factors &&
      series.predictors.size() != indicators::kSsiCount) {
    throw ValidationError("expected the 12 forum-derived predictor columns");
  }

  ForecastRun run;
  run.city = series.city;
  run.kind = kind;
  run.horizon = h;
  run.window = window;

  const int L = static_cast<int>(series.target.values.size());
  const bool diff_target = transform.differenced("target_arrivals");
  const bool diff_gf = transform.differenced(series.gf.name.empty()
                                                 ? "google_trend_flights"
                                                 : series.gf.name);

  for (YearMonth tau = eval_begin; !(eval_end < tau); tau = tau.plus(1)) {
    const int ti = tau.index() - series.target.start.index();
    const int oi = ti - h;
    const auto note = [&](const std::string& msg) {
      run.diagnostics.push_back("origin " +
                                series.target.start.plus(oi).str() + ": " +
                                msg);
    };
    if (ti >= L || oi < window) {
      ++run.infeasible_origins;
      run.diagnostics.push_back("target " + tau.str() +
                                ": insufficient history, origin skipped");
      continue;
    }
    const double actual = series.target.values[static_cast<std::size_t>(ti)];

    // --- prepare the target ---------------------------------------------
    std::string reason;
    const auto yprep = detail::prepare_column(series.target.values, oi, window,
                                              diff_target, false, &reason);
    if (!yprep) {
      ++run.infeasible_origins;
      note("target unusable: " + reason);
      continue;
    }
    const std::vector<double>& yd = yprep->values;
    std::vector<double> ylevel(series.target.values.begin(),
                               series.target.values.begin() + oi + 1);
    tsprep::fill_single_gaps(ylevel);

    // --- prepare predictors for the factor models ------------------------
    Eigen::MatrixXd X;
    std::vector<std::size_t> kept;
    if (needs_factors) {
      std::vector<std::vector<double>> cols;
      for (std::size_t j = 0; j < series.predictors.size(); ++j) {
        const auto& pred = series.predictors[j];
        std::string why;
        const auto col = detail::prepare_column(
            pred.values, oi, window, transform.differenced(pred.name),
            transform.standardize_predictors, &why);
        if (!col) {
          note("predictor " + pred.name + " dropped: " + why);
          continue;
        }
        kept.push_back(j);
        cols.push_back(std::move(col->values));
      }
      X.resize(oi + 1, static_cast<int>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        for (int t = 0; t <= oi; ++t) {
          X(t, static_cast<int>(c)) = cols[c][static_cast<std::size_t>(t)];
        }
      }
    }

    // --- prepare the exogenous series ------------------------------------
    std::vector<double> gfd;
    if (needs_gf) {
      const auto col = detail::prepare_column(series.gf.values, oi, window,
                                              diff_gf, false, &reason);
      if (!col) {
        ++run.infeasible_origins;
        note("exogenous index unusable: " + reason);
        continue;
      }
      gfd = std::move(col->values);
    }
    std::vector<std::vector<double>> zd;
    if (needs_simple) {
      bool ok = true;
      for (const auto& sm : series.simple_metrics) {
        const auto col = detail::prepare_column(
            sm.values, oi, window, transform.differenced(sm.name), false,
            &reason);
        if (!col) {
          note("extra series " + sm.name + " unusable: " + reason);
          ok = false;
          break;
        }
        zd.push_back(std::move(col->values));
      }
      if (!ok) {
        ++run.infeasible_origins;
        continue;
      }
    }

    // --- fit the direct regressions and forecast -------------------------
    const bool gf_block = needs_gf;
    const int depth =
        gf_block ? std::max(settings.p_max - 1, settings.q_max)
                 : settings.p_max - 1;
    ForecastRecord rec;
    rec.origin = series.target.start.plus(oi);
    rec.target = tau;
    double level_forecast = 0.0;
    bool fit_failed = false;
    const int j_begin = diff_target ? 1 : h;
    for (int j = j_begin; j <= h; ++j) {
      const int t0 = oi - window + 1 + j + depth;
      const int t1 = oi;
      double step = 0.0;
      try {
        switch (kind) {
          case ModelKind::ar: {
            const auto fit = fit_ar_bic(yd, j, settings.p_max, t0, t1);
            step = ar_forecast(fit, yd, oi);
            if (j == h) rec.p = fit.p;
            break;
          }
          case ModelKind::faar: {
            if (kept.empty()) {
              const auto fit = fit_ar_bic(yd, j, settings.p_max, t0, t1);
              step = ar_forecast(fit, yd, oi);
              if (j == h) {
                rec.p = fit.p;
                rec.r = 0;
                rec.weights.assign(indicators::kSsiCount, 0.0);
                note("no usable predictors; factor step skipped");
              }
              break;
            }
            const auto fit = fit_faar(yd, X, j, settings, t0, t1);
            step = factor_forecast(fit, yd, nullptr, X, j, oi);
            if (j == h) {
              rec.p = fit.base.ar.p;
              rec.r = fit.factor_fallback ? 0 : fit.factors.r;
              rec.weights.assign(indicators::kSsiCount, 0.0);
              if (!fit.factor_fallback) {
                for (std::size_t c = 0; c < kept.size(); ++c) {
                  rec.weights[kept[c]] = fit.factors.weights.row(
                      static_cast<int>(c)).cwiseAbs().maxCoeff();
                }
              } else {
                note("factor extraction fell back to the base model");
              }
            }
            break;
          }
          case ModelKind::bridge_gf: {
            const auto fit = fit_bridge_gf(yd, gfd, j, settings, t0, t1);
            step = bridge_forecast(fit, yd, &gfd, nullptr, j, oi);
            if (j == h) {
              rec.p = fit.ar.p;
              rec.q = fit.q;
            }
            break;
          }
          case ModelKind::fabm_gf: {
            if (kept.empty()) {
              const auto fit = fit_bridge_core(yd, &gfd, nullptr, j,
                                               settings.fabm_gf_first_lag,
                                               settings, t0, t1);
              step = bridge_forecast(fit, yd, &gfd, nullptr, j, oi);
              if (j == h) {
                rec.p = fit.ar.p;
                rec.q = fit.q;
                rec.r = 0;
                rec.weights.assign(indicators::kSsiCount, 0.0);
                note("no usable predictors; factor step skipped");
              }
              break;
            }
            const auto fit = fit_fabm_gf(yd, gfd, X, j, settings, t0, t1);
            step = factor_forecast(fit, yd, &gfd, X, j, oi);
            if (j == h) {
              rec.p = fit.base.ar.p;
              rec.q = fit.base.q;
              rec.r = fit.factor_fallback ? 0 : fit.factors.r;
              rec.weights.assign(indicators::kSsiCount, 0.0);
              if (!fit.factor_fallback) {
                for (std::size_t c = 0; c < kept.size(); ++c) {
                  rec.weights[kept[c]] = fit.factors.weights.row(
                      static_cast<int>(c)).cwiseAbs().maxCoeff();
                }
              } else {
                note("factor extraction fell back to the base model");
              }
            }
            break;
          }
          case ModelKind::bridge_oth_gf: {
            const auto fit =
                fit_bridge_oth_gf(yd, gfd, zd, j, settings, t0, t1);
            step = bridge_forecast(fit, yd, &gfd, &zd, j, oi);
            if (j == h) {
              rec.p = fit.ar.p;
              rec.q = fit.q;
            }
            break;
          }
        }
      } catch (const ValidationError& e) {
        note(std::string("fit infeasible at step ") + std::to_string(j) +
             ": " + e.what());
        fit_failed = true;
        break;
      } catch (const ComputationError& e) {
        note(std::string("fit failed at step ") + std::to_string(j) + ": " +
             e.what());
        fit_failed = true;
        break;
      }
      level_forecast += step;
    }
    if (fit_failed) {
      ++run.infeasible_origins;
      continue;
    }
    if (diff_target) {
      level_forecast += ylevel[static_cast<std::size_t>(oi)];
    }
    rec.forecast = level_forecast;

    if (is_missing(actual)) {
      note("realized value missing; origin recorded without evaluation");
    }
    rec.actual = actual;
    run.records.push_back(std::move(rec));
  }

  if (run.records.empty()) {
    throw ComputationError("no feasible forecast origin in the evaluation span");
  }
  return run;
}

}  // namespace forumcast::models
