#pragma once

// Time-series preparation: differencing, window-local standardization,
// single-gap interpolation, an augmented Dickey-Fuller stationarity screen,
// and seasonal adjustment (classical additive and a loess-based
// seasonal-trend decomposition).

#include <Eigen/Dense>
#include <set>

#include "core.hpp"
#include "linreg.hpp"

namespace forumcast::tsprep {

// ---------------------------------------------------------------------------
// Differencing
// ---------------------------------------------------------------------------

inline MonthlySeries difference(const MonthlySeries& s) {
  if (s.values.size() < 2) {
    throw ValidationError("difference needs at least 2 observations");
  }
  MonthlySeries out;
  out.name = s.name;
  out.start = s.start.plus(1);
  out.values.resize(s.values.size() - 1);
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    out.values[i - 1] = s.values[i] - s.values[i - 1];
  }
  return out;
}

// Rebuilds levels from a differenced series and the level immediately before
// its first month.
inline MonthlySeries undifference(const MonthlySeries& d, double anchor) {
  MonthlySeries out;
  out.name = d.name;
  out.start = d.start.plus(-1);
  out.values.resize(d.values.size() + 1);
  out.values[0] = anchor;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    out.values[i + 1] = out.values[i] + d.values[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standardization (window-local, sample standard deviation)
// ---------------------------------------------------------------------------

struct WindowStats {
  double mean = 0.0;
  double sd = 1.0;
};

// Mean and sample (n-1) standard deviation over values[begin, end).
// Returns nothing when the window is degenerate (fewer than 2 points, any
// missing value, or zero variance).
inline std::optional<WindowStats> window_stats(const std::vector<double>& v,
                                               std::size_t begin,
                                               std::size_t end) {
  if (end > v.size() || begin + 2 > end) return std::nullopt;
  double mean = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    if (is_missing(v[i])) return std::nullopt;
    mean += v[i];
  }
  const double n = static_cast<double>(end - begin);
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    ss += (v[i] - mean) * (v[i] - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0) || !std::isfinite(sd)) return std::nullopt;
  return WindowStats{mean, sd};
}

inline double standardize_value(double x, const WindowStats& st) {
  return (x - st.mean) / st.sd;
}

// Standardizes a whole series with stats estimated on [win_begin, win_end)
// only — a rolling caller never lets future observations into the stats.
inline MonthlySeries standardize(const MonthlySeries& s, std::size_t win_begin,
                                 std::size_t win_end) {
  const auto st = window_stats(s.values, win_begin, win_end);
  if (!st) {
    throw ComputationError("degenerate predictor: zero variance in window for '" +
                           s.name + "'");
  }
  MonthlySeries out = s;
  for (auto& x : out.values) {
    if (!is_missing(x)) x = standardize_value(x, *st);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Missing-value repair: fill interior single-month gaps linearly. Longer
// gaps and edge gaps are left missing. Returns the number of cells filled.
// ---------------------------------------------------------------------------

inline std::size_t fill_single_gaps(std::vector<double>& v) {
  std::size_t filled = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (is_missing(v[i]) && !is_missing(v[i - 1]) && !is_missing(v[i + 1])) {
      v[i] = 0.5 * (v[i - 1] + v[i + 1]);
      ++filled;
    }
  }
  return filled;
}

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller screen (constant included, lag order by BIC)
// ---------------------------------------------------------------------------

struct UnitRootResult {
  double statistic = 0.0;
  int lag = 0;
  bool reject = false;    // at the 5% level: evidence of stationarity
  double critical_5pct = 0.0;
  int n_effective = 0;
};

// Regression: dy_t = a + b*y_{t-1} + sum_{i=1..k} c_i dy_{t-i} + e_t over a
// common sample for k in [0, max_lag]; the statistic is the t-ratio of b in
// the BIC-minimizing regression. Critical values follow the standard
// constant-only response-surface approximation in the effective sample size.
inline UnitRootResult unit_root_check(const MonthlySeries& s,
                                      int max_lag = 12) {
  const auto& y = s.values;
  const int n = static_cast<int>(y.size());
  if (n < 20) throw ValidationError("unit root check needs >= 20 observations");
  for (double v : y) {
    if (is_missing(v)) {
      throw ValidationError("unit root check needs a complete series");
    }
  }
  max_lag = std::min(max_lag, n / 2 - 2);
  if (max_lag < 0) max_lag = 0;

  std::vector<double> dy(static_cast<std::size_t>(n - 1));
  for (int i = 1; i < n; ++i) {
    dy[static_cast<std::size_t>(i - 1)] = y[static_cast<std::size_t>(i)] -
                                          y[static_cast<std::size_t>(i - 1)];
  }

  // Common regression rows: dy indices t in [max_lag, n-2] (dy_t pairs with
  // level y_t and lagged differences dy_{t-1}..dy_{t-k}).
  const int t0 = max_lag;
  const int t1 = n - 2;
  const int rows = t1 - t0 + 1;
  if (rows < max_lag + 8) {
    throw ValidationError("unit root check: series too short for max_lag");
  }

  double best_bic = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k <= max_lag; ++k) {
    Eigen::MatrixXd X(rows, 2 + k);
    Eigen::VectorXd target(rows);
    for (int t = t0; t <= t1; ++t) {
      const int r = t - t0;
      target(r) = dy[static_cast<std::size_t>(t)];
      X(r, 0) = 1.0;
      X(r, 1) = y[static_cast<std::size_t>(t)];
      for (int i = 1; i <= k; ++i) {
        X(r, 1 + i) = dy[static_cast<std::size_t>(t - i)];
      }
    }
    const auto fit = linreg::ols(X, target);
    if (fit.rank_deficient) continue;
    const double bic = linreg::bic_gaussian(fit.ssr, rows, 2 + k);
    if (bic < best_bic) {
      best_bic = bic;
      best_k = k;
    }
  }

  Eigen::MatrixXd X(rows, 2 + best_k);
  Eigen::VectorXd target(rows);
  for (int t = t0; t <= t1; ++t) {
    const int r = t - t0;
    target(r) = dy[static_cast<std::size_t>(t)];
    X(r, 0) = 1.0;
    X(r, 1) = y[static_cast<std::size_t>(t)];
    for (int i = 1; i <= best_k; ++i) {
      X(r, 1 + i) = dy[static_cast<std::size_t>(t - i)];
    }
  }
  const auto fit = linreg::ols(X, target);
  const auto se = linreg::ols_standard_errors(X, fit);

  UnitRootResult res;
  res.lag = best_k;
  res.n_effective = rows;
  res.statistic = fit.coef(1) / se(1);
  const double T = static_cast<double>(rows);
  res.critical_5pct = -2.86154 - 2.8903 / T - 4.234 / (T * T) -
                      40.04 / (T * T * T);
  res.reject = res.statistic < res.critical_5pct;
  return res;
}

// ---------------------------------------------------------------------------
// Seasonal adjustment
// ---------------------------------------------------------------------------

enum class DeseasonMethod { classical_additive, stl_loess };

namespace detail {

// Loess at integer positions: for each target position, weighted local
// regression over the `span` nearest points with tricube weights.
inline std::vector<double> loess_fit(const std::vector<double>& y, int span,
                                     int degree,
                                     const std::vector<double>* positions =
                                         nullptr,
                                     const std::vector<double>* eval_at =
                                         nullptr) {
  const int n = static_cast<int>(y.size());
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] =
        positions ? (*positions)[static_cast<std::size_t>(i)]
                  : static_cast<double>(i);
  }
  std::vector<double> targets =
      eval_at ? *eval_at : xs;
  span = std::min(span, n);
  if (span < degree + 1) span = degree + 1;

  std::vector<double> out(targets.size());
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const double x0 = targets[ti];
    // `span` nearest sample positions.
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::nth_element(idx.begin(), idx.begin() + span - 1, idx.end(),
                     [&](int a, int b) {
                       return std::abs(xs[static_cast<std::size_t>(a)] - x0) <
                              std::abs(xs[static_cast<std::size_t>(b)] - x0);
                     });
    double dmax = 0.0;
    for (int j = 0; j < span; ++j) {
      dmax = std::max(
          dmax, std::abs(xs[static_cast<std::size_t>(idx[static_cast<
                             std::size_t>(j)])] -
                         x0));
    }
    if (dmax <= 0) dmax = 1.0;

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (int j = 0; j < span; ++j) {
      const int i = idx[static_cast<std::size_t>(j)];
      const double d =
          std::abs(xs[static_cast<std::size_t>(i)] - x0) / dmax;
      const double tri = d < 1.0 ? std::pow(1.0 - d * d * d, 3) : 0.0;
      const double xv = xs[static_cast<std::size_t>(i)] - x0;
      const double yv = y[static_cast<std::size_t>(i)];
      sw += tri;
      swx += tri * xv;
      swy += tri * yv;
      swxx += tri * xv * xv;
      swxy += tri * xv * yv;
    }
    if (degree == 0 || std::abs(sw * swxx - swx * swx) < 1e-12 * swxx) {
      out[ti] = sw > 0 ? swy / sw : 0.0;
    } else {
      const double det = sw * swxx - swx * swx;
      const double b = (sw * swxy - swx * swy) / det;
      const double a = (swy - b * swx) / sw;
      out[ti] = a;  // evaluated at x0 (local coordinates centered there)
    }
  }
  return out;
}

// Centered moving average of width w (w even: half-weights at the ends).
inline std::vector<double> centered_ma(const std::vector<double>& y, int w) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(static_cast<std::size_t>(n), missing_value());
  if (w % 2 == 1) {
    const int half = w / 2;
    for (int t = half; t < n - half; ++t) {
      double acc = 0;
      for (int j = -half; j <= half; ++j) {
        acc += y[static_cast<std::size_t>(t + j)];
      }
      out[static_cast<std::size_t>(t)] = acc / static_cast<double>(w);
    }
  } else {
    const int half = w / 2;
    for (int t = half; t < n - half; ++t) {
      double acc = 0.5 * y[static_cast<std::size_t>(t - half)] +
                   0.5 * y[static_cast<std::size_t>(t + half)];
      for (int j = -half + 1; j <= half - 1; ++j) {
        acc += y[static_cast<std::size_t>(t + j)];
      }
      out[static_cast<std::size_t>(t)] = acc / static_cast<double>(w);
    }
  }
  return out;
}

// Plain moving average: out[i] = mean(v[i..i+w-1]), length N-w+1.
inline std::vector<double> plain_ma(const std::vector<double>& v, int w) {
  const int n = static_cast<int>(v.size());
  if (n < w) return {};
  std::vector<double> out(static_cast<std::size_t>(n - w + 1));
  double acc = 0;
  for (int i = 0; i < w; ++i) acc += v[static_cast<std::size_t>(i)];
  out[0] = acc / static_cast<double>(w);
  for (int i = w; i < n; ++i) {
    acc += v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i - w)];
    out[static_cast<std::size_t>(i - w + 1)] = acc / static_cast<double>(w);
  }
  return out;
}

inline std::vector<double> classical_seasonal(const std::vector<double>& y,
                                              int period, int first_phase) {
  const int n = static_cast<int>(y.size());
  const auto trend = centered_ma(y, period);
  std::vector<double> sum(static_cast<std::size_t>(period), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(period), 0);
  for (int t = 0; t < n; ++t) {
    if (is_missing(trend[static_cast<std::size_t>(t)])) continue;
    const int phase = (first_phase + t) % period;
    sum[static_cast<std::size_t>(phase)] +=
        y[static_cast<std::size_t>(t)] - trend[static_cast<std::size_t>(t)];
    ++cnt[static_cast<std::size_t>(phase)];
  }
  std::vector<double> seasonal(static_cast<std::size_t>(period), 0.0);
  double mean = 0.0;
  for (int ph = 0; ph < period; ++ph) {
    seasonal[static_cast<std::size_t>(ph)] =
        cnt[static_cast<std::size_t>(ph)] > 0
            ? sum[static_cast<std::size_t>(ph)] /
                  static_cast<double>(cnt[static_cast<std::size_t>(ph)])
            : 0.0;
    mean += seasonal[static_cast<std::size_t>(ph)];
  }
  mean /= static_cast<double>(period);
  for (auto& v : seasonal) v -= mean;  // re-center to sum 0
  return seasonal;
}

// Seasonal-trend decomposition with loess smoothers: two inner iterations,
// no robustness weights. Returns the per-observation seasonal component.
inline std::vector<double> stl_seasonal(const std::vector<double>& y,
                                        int period) {
  const int n = static_cast<int>(y.size());
  const int n_s = 13;       // seasonal smoother span (cycle-subseries points)
  const int n_t = 21;       // trend smoother span
  const int n_l = period + 1;  // low-pass loess span
  std::vector<double> trend(static_cast<std::size_t>(n), 0.0);
  std::vector<double> seasonal(static_cast<std::size_t>(n), 0.0);

  for (int iter = 0; iter < 2; ++iter) {
    // 1. Detrend.
    std::vector<double> detr(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      detr[static_cast<std::size_t>(t)] =
          y[static_cast<std::size_t>(t)] - trend[static_cast<std::size_t>(t)];
    }
    // 2. Cycle-subseries smoothing, extended one period at both ends.
    std::vector<double> c(static_cast<std::size_t>(n + 2 * period), 0.0);
    for (int ph = 0; ph < period; ++ph) {
      std::vector<double> sub;
      std::vector<double> pos;
      for (int t = ph; t < n; t += period) {
        sub.push_back(detr[static_cast<std::size_t>(t)]);
        pos.push_back(static_cast<double>(t / period));
      }
      std::vector<double> eval = pos;
      eval.insert(eval.begin(), pos.front() - 1.0);
      eval.push_back(pos.back() + 1.0);
      const auto sm = loess_fit(sub, n_s, 0, &pos, &eval);
      // Place smoothed values: eval[j] corresponds to month index
      // ph + period*(cycle), shifted by one period in the extended array.
      for (std::size_t j = 0; j < eval.size(); ++j) {
        const int cycle = static_cast<int>(eval[j]);
        const int t_ext = ph + period * cycle + period;
        if (t_ext >= 0 && t_ext < n + 2 * period) {
          c[static_cast<std::size_t>(t_ext)] = sm[j];
        }
      }
    }
    // 3. Low-pass: plain MA(period) twice, MA(3), then loess(degree 1).
    // Lengths: (n+2p) -> (n+p+1) -> (n+2) -> n, aligned with the original.
    auto l = plain_ma(plain_ma(plain_ma(c, period), period), 3);
    l = loess_fit(l, n_l, 1);
    // 4. Seasonal = smoothed subseries minus low-pass.
    for (int t = 0; t < n; ++t) {
      const double low = static_cast<std::size_t>(t) < l.size()
                             ? l[static_cast<std::size_t>(t)]
                             : 0.0;
      seasonal[static_cast<std::size_t>(t)] =
          c[static_cast<std::size_t>(t + period)] - low;
    }
    // 5. Deseasonalize and update trend.
    std::vector<double> des(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      des[static_cast<std::size_t>(t)] = y[static_cast<std::size_t>(t)] -
                                         seasonal[static_cast<std::size_t>(t)];
    }
    trend = loess_fit(des, n_t, 1);
  }
  return seasonal;
}

}  // namespace detail

// Removes the seasonal component of a monthly series. Classical additive:
// centered moving-average trend, month-of-year mean residuals re-centered to
// sum zero. Loess method: iterated seasonal-trend smoothing.
inline MonthlySeries deseasonalize(
    const MonthlySeries& s,
    DeseasonMethod method = DeseasonMethod::classical_additive,
    int period = 12) {
  const int n = static_cast<int>(s.values.size());
  if (n < 2 * period) {
    throw ValidationError("deseasonalize needs at least 2 full periods");
  }
  for (double v : s.values) {
    if (is_missing(v)) {
      throw ValidationError("deseasonalize needs a complete series");
    }
  }
  MonthlySeries out = s;
  if (method == DeseasonMethod::classical_additive) {
    const int first_phase = (s.start.month - 1) % period;
    const auto seasonal = detail::classical_seasonal(s.values, period,
                                                     first_phase);
    for (int t = 0; t < n; ++t) {
      const int phase = (first_phase + t) % period;
      out.values[static_cast<std::size_t>(t)] -=
          seasonal[static_cast<std::size_t>(phase)];
    }
  } else {
    const auto seasonal = detail::stl_seasonal(s.values, period);
    for (int t = 0; t < n; ++t) {
      out.values[static_cast<std::size_t>(t)] -=
          seasonal[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

// Default stationarity transforms: every panel variable is first-differenced
// except the two that trend-stationary screening exempts.
struct TransformSpec {
  std::set<std::string> level_variables = {"group_betweenness_centrality",
                                           "avg_response_time"};
  bool standardize_predictors = true;

  bool differenced(std::string_view name) const {
    return level_variables.find(std::string(name)) == level_variables.end();
  }
};

}  // namespace forumcast::tsprep
