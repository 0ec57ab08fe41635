#pragma once

// Forecast evaluation: squared-error accuracy summaries, the model
// confidence set (block-bootstrap range statistic), a heterogeneous-panel
// Granger non-causality test, and the quartile analysis of factor weights.

#include <Eigen/Dense>
#include <map>
#include <numeric>
#include <random>

#include "core.hpp"
#include "linreg.hpp"
#include "rolling.hpp"

namespace forumcast::eval {

// ---------------------------------------------------------------------------
// Accuracy summaries
// ---------------------------------------------------------------------------

namespace detail {

// Origin -> squared error, over records whose realized value is present.
inline std::map<int, double> squared_errors(const models::ForecastRun& run) {
  std::map<int, double> out;
  for (const auto& r : run.records) {
    if (is_missing(r.actual) || is_missing(r.forecast)) continue;
    const double e = r.actual - r.forecast;
    out[r.origin.index()] = e * e;
  }
  return out;
}

}  // namespace detail

inline double msfe(const models::ForecastRun& run) {
  const auto se = detail::squared_errors(run);
  if (se.empty()) {
    throw ValidationError("no evaluable forecast records");
  }
  double acc = 0.0;
  for (const auto& [o, e] : se) acc += e;
  return acc / static_cast<double>(se.size());
}

inline double rmse(const models::ForecastRun& run) {
  return std::sqrt(msfe(run));
}

// MSFE ratio over the COMMON evaluable origins of the two runs.
inline double relative_mse(const models::ForecastRun& run,
                           const models::ForecastRun& baseline) {
  const auto a = detail::squared_errors(run);
  const auto b = detail::squared_errors(baseline);
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (const auto& [o, e] : a) {
    const auto it = b.find(o);
    if (it == b.end()) continue;
    sa += e;
    sb += it->second;
    ++n;
  }
  if (n == 0) throw ValidationError("runs share no evaluable origin");
  if (!(sb > 0)) {
    throw ComputationError("baseline has zero squared error; ratio undefined");
  }
  return sa / sb;
}

// One model's per-origin losses after alignment to the common origin set.
struct LossSeries {
  std::string label;
  std::vector<double> losses;
};

// Restricts every run to the origins evaluable in ALL runs, in origin order.
inline std::vector<LossSeries> aligned_losses(
    const std::vector<const models::ForecastRun*>& runs) {
  if (runs.size() < 2) {
    throw ValidationError("loss alignment needs at least two runs");
  }
  std::vector<std::map<int, double>> se;
  se.reserve(runs.size());
  for (const auto* r : runs) se.push_back(detail::squared_errors(*r));
  std::vector<int> common;
  for (const auto& [o, e] : se.front()) {
    bool everywhere = true;
    for (std::size_t i = 1; i < se.size(); ++i) {
      if (se[i].find(o) == se[i].end()) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) common.push_back(o);
  }
  if (common.empty()) {
    throw ValidationError("runs share no evaluable origin");
  }
  std::vector<LossSeries> out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    LossSeries ls;
    ls.label = models::model_name(runs[i]->kind);
    for (int o : common) ls.losses.push_back(se[i].at(o));
    out.push_back(std::move(ls));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model confidence set
// ---------------------------------------------------------------------------

struct MCSResult {
  std::vector<std::size_t> retained;           // indices into the input set
  std::vector<std::size_t> elimination_order;  // worst first, survivor last
  std::vector<double> p_values;                // per input model
  double alpha = 0.10;
  int n_boot = 5000;
  int block_length = 0;
  std::string statistic = "range";
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-replicate seed so serial and parallel evaluation of the
// bootstrap agree exactly.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// One circular-block-bootstrap index sample of size n.
inline std::vector<int> block_sample(int n, int block, std::mt19937_64& rng) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(n + block));
  std::uniform_int_distribution<int> start(0, n - 1);
  while (static_cast<int>(idx.size()) < n) {
    const int s = start(rng);
    for (int j = 0; j < block && static_cast<int>(idx.size()) < n; ++j) {
      idx.push_back((s + j) % n);
    }
  }
  return idx;
}

}  // namespace detail

// Iterative equal-predictive-ability testing with the range statistic
// T_R = max over model pairs of |mean loss differential| / bootstrap standard
// error. The elimination sequence runs to the last model; each eliminated
// model's p-value is the running maximum of the stage p-values, the final
// survivor gets 1.0, and the retained set is every model with p >= alpha.
// Models with identical loss series produce a zero pair statistic and are
// never separated by it.
inline MCSResult model_confidence_set(const std::vector<LossSeries>& losses,
                                      double alpha = 0.10, int n_boot = 5000,
                                      int block_length = 0,
                                      std::uint64_t seed = 20070101ULL) {
  const int m = static_cast<int>(losses.size());
  if (m < 2) throw ValidationError("the confidence set needs >= 2 models");
  const int n = static_cast<int>(losses.front().losses.size());
  for (const auto& ls : losses) {
    if (static_cast<int>(ls.losses.size()) != n) {
      throw ValidationError("loss series lengths differ");
    }
  }
  if (n < 20) throw ValidationError("too few common origins (< 20)");
  if (n_boot < 1) throw ValidationError("bootstrap replicate count must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0,1)");
  }

  MCSResult res;
  res.alpha = alpha;
  res.n_boot = n_boot;
  res.block_length =
      block_length > 0 ? block_length
                       : std::max(2, static_cast<int>(std::ceil(std::cbrt(
                                         static_cast<double>(n)))));
  res.p_values.assign(static_cast<std::size_t>(m), 1.0);

  Eigen::MatrixXd L(n, m);
  for (int j = 0; j < m; ++j) {
    for (int t = 0; t < n; ++t) {
      L(t, j) = losses[static_cast<std::size_t>(j)]
                    .losses[static_cast<std::size_t>(t)];
    }
  }
  const Eigen::RowVectorXd mean_loss = L.colwise().mean();

  // Bootstrap mean losses, one row per replicate; every later statistic is a
  // linear function of these, so resampling happens exactly once.
  Eigen::MatrixXd boot(n_boot, m);
  for (int b = 0; b < n_boot; ++b) {
    std::mt19937_64 rng(
        detail::substream_seed(seed, static_cast<std::uint64_t>(b)));
    const auto idx = detail::block_sample(n, res.block_length, rng);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
    for (int t : idx) acc += L.row(t);
    boot.row(b) = acc / static_cast<double>(n);
  }

  // Pairwise standard errors do not depend on the surviving set: cache them.
  Eigen::MatrixXd pair_se = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double dbar = mean_loss(i) - mean_loss(j);
      const Eigen::ArrayXd db = (boot.col(i) - boot.col(j)).array();
      const double var = (db - dbar).square().mean();
      pair_se(i, j) = pair_se(j, i) = std::sqrt(var);
    }
  }

  std::vector<int> active(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) active[static_cast<std::size_t>(i)] = i;
  double p_running = 0.0;
  const double inf = std::numeric_limits<double>::infinity();

  while (active.size() >= 2) {
    // Stage statistic over the surviving pairs.
    double t_range = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const int i = active[a], j = active[b];
        const double dbar = mean_loss(i) - mean_loss(j);
        const double se = pair_se(i, j);
        const double stat =
            se > 0.0 ? std::abs(dbar) / se : (std::abs(dbar) > 0.0 ? inf : 0.0);
        t_range = std::max(t_range, stat);
      }
    }
    // Bootstrap distribution of the same statistic under the null.
    int exceed = 0;
    for (int b = 0; b < n_boot; ++b) {
      double t_star = 0.0;
      for (std::size_t a = 0; a < active.size(); ++a) {
        for (std::size_t c = a + 1; c < active.size(); ++c) {
          const int i = active[a], j = active[c];
          const double se = pair_se(i, j);
          if (!(se > 0.0)) continue;
          const double dbar = mean_loss(i) - mean_loss(j);
          const double centered = (boot(b, i) - boot(b, j)) - dbar;
          t_star = std::max(t_star, std::abs(centered) / se);
        }
      }
      if (t_star >= t_range) ++exceed;
    }
    const double p_stage =
        static_cast<double>(exceed) / static_cast<double>(n_boot);
    p_running = std::max(p_running, p_stage);

    // Eliminate the model with the largest studentized excess loss over the
    // surviving-set average.
    const double inv = 1.0 / static_cast<double>(active.size());
    double mean_active = 0.0;
    for (int j : active) mean_active += mean_loss(j);
    mean_active *= inv;
    Eigen::VectorXd boot_active = Eigen::VectorXd::Zero(n_boot);
    for (int j : active) boot_active += boot.col(j);
    boot_active *= inv;

    int worst = active.front();
    double worst_stat = -inf;
    for (int i : active) {
      const double dbar = mean_loss(i) - mean_active;
      const Eigen::ArrayXd centered =
          (boot.col(i) - boot_active).array() - dbar;
      const double var = centered.square().mean();
      const double stat =
          var > 0.0 ? dbar / std::sqrt(var) : (dbar > 0.0 ? inf : -inf);
      if (stat > worst_stat) {
        worst_stat = stat;
        worst = i;
      }
    }
    res.p_values[static_cast<std::size_t>(worst)] = p_running;
    res.elimination_order.push_back(static_cast<std::size_t>(worst));
    active.erase(std::find(active.begin(), active.end(), worst));
  }
  res.p_values[static_cast<std::size_t>(active.front())] = 1.0;
  res.elimination_order.push_back(static_cast<std::size_t>(active.front()));

  for (std::size_t i = 0; i < res.p_values.size(); ++i) {
    if (res.p_values[i] >= alpha) res.retained.push_back(i);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Heterogeneous-panel Granger non-causality
// ---------------------------------------------------------------------------

struct DHResult {
  int lag = 1;               // K
  std::vector<double> wald;  // per retained unit
  double w_bar = 0.0;
  double z_bar = 0.0;
  double z_bar_tilde = 0.0;
  double p_value = 1.0;      // two-sided normal p-value on z_bar_tilde
  std::size_t units_used = 0;
  std::size_t units_dropped = 0;
  std::vector<std::string> diagnostics;
};

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Per unit i: OLS of y_t on a constant, K own lags and K lags of x, then the
// Wald statistic for joint nullity of the x coefficients (with the unbiased
// residual-variance estimate). W-bar is the cross-unit mean;
// Z_bar = sqrt(N/(2K)) (W-bar - K), and Z_bar_tilde applies the fixed-T
// second-moment correction, T being the raw series length. Units whose
// regression is singular are dropped with a diagnostic and N adjusted.
inline DHResult dumitrescu_hurlin(
    const std::vector<std::vector<double>>& y_units,
    const std::vector<std::vector<double>>& x_units, int K) {
  if (K < 1) throw ValidationError("lag order must be >= 1");
  const std::size_t N = y_units.size();
  if (N == 0 || x_units.size() != N) {
    throw ValidationError("panel units misaligned");
  }
  const int T = static_cast<int>(y_units.front().size());
  for (std::size_t i = 0; i < N; ++i) {
    if (static_cast<int>(y_units[i].size()) != T ||
        static_cast<int>(x_units[i].size()) != T) {
      throw ValidationError("panel units must share a common length");
    }
  }
  if (T <= 5 + 3 * K) {
    throw ValidationError("series too short for the chosen lag (need T > 5+3K)");
  }

  DHResult res;
  res.lag = K;
  const int n_eff = T - K;
  const int k_cols = 1 + 2 * K;
  for (std::size_t u = 0; u < N; ++u) {
    const auto& y = y_units[u];
    const auto& x = x_units[u];
    bool clean = true;
    for (int t = 0; t < T && clean; ++t) {
      if (is_missing(y[static_cast<std::size_t>(t)]) ||
          is_missing(x[static_cast<std::size_t>(t)])) {
        clean = false;
      }
    }
    if (!clean) {
      ++res.units_dropped;
      res.diagnostics.push_back("unit " + std::to_string(u) +
                                " dropped: missing values");
      continue;
    }
    Eigen::MatrixXd X(n_eff, k_cols);
    Eigen::VectorXd Y(n_eff);
    for (int t = K; t < T; ++t) {
      const int r = t - K;
      Y(r) = y[static_cast<std::size_t>(t)];
      X(r, 0) = 1.0;
      for (int k = 1; k <= K; ++k) {
        X(r, k) = y[static_cast<std::size_t>(t - k)];
        X(r, K + k) = x[static_cast<std::size_t>(t - k)];
      }
    }
    const auto fit = linreg::ols(X, Y);
    const int dof = n_eff - k_cols;
    if (fit.rank_deficient || dof < 1) {
      ++res.units_dropped;
      res.diagnostics.push_back("unit " + std::to_string(u) +
                                " dropped: singular regression");
      continue;
    }
    const double sigma2 = fit.ssr / static_cast<double>(dof);
    // Wald = b_x' [sigma2 * (X'X)^-1 restricted to the x block]^-1 b_x.
    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    const Eigen::MatrixXd xtx_inv =
        ldlt.solve(Eigen::MatrixXd::Identity(k_cols, k_cols));
    const Eigen::MatrixXd v_xx =
        sigma2 * xtx_inv.block(K + 1, K + 1, K, K);
    const Eigen::VectorXd b_x = fit.coef.segment(K + 1, K);
    Eigen::LDLT<Eigen::MatrixXd> vsolve(v_xx);
    if (vsolve.info() != Eigen::Success) {
      ++res.units_dropped;
      res.diagnostics.push_back("unit " + std::to_string(u) +
                                " dropped: singular coefficient covariance");
      continue;
    }
    const double w = b_x.dot(vsolve.solve(b_x));
    if (!std::isfinite(w) || w < 0.0) {
      ++res.units_dropped;
      res.diagnostics.push_back("unit " + std::to_string(u) +
                                " dropped: non-finite statistic");
      continue;
    }
    res.wald.push_back(w);
  }
  res.units_used = res.wald.size();
  if (res.units_used == 0) {
    throw ComputationError("every panel unit was dropped");
  }
  const double nn = static_cast<double>(res.units_used);
  const double kk = static_cast<double>(K);
  const double tt = static_cast<double>(T);
  res.w_bar =
      std::accumulate(res.wald.begin(), res.wald.end(), 0.0) / nn;
  res.z_bar = std::sqrt(nn / (2.0 * kk)) * (res.w_bar - kk);
  res.z_bar_tilde =
      std::sqrt(nn / (2.0 * kk) * (tt - 3.0 * kk - 5.0) /
                (tt - 2.0 * kk - 3.0)) *
      ((tt - 3.0 * kk - 3.0) / (tt - 3.0 * kk - 1.0) * res.w_bar - kk);
  res.p_value = normal_two_sided_p(res.z_bar_tilde);
  return res;
}

// ---------------------------------------------------------------------------
// Factor-weight quartiles
// ---------------------------------------------------------------------------

struct WeightQuartileTable {
  std::vector<std::string> variables;
  // Per variable: percent of steps whose weight fell in quartile I..IV.
  std::vector<std::array<double, 4>> percent;
  std::size_t steps_used = 0;
  std::size_t steps_excluded = 0;
};

// Every record of every run is one "step" carrying a per-variable absolute
// weight (the per-variable maximum over retained components, computed by the
// rolling engine). Within a step, variables are ranked and split into four
// equal-size groups — the step's own quartiles — and the table aggregates
// quartile membership percentages across steps. Steps whose weights are all
// equal have no quartiles and are excluded.
inline WeightQuartileTable weight_quartiles(
    const std::vector<const models::ForecastRun*>& runs) {
  if (runs.empty()) throw ValidationError("no factor runs supplied");
  const std::size_t M = indicators::kSsiCount;
  WeightQuartileTable table;
  for (std::size_t v = 0; v < M; ++v) {
    table.variables.emplace_back(indicators::kPanelVariables[v]);
  }
  std::vector<std::array<std::size_t, 4>> counts(
      M, std::array<std::size_t, 4>{0, 0, 0, 0});

  for (const auto* run : runs) {
    if (run->kind != models::ModelKind::faar &&
        run->kind != models::ModelKind::fabm_gf) {
      throw ValidationError("weight analysis needs factor-model runs");
    }
    for (const auto& rec : run->records) {
      if (rec.r < 1 || rec.weights.size() != M) {
        ++table.steps_excluded;
        continue;
      }
      const auto [lo, hi] =
          std::minmax_element(rec.weights.begin(), rec.weights.end());
      if (!(*hi > *lo)) {
        ++table.steps_excluded;  // degenerate: all weights equal
        continue;
      }
      // Rank with index tie-break, then partition ranks into quartiles.
      std::vector<std::size_t> order(M);
      for (std::size_t i = 0; i < M; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) {
                  if (rec.weights[a] != rec.weights[b]) {
                    return rec.weights[a] < rec.weights[b];
                  }
                  return a < b;
                });
      for (std::size_t rank = 0; rank < M; ++rank) {
        const std::size_t quartile = (4 * rank) / M;
        ++counts[order[rank]][quartile];
      }
      ++table.steps_used;
    }
  }
  if (table.steps_used == 0) {
    throw ComputationError("no usable weight vectors in the supplied runs");
  }
  table.percent.resize(M);
  for (std::size_t v = 0; v < M; ++v) {
    for (std::size_t qd = 0; qd < 4; ++qd) {
      table.percent[v][qd] = 100.0 * static_cast<double>(counts[v][qd]) /
                             static_cast<double>(table.steps_used);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Tabular exports
// ---------------------------------------------------------------------------

inline constexpr std::string_view kForecastHeader =
    "city,model,h,origin,forecast,actual,p,q,R";

inline std::string serialize_forecasts(
    const std::vector<const models::ForecastRun*>& runs) {
  std::string out(kForecastHeader);
  out += "\n";
  for (const auto* run : runs) {
    for (const auto& r : run->records) {
      out += run->city + "," + models::model_name(run->kind) + "," +
             std::to_string(run->horizon) + "," + r.origin.str() + "," +
             format_double(r.forecast) + "," + format_double(r.actual) + "," +
             std::to_string(r.p) + ",";
      if (r.q >= 0) out += std::to_string(r.q);
      out += ",";
      if (r.r >= 0) out += std::to_string(r.r);
      out += "\n";
    }
  }
  return out;
}

// Sidecar with the full per-origin weight vectors of the factor models.
inline std::string serialize_forecast_weights(
    const std::vector<const models::ForecastRun*>& runs) {
  std::string out = "city,model,h,origin";
  for (std::size_t v = 0; v < indicators::kSsiCount; ++v) {
    out += ",";
    out += std::string(indicators::kPanelVariables[v]);
  }
  out += "\n";
  for (const auto* run : runs) {
    for (const auto& r : run->records) {
      if (r.weights.size() != indicators::kSsiCount) continue;
      out += run->city + "," + models::model_name(run->kind) + "," +
             std::to_string(run->horizon) + "," + r.origin.str();
      for (double w : r.weights) {
        out += "," + format_double(w);
      }
      out += "\n";
    }
  }
  return out;
}

struct AccuracyRow {
  std::string city;
  int h = 1;
  std::string model;
  double rel_mse = 1.0;
  double rmse = 0.0;
  bool in_superior_set = false;
};

inline constexpr std::string_view kAccuracyHeader =
    "city,h,model,rel_mse,rmse,in_superior_set";

inline std::string serialize_accuracy(const std::vector<AccuracyRow>& rows) {
  std::string out(kAccuracyHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += r.city + "," + std::to_string(r.h) + "," + r.model + "," +
           format_double(r.rel_mse) + "," + format_double(r.rmse) + "," +
           (r.in_superior_set ? "1" : "0") + "\n";
  }
  return out;
}

inline std::vector<AccuracyRow> parse_accuracy(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines.front()) != kAccuracyHeader) {
    throw ValidationError("accuracy table: bad or missing header");
  }
  std::vector<AccuracyRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) {
      throw ValidationError("accuracy table line " + std::to_string(i + 1) +
                            ": expected 6 fields");
    }
    AccuracyRow r;
    r.city = std::string(trim(f[0]));
    r.model = std::string(trim(f[2]));
    const auto h = parse_int(trim(f[1]));
    const auto rel = parse_double(trim(f[3]));
    const auto rm = parse_double(trim(f[4]));
    const auto sup = parse_int(trim(f[5]));
    if (!h || !rel || !rm || !sup || (*sup != 0 && *sup != 1)) {
      throw ValidationError("accuracy table line " + std::to_string(i + 1) +
                            ": bad numeric field");
    }
    r.h = static_cast<int>(*h);
    r.rel_mse = *rel;
    r.rmse = *rm;
    r.in_superior_set = *sup == 1;
    rows.push_back(std::move(r));
  }
  return rows;
}

struct GrangerRow {
  std::string variable;
  int lag = 1;
  double zbar = 0.0;
  double zbar_tilde = 0.0;
  double pvalue = 1.0;
};

inline constexpr std::string_view kGrangerHeader =
    "variable,lag,zbar,zbar_tilde,pvalue";

inline std::string serialize_granger(const std::vector<GrangerRow>& rows) {
  std::string out(kGrangerHeader);
  out += "\n";
  for (const auto& r : rows) {
    out += r.variable + "," + std::to_string(r.lag) + "," +
           format_double(r.zbar) + "," + format_double(r.zbar_tilde) + "," +
           format_double(r.pvalue) + "\n";
  }
  return out;
}

inline constexpr std::string_view kQuartileHeader =
    "variable,q2_pct,q3_pct,q4_pct";

inline std::string serialize_weight_quartiles(
    const WeightQuartileTable& table) {
  std::string out(kQuartileHeader);
  out += "\n";
  for (std::size_t v = 0; v < table.variables.size(); ++v) {
    out += table.variables[v] + "," + format_double(table.percent[v][1]) +
           "," + format_double(table.percent[v][2]) + "," +
           format_double(table.percent[v][3]) + "\n";
  }
  return out;
}

}  // namespace forumcast::eval
