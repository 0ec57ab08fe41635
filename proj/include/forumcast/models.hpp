#pragma once

// Forecasting models: direct h-step autoregression with BIC lag selection,
// partial-least-squares factor extraction from step-one residuals, bridge
// regressions with distributed lags of an exogenous indicator, and the
// rolling-window pseudo-real-time engine that ties them together.
//
// Conventions shared by every fit routine:
//  * series are passed as time-indexed arrays; a regression row with target
//    date t uses only regressors dated t-h and earlier;
//  * sample rows [t0, t1] are fixed across the candidate grid of one fit, so
//    information criteria are comparable;
//  * BIC = n*ln(ssr/n) + k*ln(n), k counting every coefficient; ties break
//    toward smaller p, then smaller q, then smaller R;
//  * an intercept is always included.

#include <Eigen/Dense>
#include <set>

#include "core.hpp"
#include "linreg.hpp"
#include "tsprep.hpp"

namespace forumcast::models {

// ---------------------------------------------------------------------------
// Model kinds
// ---------------------------------------------------------------------------

enum class ModelKind { ar, faar, bridge_gf, fabm_gf, bridge_oth_gf };

inline constexpr std::array<std::pair<ModelKind, std::string_view>, 5>
    kModelNames = {{{ModelKind::ar, "AR"},
                    {ModelKind::faar, "FAAR"},
                    {ModelKind::bridge_gf, "BRIDGE-GF"},
                    {ModelKind::fabm_gf, "FABM-GF"},
                    {ModelKind::bridge_oth_gf, "BRIDGE-OTH-GF"}}};

inline std::string model_name(ModelKind k) {
  for (const auto& [kind, name] : kModelNames) {
    if (kind == k) return std::string(name);
  }
  return "?";
}

inline std::optional<ModelKind> parse_model(std::string_view s) {
  for (const auto& [kind, name] : kModelNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

struct ModelSettings {
  int p_max = 13;
  int q_max = 13;
  int r_max = 10;
  double cov_threshold = 0.20;
  int bridge_gf_first_lag = 0;  // distributed lags start at the origin value
  int fabm_gf_first_lag = 1;    // the factor-bridge variant starts one back
};

// ---------------------------------------------------------------------------
// Design matrices
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kRankTol = 1e-10;

struct DesignSpec {
  int h = 1;
  int p = 0;               // autoregressive lags
  int q = -1;              // exogenous max lag; -1 = no exogenous block
  int k_first = 0;         // exogenous first lag
  const std::vector<double>* gf = nullptr;
  const std::vector<std::vector<double>>* z = nullptr;  // extra columns

  int gf_cols() const { return q >= k_first && gf ? q - k_first + 1 : 0; }
  int z_cols() const { return z ? static_cast<int>(z->size()) : 0; }
  int cols() const { return 1 + p + gf_cols() + z_cols(); }
};

// Rows t in [t0, t1]: [1 | y_{t-h}..y_{t-h-p+1} | gf_{t-h-k}, k=k_first..q |
// z_{t-h}].
inline Eigen::MatrixXd build_design(const std::vector<double>& y,
                                    const DesignSpec& d, int t0, int t1) {
  const int n = t1 - t0 + 1;
  Eigen::MatrixXd X(n, d.cols());
  for (int t = t0; t <= t1; ++t) {
    const int r = t - t0;
    int c = 0;
    X(r, c++) = 1.0;
    for (int i = 1; i <= d.p; ++i) {
      X(r, c++) = y[static_cast<std::size_t>(t - d.h - i + 1)];
    }
    for (int k = d.k_first; k <= d.q && d.gf; ++k) {
      X(r, c++) = (*d.gf)[static_cast<std::size_t>(t - d.h - k)];
    }
    for (int zc = 0; zc < d.z_cols(); ++zc) {
      X(r, c++) = (*d.z)[static_cast<std::size_t>(zc)]
                        [static_cast<std::size_t>(t - d.h)];
    }
  }
  return X;
}

// The regressor vector that forecasts y_{origin+h}: same layout, dated at the
// origin.
inline Eigen::VectorXd forecast_regressors(const std::vector<double>& y,
                                           const DesignSpec& d, int origin) {
  Eigen::VectorXd x(d.cols());
  int c = 0;
  x(c++) = 1.0;
  for (int i = 1; i <= d.p; ++i) {
    x(c++) = y[static_cast<std::size_t>(origin - i + 1)];
  }
  for (int k = d.k_first; k <= d.q && d.gf; ++k) {
    x(c++) = (*d.gf)[static_cast<std::size_t>(origin - k)];
  }
  for (int zc = 0; zc < d.z_cols(); ++zc) {
    x(c++) = (*d.z)[static_cast<std::size_t>(zc)]
                   [static_cast<std::size_t>(origin)];
  }
  return x;
}

// Gram-matrix machinery for fast BIC grids: the widest design is assembled
// once; each candidate solves its normal equations on a submatrix.
struct GramGrid {
  Eigen::MatrixXd X;   // widest design
  Eigen::MatrixXd G;   // X'X
  Eigen::VectorXd g;   // X'y
  double yy = 0.0;
  int n = 0;
};

inline GramGrid make_gram(const std::vector<double>& y, const DesignSpec& d,
                          int t0, int t1) {
  GramGrid grid;
  grid.X = build_design(y, d, t0, t1);
  grid.n = static_cast<int>(grid.X.rows());
  Eigen::VectorXd target(grid.n);
  for (int t = t0; t <= t1; ++t) {
    target(t - t0) = y[static_cast<std::size_t>(t)];
  }
  grid.G = grid.X.transpose() * grid.X;
  grid.g = grid.X.transpose() * target;
  grid.yy = target.squaredNorm();
  return grid;
}

struct GramSolve {
  double ssr = 0.0;
  bool rank_ok = false;
};

// Solves the normal equations on the column subset `idx`; reports SSR and
// whether the subset looked full-rank (used to screen BIC candidates).
inline GramSolve gram_ssr(const GramGrid& grid, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd Gs(k, k);
  Eigen::VectorXd gs(k);
  for (int a = 0; a < k; ++a) {
    gs(a) = grid.g(idx[static_cast<std::size_t>(a)]);
    for (int b = 0; b < k; ++b) {
      Gs(a, b) = grid.G(idx[static_cast<std::size_t>(a)],
                        idx[static_cast<std::size_t>(b)]);
    }
  }
  GramSolve out;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
  if (ldlt.info() != Eigen::Success) return out;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0)) return out;
  for (int i = 0; i < k; ++i) {
    if (std::abs(d(i)) <= kRankTol * dmax) return out;
  }
  const Eigen::VectorXd b = ldlt.solve(gs);
  out.ssr = std::max(0.0, grid.yy - b.dot(gs));
  out.rank_ok = true;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Autoregression, direct h-step form
// ---------------------------------------------------------------------------

struct ARFit {
  int p = 0;
  double intercept = 0.0;
  Eigen::VectorXd phi;
  Eigen::VectorXd residuals;
  double sigma2 = 0.0;  // ssr / n
  double bic = 0.0;
  bool rank_flag = false;  // a rank-deficient design had to be accepted
};

// BIC selection of p over a common sample. Rows [t0, t1] must satisfy
// t0 - h - p_max + 1 >= 0; every candidate is fit on the same rows.
inline ARFit fit_ar_bic(const std::vector<double>& y, int h, int p_max, int t0,
                        int t1) {
  if (p_max < 1) throw ValidationError("p_max must be >= 1");
  if (t0 - h - p_max + 1 < 0 || t1 >= static_cast<int>(y.size()) || t0 > t1) {
    throw ValidationError("autoregression sample out of range");
  }
  const int n = t1 - t0 + 1;
  if (n < p_max + 3) {
    throw ValidationError("autoregression window too short for p_max");
  }

  detail::DesignSpec widest;
  widest.h = h;
  widest.p = p_max;
  const auto grid = detail::make_gram(y, widest, t0, t1);

  int best_p = -1;
  double best_bic = std::numeric_limits<double>::infinity();
  bool any_rank_ok = false;
  for (int p = 1; p <= p_max; ++p) {
    std::vector<int> idx(static_cast<std::size_t>(p + 1));
    for (int i = 0; i <= p; ++i) idx[static_cast<std::size_t>(i)] = i;
    const auto sol = detail::gram_ssr(grid, idx);
    if (!sol.rank_ok) continue;
    any_rank_ok = true;
    const double bic = linreg::bic_gaussian(sol.ssr, n, p + 1);
    if (bic < best_bic) {
      best_bic = bic;
      best_p = p;
    }
  }
  bool rank_flag = false;
  if (!any_rank_ok) {
    // Degenerate data (for example a constant window): fall back to the
    // smallest order with a pivoted solve and flag it.
    best_p = 1;
    rank_flag = true;
  }

  detail::DesignSpec chosen;
  chosen.h = h;
  chosen.p = best_p;
  const Eigen::MatrixXd X = detail::build_design(y, chosen, t0, t1);
  Eigen::VectorXd target(n);
  for (int t = t0; t <= t1; ++t) target(t - t0) = y[static_cast<std::size_t>(t)];
  const auto fit = linreg::ols(X, target);

  ARFit out;
  out.p = best_p;
  out.intercept = fit.coef(0);
  out.phi = fit.coef.segment(1, best_p);
  out.residuals = fit.residuals;
  out.sigma2 = fit.ssr / static_cast<double>(n);
  out.bic = linreg::bic_gaussian(fit.ssr, n, best_p + 1);
  out.rank_flag = rank_flag || fit.rank_deficient;
  return out;
}

// Direct h-step point forecast: intercept + sum_i phi_i * y[origin+1-i].
inline double ar_forecast(const ARFit& fit, const std::vector<double>& y,
                          int origin) {
  if (origin - fit.p + 1 < 0 || origin >= static_cast<int>(y.size())) {
    throw ValidationError("forecast origin out of range");
  }
  double acc = fit.intercept;
  for (int i = 1; i <= fit.p; ++i) {
    acc += fit.phi(i - 1) * y[static_cast<std::size_t>(origin - i + 1)];
  }
  return acc;
}

// Convenience overload: `recent` holds the window with the origin last.
inline double ar_forecast(const ARFit& fit,
                          const std::vector<double>& recent) {
  return ar_forecast(fit, recent, static_cast<int>(recent.size()) - 1);
}

// ---------------------------------------------------------------------------
// Partial least squares (SIMPLS, single response)
// ---------------------------------------------------------------------------

struct FactorSet {
  int r = 0;                        // retained components
  Eigen::MatrixXd weights;          // predictors × r; scores = X * weights
  Eigen::MatrixXd factors;          // rows × r, unit-norm scores
  Eigen::VectorXd explained_share;  // per retained component, non-increasing
  int candidates = 0;               // components extracted before retention
  std::vector<int> dropped_columns; // zero-variance predictors (zero weights)
};

// SIMPLS with incremental deflation of the cross-covariance vector. The
// share of component a is c_a^2 / sum_b c_b^2 where c_a is the norm of the
// residual cross-covariance just before extraction — non-increasing by
// construction. Retention: every component whose share reaches `threshold`,
// at least the first, at most r_max.
inline FactorSet fit_pls(const Eigen::VectorXd& residuals,
                         const Eigen::MatrixXd& X_in, int r_max = 10,
                         double threshold = 0.20) {
  const int n = static_cast<int>(X_in.rows());
  const int m_all = static_cast<int>(X_in.cols());
  if (n != residuals.size() || n < 3 || m_all < 1) {
    throw ValidationError("factor extraction needs aligned, non-trivial inputs");
  }

  FactorSet out;

  // Drop zero-variance predictors.
  std::vector<int> kept;
  for (int j = 0; j < m_all; ++j) {
    const double mean = X_in.col(j).mean();
    const double var =
        (X_in.col(j).array() - mean).square().sum() / static_cast<double>(n);
    if (std::sqrt(var) <= 1e-12 * (1.0 + std::abs(mean))) {
      out.dropped_columns.push_back(j);
    } else {
      kept.push_back(j);
    }
  }
  if (kept.empty()) {
    throw ComputationError("all predictor columns are degenerate");
  }
  Eigen::MatrixXd X(n, static_cast<int>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    X.col(static_cast<int>(j)) = X_in.col(kept[j]);
  }
  const int m = static_cast<int>(kept.size());

  const int a_max = std::max(1, std::min({r_max, m, n - 1}));
  Eigen::VectorXd s = X.transpose() * residuals;
  const double scale = s.norm();
  if (!(scale > 1e-12 * X.norm() * residuals.norm())) {
    throw ComputationError("residuals are orthogonal to every predictor");
  }

  Eigen::MatrixXd weights(m, a_max), scores(n, a_max), vbasis(m, a_max);
  Eigen::VectorXd cov_norm(a_max);
  int a = 0;
  for (; a < a_max; ++a) {
    const double cn = s.norm();
    if (cn <= 1e-12 * scale) break;
    Eigen::VectorXd t = X * s;
    const double tn = t.norm();
    if (tn <= 1e-12 * scale) break;
    cov_norm(a) = cn;
    weights.col(a) = s / tn;
    scores.col(a) = t / tn;
    Eigen::VectorXd p = X.transpose() * scores.col(a);
    // Orthonormalize the loading against earlier ones, then deflate.
    Eigen::VectorXd v = p;
    for (int b = 0; b < a; ++b) {
      v -= vbasis.col(b) * vbasis.col(b).dot(p);
    }
    const double vn = v.norm();
    if (vn <= 1e-12 * p.norm()) {
      ++a;  // component is valid; no further directions remain
      break;
    }
    vbasis.col(a) = v / vn;
    s -= vbasis.col(a) * vbasis.col(a).dot(s);
  }
  if (a == 0) {
    throw ComputationError("no usable factor direction");
  }

  out.candidates = a;
  const double total = cov_norm.head(a).squaredNorm();
  Eigen::VectorXd shares =
      cov_norm.head(a).array().square() / total;

  int r = 0;
  for (int i = 0; i < a; ++i) {
    if (shares(i) >= threshold) {
      ++r;
    } else {
      break;  // shares are non-increasing
    }
  }
  r = std::max(1, std::min(r, r_max));

  out.r = r;
  out.factors = scores.leftCols(r);
  out.explained_share = shares.head(r);
  out.weights = Eigen::MatrixXd::Zero(m_all, r);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.weights.row(kept[j]) = weights.row(static_cast<int>(j)).head(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bridge-family regressions (also covers plain AR as q = -1)
// ---------------------------------------------------------------------------

struct BridgeFit {
  ARFit ar;                // joint-regression intercept/phi/residuals/bic
  int q = -1;              // exogenous max lag; -1 when no exogenous block
  int k_first = 0;
  Eigen::VectorXd gamma;   // exogenous-lag coefficients (empty when q = -1)
  Eigen::VectorXd zeta;    // simple-covariate coefficients (empty when unused)
};

namespace detail {

inline std::vector<int> candidate_columns(const DesignSpec& widest, int p,
                                          int q) {
  std::vector<int> idx;
  idx.push_back(0);
  for (int i = 1; i <= p; ++i) idx.push_back(i);
  const int gf_base = 1 + widest.p;
  for (int k = widest.k_first; k <= q && widest.gf; ++k) {
    idx.push_back(gf_base + (k - widest.k_first));
  }
  const int z_base = gf_base + widest.gf_cols();
  for (int zc = 0; zc < widest.z_cols(); ++zc) idx.push_back(z_base + zc);
  return idx;
}

}  // namespace detail

// Joint BIC selection over p (and q when an exogenous series is present),
// on the common sample [t0, t1]. `z` columns, when given, enter every
// candidate dated t-h. Rank-deficient candidates are skipped unless no
// candidate is full-rank, in which case the grid runs with pivoted solves
// and the fit is flagged.
inline BridgeFit fit_bridge_core(const std::vector<double>& y,
                                 const std::vector<double>* gf,
                                 const std::vector<std::vector<double>>* z,
                                 int h, int k_first,
                                 const ModelSettings& settings, int t0,
                                 int t1) {
  const int p_max = settings.p_max;
  const int q_max = gf ? settings.q_max : -1;
  if (gf && q_max < k_first) {
    throw ValidationError("exogenous lag range is empty");
  }
  const int depth = std::max(p_max - 1, gf ? q_max : 0);
  if (t0 - h - depth < 0 || t1 >= static_cast<int>(y.size()) || t0 > t1) {
    throw ValidationError("regression sample out of range");
  }
  const int n = t1 - t0 + 1;

  detail::DesignSpec widest;
  widest.h = h;
  widest.p = p_max;
  widest.q = q_max;
  widest.k_first = k_first;
  widest.gf = gf;
  widest.z = z;
  if (n <= widest.cols() / 2) {
    throw ValidationError("regression window too short for the model grid");
  }
  const auto grid = detail::make_gram(y, widest, t0, t1);

  struct Best {
    int p = -1, q = -1;
    double bic = std::numeric_limits<double>::infinity();
  } best;
  bool any_rank_ok = false;
  const int q_lo = gf ? k_first : -1;
  const int q_hi = gf ? q_max : -1;
  for (int p = 1; p <= p_max; ++p) {
    for (int q = q_lo; q <= q_hi; ++q) {
      const auto idx = detail::candidate_columns(widest, p, q);
      const auto sol = detail::gram_ssr(grid, idx);
      if (sol.rank_ok) {
        any_rank_ok = true;
        const double bic =
            linreg::bic_gaussian(sol.ssr, n, static_cast<int>(idx.size()));
        if (bic < best.bic) {
          best = {p, q, bic};
        }
      }
      if (!gf) break;  // single pass when there is no exogenous block
    }
  }
  bool rank_flag = false;
  if (!any_rank_ok) {
    // Second pass with pivoted least squares: exactly collinear columns get
    // zero coefficients and BIC still ranks the candidates.
    rank_flag = true;
    for (int p = 1; p <= p_max; ++p) {
      for (int q = q_lo; q <= q_hi; ++q) {
        detail::DesignSpec cand = widest;
        cand.p = p;
        cand.q = q;
        const Eigen::MatrixXd X = detail::build_design(y, cand, t0, t1);
        Eigen::VectorXd target(n);
        for (int t = t0; t <= t1; ++t) {
          target(t - t0) = y[static_cast<std::size_t>(t)];
        }
        const auto fit = linreg::ols(X, target);
        const double bic =
            linreg::bic_gaussian(fit.ssr, n, static_cast<int>(X.cols()));
        if (bic < best.bic) {
          best = {p, q, bic};
        }
        if (!gf) break;
      }
    }
  }
  if (best.p < 0) throw ComputationError("no admissible regression candidate");

  detail::DesignSpec chosen = widest;
  chosen.p = best.p;
  chosen.q = best.q;
  const Eigen::MatrixXd X = detail::build_design(y, chosen, t0, t1);
  Eigen::VectorXd target(n);
  for (int t = t0; t <= t1; ++t) target(t - t0) = y[static_cast<std::size_t>(t)];
  const auto fit = linreg::ols(X, target);

  BridgeFit out;
  out.ar.p = best.p;
  out.ar.intercept = fit.coef(0);
  out.ar.phi = fit.coef.segment(1, best.p);
  out.ar.residuals = fit.residuals;
  out.ar.sigma2 = fit.ssr / static_cast<double>(n);
  out.ar.bic = best.bic;
  out.ar.rank_flag = rank_flag || fit.rank_deficient;
  out.q = best.q;
  out.k_first = k_first;
  const int gf_cols = chosen.gf_cols();
  out.gamma = fit.coef.segment(1 + best.p, gf_cols);
  out.zeta = fit.coef.segment(1 + best.p + gf_cols, chosen.z_cols());
  return out;
}

inline BridgeFit fit_bridge_gf(const std::vector<double>& y,
                               const std::vector<double>& gf, int h,
                               const ModelSettings& settings, int t0, int t1) {
  return fit_bridge_core(y, &gf, nullptr, h, settings.bridge_gf_first_lag,
                         settings, t0, t1);
}

inline BridgeFit fit_bridge_oth_gf(
    const std::vector<double>& y, const std::vector<double>& gf,
    const std::vector<std::vector<double>>& simple_metrics, int h,
    const ModelSettings& settings, int t0, int t1) {
  if (simple_metrics.size() != 3) {
    throw ValidationError("the robustness bridge expects exactly 3 extra series");
  }
  return fit_bridge_core(y, &gf, &simple_metrics, h,
                         settings.bridge_gf_first_lag, settings, t0, t1);
}

inline detail::DesignSpec spec_of(const BridgeFit& fit, int h,
                                  const std::vector<double>* gf,
                                  const std::vector<std::vector<double>>* z) {
  detail::DesignSpec d;
  d.h = h;
  d.p = fit.ar.p;
  d.q = fit.q;
  d.k_first = fit.k_first;
  d.gf = gf;
  d.z = z;
  return d;
}

inline double bridge_forecast(const BridgeFit& fit,
                              const std::vector<double>& y,
                              const std::vector<double>* gf,
                              const std::vector<std::vector<double>>* z, int h,
                              int origin) {
  const auto d = spec_of(fit, h, gf, z);
  const Eigen::VectorXd x = detail::forecast_regressors(y, d, origin);
  Eigen::VectorXd coef(d.cols());
  int c = 0;
  coef(c++) = fit.ar.intercept;
  for (int i = 0; i < fit.ar.p; ++i) coef(c++) = fit.ar.phi(i);
  for (int i = 0; i < fit.gamma.size(); ++i) coef(c++) = fit.gamma(i);
  for (int i = 0; i < fit.zeta.size(); ++i) coef(c++) = fit.zeta(i);
  return x.dot(coef);
}

// ---------------------------------------------------------------------------
// Factor-augmented fits
// ---------------------------------------------------------------------------

struct FactorAugmentedFit {
  BridgeFit base;               // joint coefficients after the factor refit
  FactorSet factors;
  Eigen::VectorXd xi;           // factor coefficients
  Eigen::MatrixXd x_projection; // base_cols × m: predictor part explained by
                                // the base regressors (removed from X)
  bool factor_fallback = false; // factors unavailable; base model used alone
};

namespace detail {

// Shared body of the factor-augmented fits. `step1` is the already selected
// base fit; X holds standardized predictors as full-length time series rows.
inline FactorAugmentedFit augment_with_factors(
    const BridgeFit& step1, const std::vector<double>& y,
    const Eigen::MatrixXd& X, const std::vector<double>* gf,
    const std::vector<std::vector<double>>* z, int h,
    const ModelSettings& settings, int t0, int t1) {
  FactorAugmentedFit out;
  out.base = step1;

  const int n = t1 - t0 + 1;
  const auto dspec = spec_of(step1, h, gf, z);
  const Eigen::MatrixXd W = build_design(y, dspec, t0, t1);
  const int base_cols = static_cast<int>(W.cols());

  // Predictor rows dated t-h for each sample row.
  Eigen::MatrixXd Xrows(n, X.cols());
  for (int t = t0; t <= t1; ++t) {
    Xrows.row(t - t0) = X.row(t - h);
  }

  // Residualize the predictors on the base design so the extracted factors
  // are orthogonal to the base columns by construction.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> wqr(W);
  out.x_projection = wqr.solve(Xrows);
  const Eigen::MatrixXd Xperp = Xrows - W * out.x_projection;

  const int r_allowed =
      std::min(settings.r_max, n - base_cols - 2);
  if (r_allowed < 1) {
    out.factor_fallback = true;
    return out;
  }
  try {
    out.factors = fit_pls(step1.ar.residuals, Xperp, r_allowed,
                          settings.cov_threshold);
  } catch (const ComputationError&) {
    out.factor_fallback = true;
    return out;
  }

  // Joint refit on [base design | factors].
  Eigen::MatrixXd D(n, base_cols + out.factors.r);
  D.leftCols(base_cols) = W;
  D.rightCols(out.factors.r) = out.factors.factors;
  Eigen::VectorXd target(n);
  for (int t = t0; t <= t1; ++t) target(t - t0) = y[static_cast<std::size_t>(t)];
  const auto fit = linreg::ols(D, target);

  out.base.ar.intercept = fit.coef(0);
  out.base.ar.phi = fit.coef.segment(1, step1.ar.p);
  const int gf_cols = dspec.gf_cols();
  out.base.gamma = fit.coef.segment(1 + step1.ar.p, gf_cols);
  out.base.zeta =
      fit.coef.segment(1 + step1.ar.p + gf_cols, dspec.z_cols());
  out.xi = fit.coef.tail(out.factors.r);
  out.base.ar.residuals = fit.residuals;
  out.base.ar.sigma2 = fit.ssr / static_cast<double>(n);
  out.base.ar.bic =
      linreg::bic_gaussian(fit.ssr, n, static_cast<int>(D.cols()));
  out.base.ar.rank_flag = step1.ar.rank_flag || fit.rank_deficient;
  return out;
}

}  // namespace detail

// Three-step factor-augmented autoregression: (1) BIC-selected AR, (2) PLS
// factors from its residuals against the lagged standardized predictors,
// (3) joint refit of AR lags and retained factors.
inline FactorAugmentedFit fit_faar(const std::vector<double>& y,
                                   const Eigen::MatrixXd& X, int h,
                                   const ModelSettings& settings, int t0,
                                   int t1) {
  const ARFit ar = fit_ar_bic(y, h, settings.p_max, t0, t1);
  BridgeFit base;
  base.ar = ar;
  return detail::augment_with_factors(base, y, X, nullptr, nullptr, h,
                                      settings, t0, t1);
}

// Same three steps with the bridge regression as step one; by default the
// exogenous lags start at 1 here.
inline FactorAugmentedFit fit_fabm_gf(const std::vector<double>& y,
                                      const std::vector<double>& gf,
                                      const Eigen::MatrixXd& X, int h,
                                      const ModelSettings& settings, int t0,
                                      int t1) {
  const BridgeFit step1 = fit_bridge_core(
      y, &gf, nullptr, h, settings.fabm_gf_first_lag, settings, t0, t1);
  return detail::augment_with_factors(step1, y, X, &gf, nullptr, h, settings,
                                      t0, t1);
}

// ---------------------------------------------------------------------------
// Fixed-order fits: re-estimate with a recorded (p, q, R) instead of running
// the selection grids. Together with the stored factor weights these make
// any recorded forecast replayable bit-for-bit from the source data.
// ---------------------------------------------------------------------------

inline ARFit fit_ar_fixed(const std::vector<double>& y, int h, int p, int t0,
                          int t1) {
  if (p < 1 || t0 - h - p + 1 < 0 || t1 >= static_cast<int>(y.size()) ||
      t0 > t1) {
    throw ValidationError("fixed-order autoregression out of range");
  }
  const int n = t1 - t0 + 1;
  detail::DesignSpec d;
  d.h = h;
  d.p = p;
  const Eigen::MatrixXd X = detail::build_design(y, d, t0, t1);
  Eigen::VectorXd target(n);
  for (int t = t0; t <= t1; ++t) target(t - t0) = y[static_cast<std::size_t>(t)];
  const auto fit = linreg::ols(X, target);
  ARFit out;
  out.p = p;
  out.intercept = fit.coef(0);
  out.phi = fit.coef.segment(1, p);
  out.residuals = fit.residuals;
  out.sigma2 = fit.ssr / static_cast<double>(n);
  out.bic = linreg::bic_gaussian(fit.ssr, n, p + 1);
  out.rank_flag = fit.rank_deficient;
  return out;
}

inline BridgeFit fit_bridge_fixed(const std::vector<double>& y,
                                  const std::vector<double>* gf,
                                  const std::vector<std::vector<double>>* z,
                                  int h, int k_first, int p, int q, int t0,
                                  int t1) {
  const int n = t1 - t0 + 1;
  detail::DesignSpec d;
  d.h = h;
  d.p = p;
  d.q = q;
  d.k_first = k_first;
  d.gf = gf;
  d.z = z;
  if (p < 1 || t0 - h - std::max(p - 1, gf ? q : 0) < 0 ||
      t1 >= static_cast<int>(y.size()) || t0 > t1) {
    throw ValidationError("fixed-order regression out of range");
  }
  const Eigen::MatrixXd X = detail::build_design(y, d, t0, t1);
  Eigen::VectorXd target(n);
  for (int t = t0; t <= t1; ++t) target(t - t0) = y[static_cast<std::size_t>(t)];
  const auto fit = linreg::ols(X, target);
  BridgeFit out;
  out.ar.p = p;
  out.ar.intercept = fit.coef(0);
  out.ar.phi = fit.coef.segment(1, p);
  out.ar.residuals = fit.residuals;
  out.ar.sigma2 = fit.ssr / static_cast<double>(n);
  out.ar.bic = linreg::bic_gaussian(fit.ssr, n, static_cast<int>(X.cols()));
  out.ar.rank_flag = fit.rank_deficient;
  out.q = q;
  out.k_first = k_first;
  out.gamma = fit.coef.segment(1 + p, d.gf_cols());
  out.zeta = fit.coef.segment(1 + p + d.gf_cols(), d.z_cols());
  return out;
}

// Factor-augmented replay: fixed base orders and a fixed component count.
inline FactorAugmentedFit fit_faar_fixed(const std::vector<double>& y,
                                         const Eigen::MatrixXd& X, int h,
                                         int p, int r,
                                         const ModelSettings& settings, int t0,
                                         int t1) {
  BridgeFit base;
  base.ar = fit_ar_fixed(y, h, p, t0, t1);
  ModelSettings fixed = settings;
  fixed.r_max = r;
  fixed.cov_threshold = 0.0;
  return detail::augment_with_factors(base, y, X, nullptr, nullptr, h, fixed,
                                      t0, t1);
}

inline FactorAugmentedFit fit_fabm_gf_fixed(const std::vector<double>& y,
                                            const std::vector<double>& gf,
                                            const Eigen::MatrixXd& X, int h,
                                            int p, int q, int r,
                                            const ModelSettings& settings,
                                            int t0, int t1) {
  const BridgeFit step1 = fit_bridge_fixed(
      y, &gf, nullptr, h, settings.fabm_gf_first_lag, p, q, t0, t1);
  ModelSettings fixed = settings;
  fixed.r_max = r;
  fixed.cov_threshold = 0.0;
  return detail::augment_with_factors(step1, y, X, &gf, nullptr, h, fixed, t0,
                                      t1);
}

// Forecast from a factor-augmented fit: base part plus xi' * f(origin), the
// factor value computed from the origin-dated predictor row after removing
// the part explained by the base regressors.
inline double factor_forecast(const FactorAugmentedFit& fit,
                              const std::vector<double>& y,
                              const std::vector<double>* gf,
                              const Eigen::MatrixXd& X, int h, int origin) {
  double acc = bridge_forecast(fit.base, y, gf, nullptr, h, origin);
  if (fit.factor_fallback || fit.factors.r == 0) return acc;
  const auto d = spec_of(fit.base, h, gf, nullptr);
  const Eigen::VectorXd w = detail::forecast_regressors(y, d, origin);
  const Eigen::RowVectorXd xrow =
      X.row(origin) - w.transpose() * fit.x_projection;
  const Eigen::VectorXd f = (xrow * fit.factors.weights).transpose();
  acc += fit.xi.dot(f);
  return acc;
}

}  // namespace forumcast::models
