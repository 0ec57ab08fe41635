// Command-line front end: generate synthetic data, build the monthly
// indicator panel, run the rolling forecast comparison, and emit the
// causality and weight-quartile tables.
//
// Exit codes: 0 success, 2 invalid input (files, flags, config),
// 3 computation failure on well-formed input.

#include <iostream>

#include "CLI11.hpp"

#include "forumcast/forumcast.hpp"

namespace {

using forumcast::pipeline::RunConfig;

struct CliState {
  RunConfig cfg;
  std::string config_path;
  std::vector<std::string> model_names;
  std::string deseason = "classical_additive";
  std::string start = "2007-01";
};

void add_options(CLI::App& app, CliState& st) {
  auto& cfg = st.cfg;
  app.add_option("--config", st.config_path,
                 "JSON config applied over the flags (strongest precedence)");
  app.add_option("--data-dir", cfg.data_dir, "Directory of the input files");
  app.add_option("--out-dir", cfg.out_dir,
                 "Output directory (defaults to --data-dir)");
  app.add_option("--lexicon", cfg.lexicon, "Sentiment lexicon CSV path");
  app.add_option("--city", cfg.cities, "City filter (repeatable)");
  app.add_option("--seed", cfg.synthetic.seed, "Generator seed");
  app.add_option("--start", st.start, "First month, YYYY-MM");
  app.add_option("--months", cfg.synthetic.n_months, "Number of months");
  app.add_option("--n-users", cfg.synthetic.n_users, "Synthetic user count");
  app.add_option("--posts-per-month", cfg.synthetic.posts_per_month,
                 "Mean synthetic posts per month");
  app.add_option("--hub-fraction", cfg.synthetic.hub_fraction,
                 "Share of synthetic users acting as hubs");
  app.add_option("--vocabulary-size", cfg.synthetic.vocabulary_size,
                 "Synthetic vocabulary size");
  app.add_option("--latent-rho", cfg.synthetic.latent_rho,
                 "AR(1) coefficient of the latent factor");
  app.add_option("--factor-loading", cfg.synthetic.factor_loading,
                 "Target loading on the lagged latent factor");
  app.add_option("--noise-sd", cfg.synthetic.noise_sd,
                 "Target innovation standard deviation");
  app.add_option("--target-ar", cfg.synthetic.target_ar,
                 "Target AR coefficients");
  app.add_option("--target-mean", cfg.synthetic.target_mean,
                 "Target level around which the series evolves");
  app.add_option("--seasonal-amplitude", cfg.synthetic.seasonal_amplitude,
                 "Relative seasonal swing of the target");
  app.add_option("--synthetic-city", cfg.synthetic.city,
                 "City name used by the generator");
  app.add_flag("--post-weighted-demographics",
               cfg.post_weighted_demographics,
               "Weight demographics by in-month post count");
  app.add_option("--horizons", cfg.horizons, "Forecast horizons");
  app.add_option("--window", cfg.window, "Rolling window length in months");
  app.add_option("--models", st.model_names,
                 "Model names (AR, FAAR, BRIDGE-GF, FABM-GF, BRIDGE-OTH-GF)");
  app.add_option("--p-max", cfg.model.p_max, "Maximum autoregressive order");
  app.add_option("--q-max", cfg.model.q_max, "Maximum exogenous lag order");
  app.add_option("--r-max", cfg.model.r_max, "Maximum retained factors");
  app.add_option("--cov-threshold", cfg.model.cov_threshold,
                 "Covariance share needed to retain a factor");
  app.add_option("--bridge-gf-first-lag", cfg.model.bridge_gf_first_lag,
                 "First exogenous lag of the bridge model");
  app.add_option("--fabm-gf-first-lag", cfg.model.fabm_gf_first_lag,
                 "First exogenous lag of the factor-bridge model");
  app.add_option("--eval-begin", cfg.eval_begin,
                 "First evaluated target month, YYYY-MM");
  app.add_option("--eval-end", cfg.eval_end,
                 "Last evaluated target month, YYYY-MM");
  app.add_option("--alpha", cfg.alpha, "Confidence-set significance level");
  app.add_option("--n-boot", cfg.n_boot, "Bootstrap replicates");
  app.add_option("--block-length", cfg.block_length,
                 "Bootstrap block length (0 = automatic)");
  app.add_option("--mcs-seed", cfg.mcs_seed, "Bootstrap seed");
  app.add_option("--granger-max-lag", cfg.granger_max_lag,
                 "Causality table maximum lag");
  app.add_flag("--granger-on-differences,!--granger-on-levels",
               cfg.granger_on_differences,
               "Run the causality test on differenced series");
  app.add_option("--deseason", st.deseason,
                 "Seasonal adjustment: stl_loess or classical_additive")
      ->check(CLI::IsMember({"stl_loess", "classical_additive"}));
  app.add_option("--weights-horizon", cfg.weights_horizon,
                 "Horizon used by the weight-quartile analysis");
}

// Flags were parsed straight into cfg; resolve the string-typed ones, then
// let an explicit config file override everything.
void finalize(CliState& st) {
  const auto ym = forumcast::YearMonth::parse(st.start);
  if (!ym) {
    throw forumcast::ValidationError("--start must be YYYY-MM");
  }
  st.cfg.synthetic.start = *ym;
  if (!st.model_names.empty()) {
    st.cfg.model_kinds.clear();
    for (const auto& name : st.model_names) {
      const auto kind = forumcast::models::parse_model(name);
      if (!kind) {
        throw forumcast::ValidationError("unknown model '" + name + "'");
      }
      st.cfg.model_kinds.push_back(*kind);
    }
  }
  st.cfg.deseason = st.deseason == "classical_additive"
                        ? forumcast::tsprep::DeseasonMethod::classical_additive
                        : forumcast::tsprep::DeseasonMethod::stl_loess;
  if (!st.config_path.empty()) {
    forumcast::pipeline::apply_config_file(st.cfg, st.config_path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Turns threaded-forum logs into monthly interaction indicators and "
      "runs a rolling-window forecast comparison against a monthly target "
      "series."};
  app.require_subcommand(1);
  app.fallthrough();

  CliState st;
  add_options(app, st);

  auto* generate = app.add_subcommand(
      "generate", "Write a synthetic forum corpus and monthly series");
  auto* indicators = app.add_subcommand(
      "indicators", "Build the monthly indicator panel from a corpus");
  auto* forecast = app.add_subcommand(
      "forecast", "Rolling forecasts, accuracy table and confidence set");
  auto* granger = app.add_subcommand(
      "granger", "Panel causality table for every indicator");
  auto* weights = app.add_subcommand(
      "weights", "Quartile analysis of the factor weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    finalize(st);
    if (generate->parsed()) {
      forumcast::pipeline::run_generate(st.cfg);
    } else if (indicators->parsed()) {
      forumcast::pipeline::run_indicators(st.cfg);
    } else if (forecast->parsed()) {
      forumcast::pipeline::run_forecast(st.cfg);
    } else if (granger->parsed()) {
      forumcast::pipeline::run_granger(st.cfg);
    } else if (weights->parsed()) {
      forumcast::pipeline::run_weights(st.cfg);
    }
  } catch (const forumcast::ValidationError& e) {
    std::cerr << "error (invalid input): " << e.what() << "\n";
    return 2;
  } catch (const forumcast::ComputationError& e) {
    std::cerr << "error (computation): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
