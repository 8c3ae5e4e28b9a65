#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gvcpanel/matrix.hpp"
#include "gvcpanel/panel.hpp"

namespace gvcpanel::synth {

// Canonical generated variables, in the order the default moment targets are
// tabulated: dependent first, then the sector-level regressors, then the
// country-level controls.
const std::vector<std::string>& variable_names();

// Default calibration targets (means, sds, correlation matrix over
// variable_names() order) and an optional per-variable missingness profile
// mirroring the observation counts behind the default moments.
const std::map<std::string, double>& default_means();
const std::map<std::string, double>& default_sds();
num::Matrix default_correlation();
std::map<std::string, double> default_missing_rates();

struct SyntheticConfig {
  std::size_t n_countries = 27;
  std::size_t n_sectors = 13;
  panel::YearWindow years{};   // 2003..2020
  std::size_t n_regions = 0;   // 0 = cell-level panel; >0 splits jobs across regions

  std::map<std::string, double> target_means = default_means();
  std::map<std::string, double> target_sds = default_sds();
  num::Matrix target_correlation = default_correlation();

  // Structural coefficients on the regressor columns. Empty means "implied
  // by the correlation targets": the population projection of the dependent
  // on the nine regressors, which reproduces the dependent's target
  // correlations as well as a linear model can.
  std::map<std::string, double> planted_beta;

  // Fraction of cells masked per variable (missing completely at random).
  std::map<std::string, double> missing_rates;

  // Correlation between the structural error and the contemporaneous
  // idiosyncratic GVC innovation index (endogeneity), and between the error
  // and the previous period's index (breaks lag instruments on purpose).
  double endogeneity_rho = 0.0;
  double invalidity_rho = 0.0;

  // AR(1) persistence of every variable's latent score within its unit, so
  // lagged GVC terms are relevant first-stage instruments. Open (0,1).
  double instrument_strength = 0.6;

  std::uint64_t seed = 1;

  std::size_t n_years() const;
  std::size_t n_cells() const;
  // Throws gvcpanel::Error on out-of-range sizes, malformed targets,
  // unknown variable names, or rho combinations outside the unit ball.
  void validate() const;
};

// Parses "key = value" entries. Scalar keys: n_countries, n_sectors,
// n_regions, years (FIRST-LAST), seed, endogeneity_rho, invalidity_rho,
// instrument_strength, missing_profile (none|table). Per-variable keys:
// mean.VAR, sd.VAR, beta.VAR, missing.VAR, corr.VAR1.VAR2. Unknown keys are
// an error; context names the source for messages.
SyntheticConfig parse_synthetic_config(const std::map<std::string, std::string>& kv,
                                       const std::string& context);

// Everything the generator knows that an estimator must not see.
struct GroundTruth {
  std::map<std::string, double> beta;  // all regressors, zeros included
  double intercept = 0.0;
  double sigma_eps = 0.0;
  double endogeneity_rho = 0.0;
  double invalidity_rho = 0.0;
  double persistence = 0.0;
  std::map<std::string, double> country_fe;  // by label
  std::map<std::string, double> sector_fe;   // by code as text
  std::map<std::string, double> year_fe;     // by year as text
  std::vector<double> errors;                // structural error, aligned with panel rows
};

struct SyntheticPanel {
  panel::PanelDataset data;
  GroundTruth truth;
};

// Nearest-PSD-lite repair: eigenvalues clipped below at 1e-8, then the
// diagonal renormalized to ones. Throws when the most negative eigenvalue is
// beyond rounding damage (< -0.1), naming it.
num::Matrix repair_correlation(const num::Matrix& r);

// Deterministic draw of the calibrated panel: latent scores follow a
// stationary AR(1) with the target cross-sectional correlation at every
// period (country-level variables shared across a country's sectors),
// location-scale mapped to the target moments; log jobs built structurally
// from the planted betas, per-level fixed effects and an error tied to the
// contemporaneous GVC innovations by endogeneity_rho; counts are
// exp-rounded. Identical config (seed included) gives a byte-identical
// panel.
SyntheticPanel generate_calibrated(const SyntheticConfig& config);

// Writes the fixture corpus for the file pipeline into dir: projects.csv,
// correspondence.csv, covariates.csv, accounts.csv (reverse-engineered so
// the indicator formulas reproduce the panel's GVC columns), and panel.csv.
void export_corpus(const SyntheticPanel& sp, const std::filesystem::path& dir);

// Raw sector label used in projects.csv / correspondence.csv for a code.
std::string sector_label(int code);

}  // namespace gvcpanel::synth
