#include "gvcpanel/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <tuple>
#include <utility>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/log.hpp"
#include "gvcpanel/rng.hpp"

namespace gvcpanel::synth {

namespace {

constexpr std::size_t kVars = 10;
constexpr std::size_t kJobs = 0;

// Variables drawn per (country, sector, year) cell vs once per (country,
// year). The first three sector positions are the GVC terms whose
// idiosyncratic innovations drive the planted endogeneity.
constexpr std::array<std::size_t, 5> kSectorVars{1, 2, 3, 8, 9};
constexpr std::array<std::size_t, 4> kMacroVars{4, 5, 6, 7};
constexpr std::size_t kGvcInSector = 3;

const std::array<const char*, kVars> kNames = {
    "log_jobs",   "gvc_fwd",  "gvc_bwd",    "gvc_pos",         "gdp_growth",
    "log_gdp_pe", "trade_open", "educ_exp", "log_productivity", "log_wage"};

constexpr std::array<double, kVars> kDefaultMeans = {5.13, 0.67,   0.30, 1.00, 2.08,
                                                     11.47, 108.66, 5.00, 11.45, 21.22};
constexpr std::array<double, kVars> kDefaultSds = {1.73, 0.42,  0.36, 0.26, 3.76,
                                                   0.34, 49.31, 1.09, 1.57, 2.19};

// Lower triangle of the default correlation targets, same variable order.
constexpr std::array<std::array<double, kVars>, kVars> kDefaultCorr = {{
    {1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0.229, 1.0, 0, 0, 0, 0, 0, 0, 0, 0},
    {-0.058, 0.024, 1.0, 0, 0, 0, 0, 0, 0, 0},
    {-0.065, -0.012, -0.070, 1.0, 0, 0, 0, 0, 0, 0},
    {0.103, -0.064, 0.069, 0.020, 1.0, 0, 0, 0, 0, 0},
    {-0.222, 0.074, -0.085, 0.084, -0.269, 1.0, 0, 0, 0, 0},
    {-0.258, 0.050, -0.028, 0.104, -0.203, 0.441, 1.0, 0, 0, 0},
    {-0.066, 0.215, 0.173, 0.021, 0.185, 0.071, -0.017, 1.0, 0, 0},
    {0.078, 0.159, -0.002, -0.020, -0.087, 0.208, 0.291, 0.174, 1.0, 0},
    {0.2875, 0.1736, -0.2857, -0.0716, -0.1574, 0.2382, 0.1382, -0.1833, 0.7489, 1.0},
}};

// Share of cells left blank per variable, mirroring the observation counts
// the default moment targets were tabulated on.
const std::array<std::pair<const char*, double>, 6> kDefaultMissing = {{
    {"log_jobs", 0.0005},
    {"gvc_fwd", 0.0212},
    {"gvc_bwd", 0.0204},
    {"educ_exp", 0.0179},
    {"log_productivity", 0.2324},
    {"log_wage", 0.2271},
}};

std::size_t variable_index(const std::string& name, const std::string& what) {
  for (std::size_t i = 0; i < kVars; ++i)
    if (name == kNames[i]) return i;
  throw Error("[synth] " + what + " names unknown variable '" + name + "'");
}

double parse_number(const std::string& value, const std::string& context, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || !std::isfinite(v))
    throw Error("[synth] " + context + ": bad number for '" + key + "': " + value);
  return v;
}

std::size_t parse_count(const std::string& value, const std::string& context,
                        const std::string& key) {
  const double v = parse_number(value, context, key);
  if (v < 0 || v != std::floor(v) || v > 1e9)
    throw Error("[synth] " + context + ": '" + key + "' must be a small non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string fmt(double v) { return io::format_double(v); }

std::string country_label(std::size_t c) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "C%02u", static_cast<unsigned>(c + 1));
  return buf;
}

// Eigen-based factor F with F F^T = m, tolerant of semidefinite input.
num::Matrix psd_factor(const num::Matrix& m) {
  const num::SymmetricEigen eig = num::symmetric_eigen(m);
  const std::size_t n = m.rows();
  num::Matrix f(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::sqrt(std::max(eig.values[j], 0.0));
    for (std::size_t i = 0; i < n; ++i) f(i, j) = eig.vectors(i, j) * s;
  }
  return f;
}

num::Matrix submatrix(const num::Matrix& m, std::span<const std::size_t> rows,
                      std::span<const std::size_t> cols) {
  num::Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

struct Structural {
  std::array<double, kVars> beta{};  // beta[0] unused
  double intercept = 0.0;
  double sigma_eps = 0.0;
  double var_fe = 0.0;
};

// Resolve the structural coefficients and calibrate the error scale so the
// dependent hits its target variance. Empty planted map means the betas
// implied by the correlation targets (population projection of the
// dependent on the nine regressors).
Structural resolve_structural(const SyntheticConfig& cfg, const num::Matrix& r,
                              const std::array<double, kVars>& mean,
                              const std::array<double, kVars>& sd) {
  std::array<std::size_t, kVars - 1> zidx{};
  for (std::size_t i = 0; i + 1 < kVars; ++i) zidx[i] = i + 1;
  const num::Matrix rzz = submatrix(r, zidx, zidx);

  Structural out;
  if (cfg.planted_beta.empty()) {
    const num::PdInverse inv = num::invert_pd(rzz);
    std::vector<double> rzy(kVars - 1);
    for (std::size_t i = 0; i + 1 < kVars; ++i) rzy[i] = r(zidx[i], kJobs);
    const std::vector<double> bu = num::multiply(inv.inverse, rzy);
    for (std::size_t i = 0; i + 1 < kVars; ++i) out.beta[zidx[i]] = sd[kJobs] * bu[i] / sd[zidx[i]];
  } else {
    for (const auto& [name, b] : cfg.planted_beta) out.beta[variable_index(name, "planted_beta")] = b;
  }

  double var_xb = 0.0;
  for (std::size_t i = 0; i + 1 < kVars; ++i)
    for (std::size_t j = 0; j + 1 < kVars; ++j)
      var_xb += out.beta[zidx[i]] * sd[zidx[i]] * rzz(i, j) * out.beta[zidx[j]] * sd[zidx[j]];

  const double sd_fe = 0.25 * sd[kJobs];
  auto fe_var = [&](std::size_t levels) {
    return levels < 2 ? 0.0 : sd_fe * sd_fe * (1.0 - 1.0 / static_cast<double>(levels));
  };
  out.var_fe = fe_var(cfg.n_countries) + fe_var(cfg.n_sectors) + fe_var(cfg.n_years());

  const double var_eps = sd[kJobs] * sd[kJobs] - var_xb - out.var_fe;
  if (var_eps <= 1e-9)
    throw Error("[synth] planted betas and fixed effects exhaust the dependent variance (" +
                fmt(var_xb + out.var_fe) + " explained vs target " +
                fmt(sd[kJobs] * sd[kJobs]) + ")");
  out.sigma_eps = std::sqrt(var_eps);

  out.intercept = mean[kJobs];
  for (std::size_t i = 0; i + 1 < kVars; ++i) out.intercept -= out.beta[zidx[i]] * mean[zidx[i]];
  return out;
}

// Demeaned per-level draws rescaled to hit the level variance exactly: the
// intercept carries the mean and the error calibration assumes this exact
// contribution.
std::vector<double> demeaned_draws(Rng& rng, std::size_t n, double s) {
  std::vector<double> v(n);
  if (n < 2) return v;  // single level is just a constant, absorbed
  double total = 0.0;
  for (double& x : v) {
    x = rng.normal();
    total += x;
  }
  double ssq = 0.0;
  for (double& x : v) {
    x -= total / static_cast<double>(n);
    ssq += x * x;
  }
  const double scale = ssq > 0.0 ? s * std::sqrt(static_cast<double>(n - 1) / ssq) : 0.0;
  for (double& x : v) x *= scale;
  return v;
}

// Solve lower^T x = rhs by back substitution, columnwise.
num::Matrix solve_lower_transposed(const num::Matrix& lower, const num::Matrix& rhs) {
  const std::size_t k = lower.rows();
  num::Matrix x(k, rhs.cols());
  for (std::size_t c = 0; c < rhs.cols(); ++c)
    for (std::size_t i = k; i-- > 0;) {
      double v = rhs(i, c);
      for (std::size_t j = i + 1; j < k; ++j) v -= lower(j, i) * x(j, c);
      x(i, c) = v / lower(i, i);
    }
  return x;
}

void center_columns(num::Matrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) -= mean;
  }
}

// Remove the in-sample projection of v onto [1 | cols] and restore the
// exact squared norm the variance calibration assumed. Chance correlation
// between auxiliary draws and the regressors would otherwise leak into the
// dependent's sample moments.
void orthogonalize_draws(std::vector<double>& v, const num::Matrix& cols, double target_ssq) {
  const std::size_t n = v.size();
  num::Matrix a(n, cols.cols() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (std::size_t j = 0; j < cols.cols(); ++j) a(i, j + 1) = cols(i, j);
  }
  const num::HouseholderQr qr(a, num::HouseholderQr::Mode::pivoted);
  const std::vector<double> proj = qr.project(v);
  double ssq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] -= proj[i];
    ssq += v[i] * v[i];
  }
  const double scale = ssq > 0.0 ? std::sqrt(target_ssq / ssq) : 0.0;
  for (double& x : v) x *= scale;
}

// Center the columns and apply one shared linear map so the sample
// covariance (divisor n) equals target exactly. A single map per block
// keeps the AR(1) persistence and any within-group sharing intact.
num::Matrix recolor_exact(const num::Matrix& m, const num::Matrix& target, const char* what) {
  num::Matrix c = m;
  center_columns(c);
  num::Matrix cov = num::gram(c);
  for (std::size_t i = 0; i < cov.rows(); ++i)
    for (std::size_t j = 0; j < cov.cols(); ++j) cov(i, j) /= static_cast<double>(m.rows());
  const num::CholeskyResult hat = num::try_cholesky(cov);
  if (!hat.ok)
    throw Error(std::string("[synth] panel too small to calibrate ") + what +
                " sample moments exactly");
  const num::Matrix lt = num::cholesky_lower(target);
  return num::multiply(c, solve_lower_transposed(hat.lower, lt.transposed()));
}

}  // namespace

const std::vector<std::string>& variable_names() {
  static const std::vector<std::string> names(kNames.begin(), kNames.end());
  return names;
}

const std::map<std::string, double>& default_means() {
  static const auto m = [] {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < kVars; ++i) out[kNames[i]] = kDefaultMeans[i];
    return out;
  }();
  return m;
}

const std::map<std::string, double>& default_sds() {
  static const auto m = [] {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < kVars; ++i) out[kNames[i]] = kDefaultSds[i];
    return out;
  }();
  return m;
}

num::Matrix default_correlation() {
  num::Matrix r(kVars, kVars);
  for (std::size_t i = 0; i < kVars; ++i)
    for (std::size_t j = 0; j <= i; ++j) r(i, j) = r(j, i) = kDefaultCorr[i][j];
  return r;
}

std::map<std::string, double> default_missing_rates() {
  std::map<std::string, double> out;
  for (const auto& [name, rate] : kDefaultMissing) out[name] = rate;
  return out;
}

std::size_t SyntheticConfig::n_years() const {
  return years.last < years.first ? 0 : static_cast<std::size_t>(years.last - years.first + 1);
}

std::size_t SyntheticConfig::n_cells() const { return n_countries * n_sectors * n_years(); }

void SyntheticConfig::validate() const {
  if (n_countries < 1 || n_countries > 99)
    throw Error("[synth] n_countries must be in 1..99 (labels C01..C99)");
  if (n_sectors < 1 || n_sectors > 89)
    throw Error("[synth] n_sectors must be in 1..89 (2-digit codes from 10)");
  if (n_regions > 9) throw Error("[synth] n_regions must be in 0..9");
  if (years.last < years.first) throw Error("[synth] year range is empty");

  for (std::size_t i = 0; i < kVars; ++i) {
    const std::string name = kNames[i];
    const auto m = target_means.find(name);
    const auto s = target_sds.find(name);
    if (m == target_means.end() || s == target_sds.end())
      throw Error("[synth] missing mean or sd target for '" + name + "'");
    if (!std::isfinite(m->second)) throw Error("[synth] mean target for '" + name + "' not finite");
    if (!std::isfinite(s->second) || s->second <= 0.0)
      throw Error("[synth] sd target for '" + name + "' must be positive");
  }
  for (const auto& entry : target_means) variable_index(entry.first, "target_means");
  for (const auto& entry : target_sds) variable_index(entry.first, "target_sds");

  if (target_correlation.rows() != kVars || target_correlation.cols() != kVars)
    throw Error("[synth] correlation target must be 10x10 over the canonical variables");
  for (std::size_t i = 0; i < kVars; ++i) {
    if (std::abs(target_correlation(i, i) - 1.0) > 1e-8)
      throw Error("[synth] correlation target diagonal must be 1");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(target_correlation(i, j) - target_correlation(j, i)) > 1e-8)
        throw Error("[synth] correlation target must be symmetric");
      if (std::abs(target_correlation(i, j)) > 1.0 + 1e-8)
        throw Error("[synth] correlation target entries must lie in [-1, 1]");
    }
  }

  for (const auto& [name, b] : planted_beta) {
    if (variable_index(name, "planted_beta") == kJobs)
      throw Error("[synth] planted_beta cannot target the dependent variable");
    if (!std::isfinite(b)) throw Error("[synth] planted beta for '" + name + "' not finite");
  }
  for (const auto& [name, rate] : missing_rates) {
    variable_index(name, "missing_rates");
    if (!(rate >= 0.0 && rate <= 0.95))
      throw Error("[synth] missing rate for '" + name + "' must be in [0, 0.95]");
  }

  if (!(std::abs(endogeneity_rho) <= 0.9))
    throw Error("[synth] endogeneity_rho must be in [-0.9, 0.9]");
  if (!(std::abs(invalidity_rho) <= 0.9))
    throw Error("[synth] invalidity_rho must be in [-0.9, 0.9]");
  if (endogeneity_rho * endogeneity_rho + invalidity_rho * invalidity_rho > 0.81)
    throw Error("[synth] endogeneity_rho and invalidity_rho jointly exceed the 0.9 ball");
  if (!(instrument_strength > 0.0 && instrument_strength < 1.0))
    throw Error("[synth] instrument_strength must lie strictly in (0, 1)");
}

SyntheticConfig parse_synthetic_config(const std::map<std::string, std::string>& kv,
                                       const std::string& context) {
  SyntheticConfig cfg;
  // Profile first so per-variable missing.* keys override it regardless of
  // map order.
  if (const auto it = kv.find("missing_profile"); it != kv.end()) {
    if (it->second == "table")
      cfg.missing_rates = default_missing_rates();
    else if (it->second != "none")
      throw Error("[synth] " + context + ": missing_profile must be none or table");
  }
  for (const auto& [key, value] : kv) {
    if (key == "n_countries") {
      cfg.n_countries = parse_count(value, context, key);
    } else if (key == "n_sectors") {
      cfg.n_sectors = parse_count(value, context, key);
    } else if (key == "n_regions") {
      cfg.n_regions = parse_count(value, context, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_count(value, context, key));
    } else if (key == "years") {
      const auto dash = value.find('-');
      if (dash == std::string::npos)
        throw Error("[synth] " + context + ": years must look like 2003-2020");
      cfg.years.first = static_cast<int>(parse_number(value.substr(0, dash), context, key));
      cfg.years.last = static_cast<int>(parse_number(value.substr(dash + 1), context, key));
    } else if (key == "endogeneity_rho") {
      cfg.endogeneity_rho = parse_number(value, context, key);
    } else if (key == "invalidity_rho") {
      cfg.invalidity_rho = parse_number(value, context, key);
    } else if (key == "instrument_strength") {
      cfg.instrument_strength = parse_number(value, context, key);
    } else if (key == "missing_profile") {
      // handled in the pre-pass above
    } else if (key.rfind("mean.", 0) == 0) {
      cfg.target_means[key.substr(5)] = parse_number(value, context, key);
    } else if (key.rfind("sd.", 0) == 0) {
      cfg.target_sds[key.substr(3)] = parse_number(value, context, key);
    } else if (key.rfind("beta.", 0) == 0) {
      cfg.planted_beta[key.substr(5)] = parse_number(value, context, key);
    } else if (key.rfind("missing.", 0) == 0) {
      cfg.missing_rates[key.substr(8)] = parse_number(value, context, key);
    } else if (key.rfind("corr.", 0) == 0) {
      const std::string rest = key.substr(5);
      const auto dot = rest.find('.');
      if (dot == std::string::npos)
        throw Error("[synth] " + context + ": corr keys look like corr.var_a.var_b");
      const std::size_t a = variable_index(rest.substr(0, dot), "corr key");
      const std::size_t b = variable_index(rest.substr(dot + 1), "corr key");
      if (a == b) throw Error("[synth] " + context + ": corr key repeats a variable");
      const double v = parse_number(value, context, key);
      cfg.target_correlation(a, b) = v;
      cfg.target_correlation(b, a) = v;
    } else {
      throw Error("[synth] " + context + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

num::Matrix repair_correlation(const num::Matrix& r) {
  const num::SymmetricEigen eig = num::symmetric_eigen(r);
  const std::size_t n = r.rows();
  const double min_eig = eig.values.empty() ? 0.0 : eig.values.back();
  if (min_eig < -0.1)
    throw Error("[synth] correlation target is indefinite beyond rounding repair: "
                "most negative eigenvalue " +
                fmt(min_eig));
  std::vector<double> lam = eig.values;
  for (double& l : lam) l = std::max(l, 1e-8);

  num::Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += eig.vectors(i, k) * lam[k] * eig.vectors(j, k);
      a(i, j) = a(j, i) = s;
    }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::sqrt(a(i, i));
  num::Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) out(i, j) = out(j, i) = a(i, j) / (d[i] * d[j]);
  }
  return out;
}

SyntheticPanel generate_calibrated(const SyntheticConfig& cfg) {
  cfg.validate();

  std::array<double, kVars> mean{}, sd{};
  for (std::size_t i = 0; i < kVars; ++i) {
    mean[i] = cfg.target_means.at(kNames[i]);
    sd[i] = cfg.target_sds.at(kNames[i]);
  }
  const num::Matrix r = repair_correlation(cfg.target_correlation);
  const Structural st = resolve_structural(cfg, r, mean, sd);

  // Joint innovation draw: macro block per (country, year), sector block per
  // cell conditioned on it, so the cross section matches r at every period.
  const num::Matrix r_mm = submatrix(r, kMacroVars, kMacroVars);
  const num::Matrix r_sm = submatrix(r, kSectorVars, kMacroVars);
  const num::Matrix r_ss = submatrix(r, kSectorVars, kSectorVars);
  const num::Matrix f_mm = psd_factor(r_mm);
  const num::Matrix bmat = num::multiply(r_sm, num::invert_pd(r_mm).inverse);
  num::Matrix cond = r_ss;
  {
    const num::Matrix bs = num::multiply(bmat, r_sm.transposed());
    for (std::size_t i = 0; i < cond.rows(); ++i)
      for (std::size_t j = 0; j < cond.cols(); ++j) cond(i, j) -= bs(i, j);
    for (std::size_t i = 0; i < cond.rows(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double s = 0.5 * (cond(i, j) + cond(j, i));
        cond(i, j) = cond(j, i) = s;
      }
  }
  const num::Matrix f_ss = psd_factor(cond);

  // Unit-variance index of the idiosyncratic GVC innovations; keeping the
  // macro-conditional part out keeps the country controls exogenous.
  double gvc_var = 0.0;
  for (std::size_t i = 0; i < kGvcInSector; ++i)
    for (std::size_t j = 0; j < kGvcInSector; ++j) gvc_var += cond(i, j);
  if ((cfg.endogeneity_rho != 0.0 || cfg.invalidity_rho != 0.0) && gvc_var < 1e-10)
    throw Error("[synth] GVC innovations are degenerate under this correlation target; "
                "cannot plant endogeneity");
  const double gvc_scale = gvc_var > 0.0 ? 1.0 / std::sqrt(gvc_var) : 0.0;

  const std::size_t n_c = cfg.n_countries, n_s = cfg.n_sectors, n_t = cfg.n_years();
  const std::size_t n_cells = cfg.n_cells();
  const double phi = cfg.instrument_strength;
  const double innov_scale = std::sqrt(1.0 - phi * phi);
  const double rho = cfg.endogeneity_rho, rho_lag = cfg.invalidity_rho;
  const double noise_share = std::sqrt(std::max(0.0, 1.0 - rho * rho - rho_lag * rho_lag));

  const Rng base(cfg.seed);
  Rng fe_rng = base.fork(1);
  Rng score_rng = base.fork(2);
  Rng err_rng = base.fork(3);
  Rng miss_rng = base.fork(4);
  Rng region_rng = base.fork(5);

  const double sd_fe = 0.25 * sd[kJobs];
  std::vector<double> fe_c = demeaned_draws(fe_rng, n_c, sd_fe);
  std::vector<double> fe_s = demeaned_draws(fe_rng, n_s, sd_fe);
  std::vector<double> fe_t = demeaned_draws(fe_rng, n_t, sd_fe);

  auto cell_at = [n_s, n_t](std::size_t c, std::size_t s, std::size_t t) {
    return (c * n_s + s) * n_t + t;
  };

  // Latent scores (unit scale) for all nine regressors plus the structural
  // error, filled in one deterministic sweep.
  std::vector<std::array<double, kVars>> score(n_cells);
  std::vector<double> eps(n_cells);
  {
    std::vector<std::array<double, 4>> macro_prev(n_c);
    std::vector<std::array<double, 5>> sector_prev(n_c * n_s);
    std::vector<double> w_prev(n_c * n_s, 0.0);
    std::array<double, 4> g4{}, eta_m{};
    std::array<double, 5> g5{}, xi{}, eta_s{};
    for (std::size_t c = 0; c < n_c; ++c) {
      for (std::size_t t = 0; t < n_t; ++t) {
        for (auto& g : g4) g = score_rng.normal();
        for (std::size_t i = 0; i < 4; ++i) {
          eta_m[i] = 0.0;
          for (std::size_t j = 0; j < 4; ++j) eta_m[i] += f_mm(i, j) * g4[j];
        }
        std::array<double, 4> u_m{};
        for (std::size_t i = 0; i < 4; ++i)
          u_m[i] = t == 0 ? eta_m[i] : phi * macro_prev[c][i] + innov_scale * eta_m[i];
        macro_prev[c] = u_m;

        for (std::size_t s = 0; s < n_s; ++s) {
          for (auto& g : g5) g = score_rng.normal();
          for (std::size_t i = 0; i < 5; ++i) {
            xi[i] = 0.0;
            for (std::size_t j = 0; j < 5; ++j) xi[i] += f_ss(i, j) * g5[j];
            eta_s[i] = xi[i];
            for (std::size_t j = 0; j < 4; ++j) eta_s[i] += bmat(i, j) * eta_m[j];
          }
          const std::size_t unit = c * n_s + s;
          std::array<double, 5> u_s{};
          for (std::size_t i = 0; i < 5; ++i)
            u_s[i] = t == 0 ? eta_s[i] : phi * sector_prev[unit][i] + innov_scale * eta_s[i];
          sector_prev[unit] = u_s;

          const double w = gvc_scale * (xi[0] + xi[1] + xi[2]);
          const double zeta = err_rng.normal();
          const double zeta_first = err_rng.normal();
          const double lag_part = t == 0 ? zeta_first : w_prev[unit];
          w_prev[unit] = w;

          const std::size_t cell = cell_at(c, s, t);
          eps[cell] = st.sigma_eps * (rho * w + rho_lag * lag_part + noise_share * zeta);
          auto& sc = score[cell];
          for (std::size_t i = 0; i < 4; ++i) sc[kMacroVars[i]] = u_m[i];
          for (std::size_t i = 0; i < 5; ++i) sc[kSectorVars[i]] = u_s[i];
        }
      }
    }
  }

  // Second pass: recolor the scores so the generated sample moments equal
  // the targets exactly rather than only in expectation (a country-level
  // draw at a few dozen countries would otherwise miss the macro means by
  // far more than the fidelity tolerance). The sector block is re-attached
  // to the recolored macro block through the target regression so the full
  // cross-block covariance is exact as well.
  {
    num::Matrix m(n_cells, 4), s(n_cells, 5);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      for (std::size_t i = 0; i < 4; ++i) m(cell, i) = score[cell][kMacroVars[i]];
      for (std::size_t i = 0; i < 5; ++i) s(cell, i) = score[cell][kSectorVars[i]];
    }
    const num::Matrix m2 = recolor_exact(m, r_mm, "country covariate");
    center_columns(s);
    num::Matrix cross_ms = num::cross(m2, s);
    for (std::size_t i = 0; i < cross_ms.rows(); ++i)
      for (std::size_t j = 0; j < cross_ms.cols(); ++j)
        cross_ms(i, j) /= static_cast<double>(n_cells);
    const num::Matrix coef = num::multiply(num::invert_pd(r_mm).inverse, cross_ms);
    const num::Matrix fitted = num::multiply(m2, coef);
    num::Matrix resid = s;
    for (std::size_t i = 0; i < n_cells; ++i)
      for (std::size_t j = 0; j < 5; ++j) resid(i, j) -= fitted(i, j);
    const num::Matrix resid2 = recolor_exact(resid, cond, "sector variable");
    const num::Matrix s_macro = num::multiply(m2, bmat.transposed());
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      for (std::size_t i = 0; i < 4; ++i) score[cell][kMacroVars[i]] = m2(cell, i);
      for (std::size_t i = 0; i < 5; ++i)
        score[cell][kSectorVars[i]] = s_macro(cell, i) + resid2(cell, i);
    }
  }

  // Decorrelate the fixed-effect draws from the level means of the
  // regressors (when the level count leaves room) and, with no endogeneity
  // planted, the error from the regressors themselves. This keeps the
  // dependent's sample correlations on target instead of drifting with the
  // luck of a few dozen level draws.
  {
    auto level_means = [&](std::size_t levels, auto&& level_of) {
      num::Matrix m(levels, kVars - 1);
      std::vector<double> count(levels, 0.0);
      for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const std::size_t l = level_of(cell);
        count[l] += 1.0;
        for (std::size_t v = 1; v < kVars; ++v) m(l, v - 1) += score[cell][v];
      }
      for (std::size_t l = 0; l < levels; ++l)
        for (std::size_t v = 0; v + 1 < kVars; ++v) m(l, v) /= count[l];
      return m;
    };
    const double fe_ssq_unit = sd_fe * sd_fe;
    if (n_c >= 12)
      orthogonalize_draws(fe_c, level_means(n_c, [&](std::size_t cell) { return cell / (n_s * n_t); }),
                          fe_ssq_unit * static_cast<double>(n_c - 1));
    if (n_s >= 12)
      orthogonalize_draws(fe_s, level_means(n_s, [&](std::size_t cell) { return (cell / n_t) % n_s; }),
                          fe_ssq_unit * static_cast<double>(n_s - 1));
    if (n_t >= 12)
      orthogonalize_draws(fe_t, level_means(n_t, [&](std::size_t cell) { return cell % n_t; }),
                          fe_ssq_unit * static_cast<double>(n_t - 1));
    if (rho == 0.0 && rho_lag == 0.0) {
      num::Matrix x(n_cells, kVars - 1);
      for (std::size_t cell = 0; cell < n_cells; ++cell)
        for (std::size_t v = 1; v < kVars; ++v) x(cell, v - 1) = score[cell][v];
      orthogonalize_draws(eps, x,
                          st.sigma_eps * st.sigma_eps * static_cast<double>(n_cells));
    }
  }

  // Missing masks, one sweep per affected variable in canonical order.
  std::array<std::vector<std::uint8_t>, kVars> missing;
  for (std::size_t v = 0; v < kVars; ++v) {
    const auto it = cfg.missing_rates.find(kNames[v]);
    const double rate = it == cfg.missing_rates.end() ? 0.0 : it->second;
    if (rate <= 0.0) continue;
    missing[v].assign(n_cells, 0);
    for (std::size_t cell = 0; cell < n_cells; ++cell)
      if (miss_rng.uniform01() < rate) missing[v][cell] = 1;
  }
  auto is_missing = [&missing](std::size_t v, std::size_t cell) {
    return !missing[v].empty() && missing[v][cell] != 0;
  };

  // Structural dependent, exp-rounded to a count.
  std::vector<double> jobs(n_cells, 0.0);
  for (std::size_t c = 0; c < n_c; ++c)
    for (std::size_t s = 0; s < n_s; ++s)
      for (std::size_t t = 0; t < n_t; ++t) {
        const std::size_t cell = cell_at(c, s, t);
        double y = st.intercept + fe_c[c] + fe_s[s] + fe_t[t] + eps[cell];
        for (std::size_t v = 1; v < kVars; ++v)
          y += st.beta[v] * (mean[v] + sd[v] * score[cell][v]);
        jobs[cell] = std::max(1.0, std::round(std::exp(y)));
      }

  // Emit rows in key order: countries, sectors, years ascending; with a
  // regional split, region ids ascending inside the cell.
  std::vector<panel::ObsKey> keys;
  std::vector<double> row_jobs;
  std::vector<std::size_t> row_cell;
  const std::size_t max_split = std::min<std::size_t>(cfg.n_regions, 5);
  for (std::size_t c = 0; c < n_c; ++c) {
    const std::string cl = country_label(c);
    for (std::size_t s = 0; s < n_s; ++s)
      for (std::size_t t = 0; t < n_t; ++t) {
        const std::size_t cell = cell_at(c, s, t);
        panel::ObsKey k;
        k.country = cl;
        k.sector = static_cast<int>(10 + s);
        k.year = cfg.years.first + static_cast<int>(t);
        if (cfg.n_regions == 0) {
          keys.push_back(k);
          row_jobs.push_back(jobs[cell]);
          row_cell.push_back(cell);
          continue;
        }
        if (is_missing(kJobs, cell)) {
          k.region = cl + "-R1";
          keys.push_back(k);
          row_jobs.push_back(0.0);
          row_cell.push_back(cell);
          continue;
        }
        const std::size_t n_split = 1 + region_rng.uniform_int(max_split);
        std::vector<std::size_t> ids(cfg.n_regions);
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
        for (std::size_t i = 0; i < n_split; ++i)
          std::swap(ids[i], ids[i + region_rng.uniform_int(ids.size() - i)]);
        ids.resize(n_split);
        std::sort(ids.begin(), ids.end());
        std::vector<double> counts(n_split, 0.0);
        const auto total = static_cast<std::uint64_t>(jobs[cell]);
        for (std::uint64_t j = 0; j < total; ++j) counts[region_rng.uniform_int(n_split)] += 1.0;
        for (std::size_t i = 0; i < n_split; ++i) {
          if (counts[i] <= 0.0) continue;
          panel::ObsKey rk = k;
          rk.region = cl + "-R" + std::to_string(ids[i] + 1);
          keys.push_back(rk);
          row_jobs.push_back(counts[i]);
          row_cell.push_back(cell);
        }
      }
  }

  panel::PanelDataset ds(keys);
  if (ds.keys() != keys)
    throw Error("[synth] internal: emission order does not match key order");

  const std::size_t n_rows = keys.size();
  panel::Column jobs_col, ljobs_col;
  jobs_col.values.assign(n_rows, 0.0);
  jobs_col.missing.assign(n_rows, 0);
  jobs_col.note = "synthetic count";
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (is_missing(kJobs, row_cell[i])) {
      jobs_col.missing[i] = 1;
    } else {
      jobs_col.values[i] = row_jobs[i];
    }
  }
  ljobs_col.values.assign(n_rows, 0.0);
  ljobs_col.missing = jobs_col.missing;
  for (std::size_t i = 0; i < n_rows; ++i)
    if (!ljobs_col.missing[i]) ljobs_col.values[i] = std::log(row_jobs[i]);
  ds.add_column("jobs", std::move(jobs_col));
  ds.add_column("log_jobs", std::move(ljobs_col));

  for (std::size_t v = 1; v < kVars; ++v) {
    panel::Column col;
    col.values.assign(n_rows, 0.0);
    col.missing.assign(n_rows, 0);
    for (std::size_t i = 0; i < n_rows; ++i) {
      const std::size_t cell = row_cell[i];
      if (is_missing(v, cell))
        col.missing[i] = 1;
      else
        col.values[i] = mean[v] + sd[v] * score[cell][v];
    }
    ds.add_column(kNames[v], std::move(col));
  }

  SyntheticPanel out{std::move(ds), {}};
  out.truth.intercept = st.intercept;
  out.truth.sigma_eps = st.sigma_eps;
  out.truth.endogeneity_rho = rho;
  out.truth.invalidity_rho = rho_lag;
  out.truth.persistence = phi;
  for (std::size_t v = 1; v < kVars; ++v) out.truth.beta[kNames[v]] = st.beta[v];
  out.truth.errors.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) out.truth.errors[i] = eps[row_cell[i]];
  for (std::size_t c = 0; c < n_c; ++c) out.truth.country_fe[country_label(c)] = fe_c[c];
  for (std::size_t s = 0; s < n_s; ++s) out.truth.sector_fe[std::to_string(10 + s)] = fe_s[s];
  for (std::size_t t = 0; t < n_t; ++t)
    out.truth.year_fe[std::to_string(cfg.years.first + static_cast<int>(t))] = fe_t[t];
  log_info("[synth] generated " + std::to_string(n_rows) + " rows (" +
           std::to_string(n_cells) + " cells), sigma_eps " + fmt(st.sigma_eps));
  return out;
}

std::string sector_label(int code) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "division %02d", code);
  return buf;
}

void export_corpus(const SyntheticPanel& sp, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const panel::PanelDataset& ds = sp.data;
  if (!ds.has_country() || !ds.has_sector())
    throw Error("[synth] export needs a panel keyed by country and sector");
  fs::create_directories(dir);

  const panel::Column& jobs = ds.column("jobs");

  std::string projects = "country,region,sector_raw,year,jobs\n";
  std::set<int> codes;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const panel::ObsKey& k = ds.key(i);
    codes.insert(*k.sector);
    if (jobs.missing[i]) continue;
    projects += io::csv_line({*k.country, k.region.value_or(""), sector_label(*k.sector),
                              std::to_string(k.year), fmt(jobs.values[i])});
    projects += '\n';
  }
  io::write_text_file(dir / "projects.csv", projects);

  std::string corr = "sector_raw,nace2\n";
  for (int code : codes) corr += io::csv_line({sector_label(code), std::to_string(code)}) + "\n";
  io::write_text_file(dir / "correspondence.csv", corr);

  const std::array<const char*, 4> macro_cols = {"gdp_growth", "log_gdp_pe", "trade_open",
                                                 "educ_exp"};
  std::string cov = "country,year,gdp_growth,log_gdp_pe,trade_open,educ_exp\n";
  std::set<std::pair<std::string, int>> seen_cy;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const panel::ObsKey& k = ds.key(i);
    if (!seen_cy.insert({*k.country, k.year}).second) continue;
    std::vector<std::string> fields = {*k.country, std::to_string(k.year)};
    for (const char* name : macro_cols) {
      const panel::Column& col = ds.column(name);
      fields.push_back(col.missing[i] ? "" : fmt(col.values[i]));
    }
    cov += io::csv_line(fields) + "\n";
  }
  io::write_text_file(dir / "covariates.csv", cov);

  // Accounts scaled so the indicator formulas give back the panel's GVC
  // columns: va fixed at 100, output at 150, downstream length at 3.
  std::string acc = "country,sector,year,v_gvc,va,y_gvc,y,upstreamness,downstreamness\n";
  std::set<std::tuple<std::string, int, int>> seen_cell;
  const panel::Column& fwd = ds.column("gvc_fwd");
  const panel::Column& bwd = ds.column("gvc_bwd");
  const panel::Column& pos = ds.column("gvc_pos");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const panel::ObsKey& k = ds.key(i);
    if (!seen_cell.insert({*k.country, *k.sector, k.year}).second) continue;
    acc += io::csv_line({*k.country, std::to_string(*k.sector), std::to_string(k.year),
                         fwd.missing[i] ? "" : fmt(fwd.values[i] * 100.0), "100",
                         bwd.missing[i] ? "" : fmt(bwd.values[i] * 150.0), "150",
                         pos.missing[i] ? "" : fmt(pos.values[i] * 3.0), "3"}) +
           "\n";
  }
  io::write_text_file(dir / "accounts.csv", acc);

  panel::write_panel_csv(dir / "panel.csv", ds);
}

}  // namespace gvcpanel::synth
