#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gvcpanel/error.hpp"
#include "gvcpanel/estimator.hpp"
#include "gvcpanel/fdi.hpp"
#include "gvcpanel/indicators.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/monte_carlo.hpp"
#include "gvcpanel/panel.hpp"
#include "gvcpanel/stats.hpp"
#include "gvcpanel/synth.hpp"
#include "gvcpanel/transforms.hpp"

using namespace gvcpanel;
using synth::SyntheticConfig;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() > 2);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double column_mean(const panel::Column& c) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.values.size(); ++i)
    if (!c.missing[i]) {
      s += c.values[i];
      ++n;
    }
  REQUIRE(n > 0);
  return s / static_cast<double>(n);
}

std::size_t missing_count(const panel::Column& c) {
  std::size_t n = 0;
  for (auto m : c.missing) n += m;
  return n;
}

// Pairs each cell's value at year t with the same column (or another) one
// year earlier. Rows are sorted by (country, sector, year), so the previous
// row is the lag whenever it belongs to the same cell series.
std::pair<std::vector<double>, std::vector<double>> lag_pairs(const panel::PanelDataset& ds,
                                                              const std::string& lagged,
                                                              const std::vector<double>& at_t) {
  const auto& col = ds.column(lagged);
  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const auto prev = ds.key(i - 1);
    const auto cur = ds.key(i);
    if (prev.country != cur.country || prev.sector != cur.sector) continue;
    if (prev.year + 1 != cur.year) continue;
    if (col.missing[i - 1]) continue;
    xs.push_back(col.values[i - 1]);
    ys.push_back(at_t[i]);
  }
  return {xs, ys};
}

std::filesystem::path temp_dir(const std::string& leaf) {
  auto p = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("correlation repair keeps the default target and fixes rounded inputs") {
  const num::Matrix base = synth::default_correlation();
  const auto eig = num::symmetric_eigen(base);
  // smallest eigenvalue of the published table, frozen from a probe run
  CHECK(eig.values.back() == doctest::Approx(0.108209).epsilon(1e-3));

  const num::Matrix same = synth::repair_correlation(base);
  double dev = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) dev = std::max(dev, std::abs(same(i, j) - base(i, j)));
  CHECK(dev <= 1e-6);

  // pushing corr(productivity, wage) to 0.95 tips the matrix slightly
  // indefinite (min eig about -0.068); repair must restore a usable target
  num::Matrix bent = base;
  bent(8, 9) = bent(9, 8) = 0.95;
  const auto bent_eig = num::symmetric_eigen(bent);
  CHECK(bent_eig.values.back() < -0.02);
  CHECK(bent_eig.values.back() > -0.1);
  const num::Matrix fixed = synth::repair_correlation(bent);
  const auto fixed_eig = num::symmetric_eigen(fixed);
  CHECK(fixed_eig.values.back() >= -1e-12);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(fixed(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(fixed(i, j) == doctest::Approx(fixed(j, i)).epsilon(1e-12));
      CHECK(std::abs(fixed(i, j) - bent(i, j)) < 0.2);
    }
  }

  // an incoherent target is not quietly repaired
  num::Matrix bad = base;
  bad(0, 8) = bad(8, 0) = 0.9;
  bad(0, 9) = bad(9, 0) = -0.9;
  CHECK_THROWS_WITH_AS(synth::repair_correlation(bad),
                       doctest::Contains("most negative eigenvalue"), Error);
}

TEST_CASE("calibrated draws hit the target moments") {
  SyntheticConfig cfg;
  cfg.n_countries = 32;
  cfg.n_sectors = 18;
  cfg.seed = 20260814;
  const auto sp = synth::generate_calibrated(cfg);
  const auto& ds = sp.data;
  CHECK(ds.size() == 32u * 18u * 18u);

  const auto names = synth::variable_names();
  const auto means = synth::default_means();
  const auto sds = synth::default_sds();
  const num::Matrix target = synth::default_correlation();

  // regressor sample moments are calibrated exactly (divisor n)
  for (std::size_t v = 1; v < names.size(); ++v) {
    const auto& col = ds.column(names[v]);
    CHECK(missing_count(col) == 0);
    CHECK(column_mean(col) == doctest::Approx(means.at(names[v])).epsilon(1e-9));
    double ssq = 0;
    const double mu = means.at(names[v]);
    for (double x : col.values) ssq += (x - mu) * (x - mu);
    const double sd_n = std::sqrt(ssq / static_cast<double>(ds.size()));
    CHECK(sd_n == doctest::Approx(sds.at(names[v])).epsilon(1e-9));
  }

  const auto gram = panel::correlate(ds, names);
  for (std::size_t i = 1; i < 10; ++i)
    for (std::size_t j = 1; j < i; ++j)
      CHECK(gram.r(i, j) == doctest::Approx(target(i, j)).epsilon(1e-6));
  CHECK(gram.r(8, 9) == doctest::Approx(0.7489).epsilon(1e-6));

  // the dependent row is stochastic but must sit close to the table
  for (std::size_t j = 0; j < 10; ++j)
    if (j != 0) CHECK(std::abs(gram.r(0, j) - target(0, j)) < 0.01);
  CHECK(std::abs(column_mean(ds.column("log_jobs")) - means.at("log_jobs")) < 0.05);

  // one shared AR(1) persistence drives every series
  const auto& fwd = ds.column("gvc_fwd");
  auto [xl, xt] = lag_pairs(ds, "gvc_fwd", fwd.values);
  CHECK(std::abs(pearson(xl, xt) - cfg.instrument_strength) < 0.04);

  // macro covariates are country-year level, sector scores are not
  const auto a = ds.find(panel::ObsKey{"C01", 10, 2003, {}});
  const auto b = ds.find(panel::ObsKey{"C01", 11, 2003, {}});
  REQUIRE(a);
  REQUIRE(b);
  for (const char* macro : {"gdp_growth", "log_gdp_pe", "trade_open", "educ_exp"})
    CHECK(ds.column(macro).values[*a] == ds.column(macro).values[*b]);
  CHECK(ds.column("gvc_fwd").values[*a] != ds.column("gvc_fwd").values[*b]);

  // jobs are integer counts >= 1 and log_jobs is their exact log
  const auto& jobs = ds.column("jobs");
  const auto& lj = ds.column("log_jobs");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(jobs.values[i] >= 1.0);
    CHECK(jobs.values[i] == std::floor(jobs.values[i]));
    CHECK(lj.values[i] == std::log(jobs.values[i]));
  }
}

TEST_CASE("generation is deterministic and exposes truth only through the sidecar") {
  SyntheticConfig cfg;
  cfg.n_countries = 6;
  cfg.n_sectors = 5;
  cfg.years = {2004, 2012};
  cfg.seed = 77;
  const auto s1 = synth::generate_calibrated(cfg);
  const auto s2 = synth::generate_calibrated(cfg);
  REQUIRE(s1.data.size() == s2.data.size());
  CHECK(s1.data.column_names() == s2.data.column_names());
  for (std::size_t i = 0; i < s1.data.size(); ++i) CHECK(s1.data.key(i) == s2.data.key(i));
  for (const auto& name : s1.data.column_names()) {
    const auto& c1 = s1.data.column(name);
    const auto& c2 = s2.data.column(name);
    CHECK(c1.values == c2.values);
    CHECK(c1.missing == c2.missing);
  }

  const std::vector<std::string> expected = {
      "jobs",       "log_jobs",   "gvc_fwd",  "gvc_bwd",          "gvc_pos", "gdp_growth",
      "log_gdp_pe", "trade_open", "educ_exp", "log_productivity", "log_wage"};
  CHECK(s1.data.column_names() == expected);

  CHECK(s1.truth.beta.size() == 9);
  CHECK(s1.truth.errors.size() == s1.data.size());
  CHECK(s1.truth.sigma_eps > 0);
  CHECK(s1.truth.country_fe.size() == 6);
  CHECK(s1.truth.sector_fe.size() == 5);
  CHECK(s1.truth.year_fe.size() == 9);
  CHECK(s1.truth.country_fe.count("C01") == 1);
  CHECK(s1.truth.sector_fe.count("10") == 1);
  CHECK(s1.truth.year_fe.count("2004") == 1);

  // a fresh seed moves the draws
  cfg.seed = 78;
  const auto s3 = synth::generate_calibrated(cfg);
  CHECK(s3.data.column("gvc_fwd").values != s1.data.column("gvc_fwd").values);
}

TEST_CASE("endogeneity hits the level, invalidity hits the first lag") {
  SyntheticConfig cfg;
  cfg.n_countries = 32;
  cfg.n_sectors = 18;
  cfg.seed = 20260814;
  cfg.endogeneity_rho = 0.5;
  cfg.planted_beta["gvc_fwd"] = 0.9;
  const auto sp = synth::generate_calibrated(cfg);
  const auto& fwd = sp.data.column("gvc_fwd").values;
  CHECK(pearson(fwd, sp.truth.errors) > 0.2);
  auto [lag1, err_t] = lag_pairs(sp.data, "gvc_fwd", sp.truth.errors);
  CHECK(std::abs(pearson(lag1, err_t)) < 0.02);

  // lagged invalidity poisons lag-1 instruments hardest; persistence carries
  // a weaker echo into the level (the AR state embeds past innovations)
  SyntheticConfig bad = cfg;
  bad.endogeneity_rho = 0.0;
  bad.invalidity_rho = 0.5;
  const auto sq = synth::generate_calibrated(bad);
  const auto& fwd2 = sq.data.column("gvc_fwd").values;
  auto [blag1, berr] = lag_pairs(sq.data, "gvc_fwd", sq.truth.errors);
  CHECK(pearson(blag1, berr) > 0.15);
  CHECK(pearson(blag1, berr) > std::abs(pearson(fwd2, sq.truth.errors)));
  // second lag predates the poisoned innovation
  std::vector<double> lag2, err2;
  for (std::size_t i = 2; i < sq.data.size(); ++i) {
    const auto k0 = sq.data.key(i - 2);
    const auto k2 = sq.data.key(i);
    if (k0.country != k2.country || k0.sector != k2.sector) continue;
    if (k0.year + 2 != k2.year) continue;
    lag2.push_back(fwd2[i - 2]);
    err2.push_back(sq.truth.errors[i]);
  }
  CHECK(std::abs(pearson(lag2, err2)) < 0.03);
}

TEST_CASE("zero endogeneity keeps least squares and the instrumented fit aligned") {
  SyntheticConfig cfg;
  cfg.n_countries = 32;
  cfg.n_sectors = 18;
  cfg.seed = 11;
  cfg.planted_beta["gvc_fwd"] = 0.9;
  cfg.target_sds["log_jobs"] = 0.5;
  const auto sp = synth::generate_calibrated(cfg);

  est::ModelSpec iv;
  iv.dependent = "log_jobs";
  iv.endogenous = {"gvc_fwd"};
  iv.controls = {"gdp_growth", "log_gdp_pe", "trade_open", "educ_exp"};
  est::ModelSpec ols = iv;
  ols.endogenous = {};
  ols.controls.insert(ols.controls.begin(), "gvc_fwd");
  ols.instrument_lags = {};

  const auto fit_iv = est::run_specification(sp.data, iv);
  const auto fit_ols = est::run_specification(sp.data, ols);
  double b_iv = 0, b_ols = 0;
  for (const auto& c : fit_iv.coefficients)
    if (c.label == "gvc_fwd") b_iv = c.estimate;
  for (const auto& c : fit_ols.coefficients)
    if (c.label == "gvc_fwd") b_ols = c.estimate;
  CHECK(std::abs(b_iv - b_ols) <= 0.03);
  CHECK(std::abs(b_iv - 0.9) < 0.1);
  CHECK(std::abs(b_ols - 0.9) < 0.1);
}

TEST_CASE("missing profile reproduces the target rates") {
  SyntheticConfig cfg;
  cfg.n_countries = 32;
  cfg.n_sectors = 18;
  cfg.seed = 4;
  cfg.missing_rates = synth::default_missing_rates();
  const auto sp = synth::generate_calibrated(cfg);
  const double n = static_cast<double>(sp.data.size());

  for (const auto& name : synth::variable_names()) {
    const double want =
        cfg.missing_rates.count(name) ? cfg.missing_rates.at(name) : 0.0;
    const double got = static_cast<double>(missing_count(sp.data.column(name))) / n;
    CHECK(std::abs(got - want) <= (want > 0.05 ? 0.02 : 0.005));
    if (want == 0.0) CHECK(got == 0.0);
  }
  // jobs shares the dependent's mask
  CHECK(sp.data.column("jobs").missing == sp.data.column("log_jobs").missing);
}

TEST_CASE("regional splits conserve cell totals") {
  SyntheticConfig cfg;
  cfg.n_countries = 4;
  cfg.n_sectors = 3;
  cfg.years = {2005, 2012};
  cfg.seed = 5;
  cfg.n_regions = 5;
  cfg.missing_rates["log_jobs"] = 0.3;
  const auto reg = synth::generate_calibrated(cfg);
  SyntheticConfig flat = cfg;
  flat.n_regions = 0;
  const auto cell = synth::generate_calibrated(flat);
  REQUIRE(reg.data.has_region());
  REQUIRE(!cell.data.has_region());

  std::map<std::tuple<std::string, int, int>, double> sums;
  std::map<std::tuple<std::string, int, int>, std::size_t> counts;
  const auto& rj = reg.data.column("jobs");
  for (std::size_t i = 0; i < reg.data.size(); ++i) {
    const auto k = reg.data.key(i);
    const auto cellkey = std::make_tuple(*k.country, *k.sector, k.year);
    counts[cellkey] += 1;
    if (!rj.missing[i]) sums[cellkey] += rj.values[i];
    CHECK(k.region->rfind(*k.country + "-R", 0) == 0);
  }
  const auto& cj = cell.data.column("jobs");
  for (std::size_t i = 0; i < cell.data.size(); ++i) {
    const auto k = cell.data.key(i);
    const auto cellkey = std::make_tuple(*k.country, *k.sector, k.year);
    const auto nparts = counts.at(cellkey);
    CHECK(nparts >= 1);
    CHECK(nparts <= 5);
    if (cj.missing[i]) {
      // a cell with unobserved jobs stays a single placeholder row
      CHECK(nparts == 1);
    } else {
      CHECK(sums.at(cellkey) == cj.values[i]);
    }
  }
}

TEST_CASE("synthetic config parsing accepts the documented keys") {
  std::map<std::string, std::string> kv = {
      {"n_countries", "12"},         {"n_sectors", "7"},
      {"n_regions", "3"},            {"years", "2005-2015"},
      {"seed", "42"},                {"endogeneity_rho", "0.4"},
      {"invalidity_rho", "0.3"},     {"instrument_strength", "0.55"},
      {"missing_profile", "table"},  {"missing.educ_exp", "0.5"},
      {"mean.gvc_fwd", "0.8"},       {"sd.gvc_fwd", "0.2"},
      {"beta.gvc_fwd", "1.5"},       {"corr.gvc_fwd.log_wage", "0.25"},
  };
  const auto cfg = synth::parse_synthetic_config(kv, "test");
  CHECK(cfg.n_countries == 12);
  CHECK(cfg.n_sectors == 7);
  CHECK(cfg.n_regions == 3);
  CHECK(cfg.years.first == 2005);
  CHECK(cfg.years.last == 2015);
  CHECK(cfg.seed == 42);
  CHECK(cfg.endogeneity_rho == doctest::Approx(0.4));
  CHECK(cfg.invalidity_rho == doctest::Approx(0.3));
  CHECK(cfg.instrument_strength == doctest::Approx(0.55));
  CHECK(cfg.target_means.at("gvc_fwd") == doctest::Approx(0.8));
  CHECK(cfg.target_sds.at("gvc_fwd") == doctest::Approx(0.2));
  CHECK(cfg.planted_beta.at("gvc_fwd") == doctest::Approx(1.5));
  CHECK(cfg.target_correlation(1, 9) == doctest::Approx(0.25));
  CHECK(cfg.target_correlation(9, 1) == doctest::Approx(0.25));
  // the profile seeds the table, per-variable keys override it
  CHECK(cfg.missing_rates.at("educ_exp") == doctest::Approx(0.5));
  CHECK(cfg.missing_rates.at("log_wage") ==
        doctest::Approx(synth::default_missing_rates().at("log_wage")));

  using KV = std::map<std::string, std::string>;
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"bogus", "1"}}, "t"),
                       doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"years", "2003"}}, "t"),
                       doctest::Contains("years must look like"), Error);
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"corr.gvc_fwd.gvc_fwd", "0.1"}}, "t"),
                       doctest::Contains("repeats a variable"), Error);
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"n_sectors", "0"}}, "t"),
                       doctest::Contains("n_sectors"), Error);
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"instrument_strength", "1"}}, "t"),
                       doctest::Contains("instrument_strength"), Error);
  CHECK_THROWS_WITH_AS(
      synth::parse_synthetic_config(KV{{"endogeneity_rho", "0.7"}, {"invalidity_rho", "0.7"}},
                                    "t"),
      doctest::Contains("jointly exceed"), Error);
  CHECK_THROWS_WITH_AS(synth::parse_synthetic_config(KV{{"missing.log_wage", "0.99"}}, "t"),
                       doctest::Contains("missing rate"), Error);
}

TEST_CASE("corpus export is faithful, deterministic, and re-ingestable") {
  SyntheticConfig cfg;
  cfg.n_countries = 6;
  cfg.n_sectors = 5;
  cfg.years = {2004, 2012};
  cfg.seed = 31;
  const auto sp = synth::generate_calibrated(cfg);
  const auto d1 = temp_dir("gvc_synth_corpus_a");
  const auto d2 = temp_dir("gvc_synth_corpus_b");
  synth::export_corpus(sp, d1);
  synth::export_corpus(sp, d2);
  for (const char* leaf :
       {"projects.csv", "correspondence.csv", "covariates.csv", "accounts.csv", "panel.csv"})
    CHECK(slurp(d1 / leaf) == slurp(d2 / leaf));

  const auto corr = panel::load_correspondence(d1 / "correspondence.csv");
  const auto load = panel::load_fdi_csv(d1 / "projects.csv", corr, cfg.years);
  CHECK(load.quarantined == 0);
  auto ing = panel::ingest_fdi_projects(load.records, false);
  auto joined = panel::join(ing.panel, panel::read_panel_csv(d1 / "covariates.csv"),
                            panel::JoinLevel::country_year);
  const auto ind =
      indicators::derive_indicator_columns(indicators::load_accounts_csv(d1 / "accounts.csv"));
  joined = panel::join(joined, ind, panel::JoinLevel::key);
  REQUIRE(joined.size() == sp.data.size());

  // values survive the trip; the only new gaps are domain masks on the
  // derived ratios (negative flows, upstreamness below one)
  for (const char* name : {"gvc_fwd", "gvc_bwd", "gvc_pos", "gdp_growth", "log_gdp_pe",
                           "trade_open", "educ_exp"}) {
    const auto& got = joined.column(name);
    const auto& want = sp.data.column(name);
    for (std::size_t i = 0; i < joined.size(); ++i) {
      const auto at = sp.data.find(joined.key(i));
      REQUIRE(at);
      if (!got.missing[i]) CHECK(std::abs(got.values[i] - want.values[*at]) <= 1e-12);
    }
  }
  const auto& fwd0 = sp.data.column("gvc_fwd");
  const auto& bwd0 = sp.data.column("gvc_bwd");
  const auto& pos0 = sp.data.column("gvc_pos");
  for (std::size_t i = 0; i < joined.size(); ++i) {
    const auto at = *sp.data.find(joined.key(i));
    CHECK(static_cast<bool>(joined.column("gvc_fwd").missing[i]) == (fwd0.values[at] < 0.0));
    CHECK(static_cast<bool>(joined.column("gvc_bwd").missing[i]) == (bwd0.values[at] < 0.0));
    CHECK(static_cast<bool>(joined.column("gvc_pos").missing[i]) ==
          (pos0.values[at] * 3.0 < 1.0));
  }
}

TEST_CASE("estimation agrees between the direct panel and the exported corpus") {
  SyntheticConfig cfg;
  cfg.n_countries = 8;
  cfg.n_sectors = 6;
  cfg.years = {2004, 2014};
  cfg.seed = 31;
  // keep the ratio inputs inside the deriver's domain so no cell is masked
  cfg.target_sds["gvc_fwd"] = 0.06;
  cfg.target_means["gvc_bwd"] = 0.5;
  cfg.target_sds["gvc_bwd"] = 0.05;
  cfg.target_means["gvc_pos"] = 1.5;
  cfg.target_sds["gvc_pos"] = 0.05;
  const auto sp = synth::generate_calibrated(cfg);
  const auto dir = temp_dir("gvc_synth_corpus_c");
  synth::export_corpus(sp, dir);

  const auto corr = panel::load_correspondence(dir / "correspondence.csv");
  const auto load = panel::load_fdi_csv(dir / "projects.csv", corr, cfg.years);
  auto joined = panel::join(panel::ingest_fdi_projects(load.records, false).panel,
                            panel::read_panel_csv(dir / "covariates.csv"),
                            panel::JoinLevel::country_year);
  joined = panel::join(
      joined,
      indicators::derive_indicator_columns(indicators::load_accounts_csv(dir / "accounts.csv")),
      panel::JoinLevel::key);
  joined = panel::log_transform(joined, "jobs");

  est::ModelSpec spec;
  spec.dependent = "log_jobs";
  spec.endogenous = {"gvc_fwd"};
  spec.controls = {"gvc_pos", "gdp_growth", "log_gdp_pe", "trade_open"};
  const auto a = est::run_specification(sp.data, spec);
  const auto b = est::run_specification(joined, spec);
  REQUIRE(a.n_obs == b.n_obs);
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
    CHECK(a.coefficients[i].label == b.coefficients[i].label);
    CHECK(std::abs(a.coefficients[i].estimate - b.coefficients[i].estimate) <= 1e-7);
  }
  REQUIRE(a.diagnostics.kp);
  REQUIRE(b.diagnostics.kp);
  CHECK(std::abs(a.diagnostics.kp->pvalue - b.diagnostics.kp->pvalue) <= 1e-6);
  REQUIRE(a.diagnostics.hansen.pvalue);
  REQUIRE(b.diagnostics.hansen.pvalue);
  CHECK(std::abs(*a.diagnostics.hansen.pvalue - *b.diagnostics.hansen.pvalue) <= 1e-6);
}

TEST_CASE("monte carlo summarises replications deterministically") {
  SyntheticConfig cfg;
  cfg.n_countries = 12;
  cfg.n_sectors = 10;
  cfg.years = {2005, 2018};
  cfg.seed = 99;
  cfg.endogeneity_rho = 0.5;
  cfg.planted_beta["gvc_fwd"] = 0.9;

  est::ModelSpec iv;
  iv.dependent = "log_jobs";
  iv.endogenous = {"gvc_fwd"};
  iv.controls = {"gdp_growth", "log_gdp_pe"};
  est::ModelSpec ols = iv;
  ols.endogenous = {};
  ols.controls.insert(ols.controls.begin(), "gvc_fwd");
  ols.instrument_lags = {};

  const auto s_iv = synth::monte_carlo(cfg, iv, 60);
  CHECK(s_iv.replications == 60);
  CHECK(s_iv.failures == 0);
  REQUIRE(!s_iv.coefficients.empty());
  const auto& fwd = s_iv.coefficients.front();
  CHECK(fwd.label == "gvc_fwd");
  CHECK(fwd.n == 60);
  CHECK(std::abs(fwd.mean - 0.9) < 0.1);
  CHECK(fwd.reject_rate_05 == doctest::Approx(1.0));
  REQUIRE(fwd.has_truth);
  CHECK(fwd.bias == doctest::Approx(fwd.mean - 0.9).epsilon(1e-12));
  CHECK(s_iv.hansen_defined == 60);
  CHECK(s_iv.hansen_reject_rate_05 <= 0.15);
  CHECK(s_iv.kp_defined == 60);
  CHECK(s_iv.kp_reject_rate_001 == doctest::Approx(1.0));

  const auto s_ols = synth::monte_carlo(cfg, ols, 60);
  REQUIRE(!s_ols.coefficients.empty());
  CHECK(s_ols.coefficients.front().bias > 0.3);
  CHECK(s_ols.hansen_defined == 0);

  // thread count must not change the summary
  const auto s_iv_threads = synth::monte_carlo(cfg, iv, 60, 3);
  CHECK(s_iv.serialize() == s_iv_threads.serialize());

  // a spec naming an absent column fails every replication but still reports
  est::ModelSpec broken = iv;
  broken.endogenous = {"gvc_fwdX"};
  const auto s_bad = synth::monte_carlo(cfg, broken, 4);
  CHECK(s_bad.failures == 4);
  CHECK(s_bad.coefficients.empty());
  CHECK(!s_bad.failure_notes.empty());

  CHECK_THROWS_WITH_AS(synth::monte_carlo(cfg, iv, 1), doctest::Contains("at least 2"), Error);
}
