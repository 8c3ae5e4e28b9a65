// Microbenchmarks for the hot paths: the QR core, a full IV/GMM fit at
// production panel sizes, panel generation, and indicator derivation.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gvcpanel/estimator.hpp"
#include "gvcpanel/indicators.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/matrix.hpp"
#include "gvcpanel/monte_carlo.hpp"
#include "gvcpanel/synth.hpp"

using namespace gvcpanel;

namespace {

num::Matrix random_matrix(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  num::Matrix m(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = nd(g);
  return m;
}

synth::SyntheticConfig panel_config(std::int64_t countries) {
  synth::SyntheticConfig cfg;
  cfg.n_countries = static_cast<std::size_t>(countries);
  cfg.n_sectors = 13;
  cfg.years = {2003, 2020};
  cfg.endogeneity_rho = 0.5;
  cfg.planted_beta = {{"gvc_fwd", 0.9}};
  cfg.seed = 99;
  return cfg;
}

void bm_qr_factor(benchmark::State& state) {
  const auto a = random_matrix(static_cast<std::size_t>(state.range(0)), 58, 1);
  for (auto _ : state) {
    num::HouseholderQr qr(a, num::HouseholderQr::Mode::pivoted);
    benchmark::DoNotOptimize(qr.rank());
  }
}
BENCHMARK(bm_qr_factor)->Arg(1500)->Arg(5600);

void bm_qr_solve(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 58, 2);
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  std::vector<double> y(n);
  for (auto& v : y) v = nd(g);
  const num::HouseholderQr qr(a, num::HouseholderQr::Mode::pivoted);
  for (auto _ : state) {
    auto b = qr.solve(y);
    benchmark::DoNotOptimize(b.data());
  }
}
BENCHMARK(bm_qr_solve)->Arg(5600);

void bm_generate_panel(benchmark::State& state) {
  auto cfg = panel_config(state.range(0));
  for (auto _ : state) {
    cfg.seed += 1;
    auto sp = synth::generate_calibrated(cfg);
    benchmark::DoNotOptimize(sp.data.size());
  }
}
BENCHMARK(bm_generate_panel)->Arg(12)->Arg(26);

void bm_iv_fit(benchmark::State& state) {
  const auto sp = synth::generate_calibrated(panel_config(state.range(0)));
  est::ModelSpec iv;
  iv.dependent = "log_jobs";
  iv.endogenous = {"gvc_fwd"};
  iv.controls = {"gdp_growth", "log_gdp_pe"};
  for (auto _ : state) {
    auto r = est::run_specification(sp.data, iv);
    benchmark::DoNotOptimize(r.n_obs);
  }
}
BENCHMARK(bm_iv_fit)->Arg(12)->Arg(26);

void bm_ols_fit(benchmark::State& state) {
  const auto sp = synth::generate_calibrated(panel_config(state.range(0)));
  est::ModelSpec ols;
  ols.dependent = "log_jobs";
  ols.controls = {"gvc_fwd", "gdp_growth", "log_gdp_pe"};
  for (auto _ : state) {
    auto r = est::run_specification(sp.data, ols);
    benchmark::DoNotOptimize(r.n_obs);
  }
}
BENCHMARK(bm_ols_fit)->Arg(26);

void bm_derive_indicators(benchmark::State& state) {
  const auto sp = synth::generate_calibrated(panel_config(26));
  const auto dir = std::filesystem::temp_directory_path() / "gvc_bench_corpus";
  synth::export_corpus(sp, dir);
  const auto accounts = indicators::load_accounts_csv(dir / "accounts.csv");
  for (auto _ : state) {
    auto out = indicators::derive_indicator_columns(accounts);
    benchmark::DoNotOptimize(out.size());
  }
}
BENCHMARK(bm_derive_indicators);

}  // namespace

BENCHMARK_MAIN();
