#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "gvcpanel/commands.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/table.hpp"

namespace {

std::pair<double, double> parse_winsor(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw gvcpanel::Error("[cli] --winsor expects lo,hi (e.g. 0.01,0.99)");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw gvcpanel::Error("[cli] --winsor expects numeric lo,hi");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panel toolkit: FDI job panels, GVC indicators, IV-GMM ladders"};
  app.require_subcommand(1);

  gvcpanel::cli::IngestArgs ingest;
  std::string ingest_winsor;
  auto* s_ingest = app.add_subcommand("ingest", "assemble a panel from raw CSV inputs");
  s_ingest->add_option("--projects", ingest.projects, "FDI projects CSV")->required();
  s_ingest->add_option("--correspondence", ingest.correspondence, "sector label map CSV")
      ->required();
  s_ingest->add_option("--covariates", ingest.covariates, "country-year covariates CSV");
  s_ingest->add_option("--accounts", ingest.accounts, "cell accounts CSV (adds indicators)");
  s_ingest->add_option("--out", ingest.out, "panel CSV to write")->required();
  s_ingest->add_flag("--regional", ingest.regional, "keep region keys");
  s_ingest->add_option("--first-year", ingest.years.first, "window start");
  s_ingest->add_option("--last-year", ingest.years.last, "window end");
  s_ingest->add_option("--winsor", ingest_winsor, "jobs winsor quantiles lo,hi");

  std::string acc_accounts, acc_out;
  auto* s_ind = app.add_subcommand("indicators", "derive indicator columns from accounts");
  s_ind->add_option("--accounts", acc_accounts, "cell accounts CSV")->required();
  s_ind->add_option("--out", acc_out, "panel CSV to write")->required();

  gvcpanel::cli::EstimateArgs est;
  std::string est_format = "markdown";
  auto* s_est = app.add_subcommand("estimate", "fit one specification");
  s_est->add_option("--panel", est.panel, "panel CSV")->required();
  s_est->add_option("--spec", est.spec, "model spec file")->required();
  s_est->add_option("--out", est.out, "output file (default stdout)");
  s_est->add_option("--format", est_format, "csv|markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));

  gvcpanel::cli::ReplicateArgs rep;
  std::string rep_format = "markdown";
  auto* s_rep = app.add_subcommand("replicate", "run a ladder plan into one table");
  s_rep->add_option("--panel", rep.panel, "panel CSV")->required();
  s_rep->add_option("--plan", rep.plan, "plan file with [column] sections")->required();
  s_rep->add_option("--out", rep.out, "output file (default stdout)");
  s_rep->add_option("--format", rep_format, "csv|markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));
  s_rep->add_option("--jobs", rep.jobs, "parallel columns");

  gvcpanel::cli::SimulateArgs sim;
  std::uint64_t sim_seed = 0;
  auto* s_sim = app.add_subcommand("simulate", "Monte Carlo over generated panels");
  s_sim->add_option("--config", sim.config, "generator config (defaults when omitted)");
  s_sim->add_option("--spec", sim.spec, "model spec file")->required();
  s_sim->add_option("--out", sim.out, "output file (default stdout)");
  s_sim->add_option("--reps", sim.replications, "replications");
  s_sim->add_option("--jobs", sim.jobs, "worker threads");
  auto* sim_seed_opt = s_sim->add_option("--seed", sim_seed, "override config seed");

  gvcpanel::cli::StatsArgs stats;
  std::string stats_format = "markdown";
  auto* s_stats = app.add_subcommand("stats", "descriptives and correlogram");
  s_stats->add_option("--panel", stats.panel, "panel CSV")->required();
  s_stats->add_option("--out", stats.out, "output file (default stdout)");
  s_stats->add_option("--format", stats_format, "csv|markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));

  gvcpanel::cli::SynthArgs synth;
  std::uint64_t synth_seed = 0;
  auto* s_synth = app.add_subcommand("synth", "generate a calibrated panel");
  s_synth->add_option("--config", synth.config, "generator config (defaults when omitted)");
  s_synth->add_option("--out", synth.out, "panel CSV to write");
  s_synth->add_option("--corpus", synth.corpus, "also export raw source files here");
  s_synth->add_option("--truth", synth.truth, "write the ground-truth sidecar");
  auto* synth_seed_opt = s_synth->add_option("--seed", synth_seed, "override config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s_ingest->parsed()) {
      if (!ingest_winsor.empty()) ingest.winsor = parse_winsor(ingest_winsor);
      gvcpanel::cli::cmd_ingest(ingest);
    } else if (s_ind->parsed()) {
      gvcpanel::cli::cmd_indicators(acc_accounts, acc_out);
    } else if (s_est->parsed()) {
      est.format = gvcpanel::tables::parse_format(est_format);
      gvcpanel::cli::cmd_estimate(est);
    } else if (s_rep->parsed()) {
      rep.format = gvcpanel::tables::parse_format(rep_format);
      gvcpanel::cli::cmd_replicate(rep);
    } else if (s_sim->parsed()) {
      if (sim_seed_opt->count()) sim.seed = sim_seed;
      gvcpanel::cli::cmd_simulate(sim);
    } else if (s_stats->parsed()) {
      stats.format = gvcpanel::tables::parse_format(stats_format);
      gvcpanel::cli::cmd_stats(stats);
    } else if (s_synth->parsed()) {
      if (synth_seed_opt->count()) synth.seed = synth_seed;
      gvcpanel::cli::cmd_synth(synth);
    }
  } catch (const gvcpanel::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
