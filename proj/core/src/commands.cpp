#include "gvcpanel/commands.hpp"

#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "gvcpanel/config.hpp"
#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/estimator.hpp"
#include "gvcpanel/fdi.hpp"
#include "gvcpanel/indicators.hpp"
#include "gvcpanel/log.hpp"
#include "gvcpanel/model_spec.hpp"
#include "gvcpanel/monte_carlo.hpp"
#include "gvcpanel/partition.hpp"
#include "gvcpanel/synth.hpp"
#include "gvcpanel/transforms.hpp"

namespace gvcpanel::cli {

namespace {

void emit(const std::filesystem::path& out, const std::string& text) {
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  io::write_text_file(out, text);
  log_info("cli: wrote " + out.string());
}

// A spec file is either flat key=value or a single [section].
std::map<std::string, std::string> spec_entries(const io::ConfigFile& cfg) {
  if (cfg.sections.empty()) return cfg.globals;
  if (cfg.sections.size() == 1) return cfg.merged(0);
  throw Error("[cli] " + cfg.source + ": a spec file holds one model; use a plan for ladders");
}

est::ModelSpec load_spec(const std::filesystem::path& path) {
  const auto cfg = io::read_config(path);
  return est::parse_model_spec(spec_entries(cfg), cfg.source);
}

synth::SyntheticConfig load_synth_config(const std::filesystem::path& path,
                                         std::optional<std::uint64_t> seed) {
  synth::SyntheticConfig out;
  if (!path.empty()) {
    const auto cfg = io::read_config(path);
    if (!cfg.sections.empty())
      throw Error("[cli] " + cfg.source + ": generator config uses only global keys");
    out = synth::parse_synthetic_config(cfg.globals, cfg.source);
  }
  if (seed) out.seed = *seed;
  return out;
}

}  // namespace

void cmd_ingest(const IngestArgs& args) {
  if (args.out.empty()) throw Error("[cli] ingest needs --out for the panel file");
  const auto corr = panel::load_correspondence(args.correspondence);
  const auto load = panel::load_fdi_csv(args.projects, corr, args.years);
  if (load.quarantined)
    log_info("cli: " + std::to_string(load.quarantined) + " project record(s) quarantined");
  auto ingest = panel::ingest_fdi_projects(load.records, args.regional);
  if (ingest.quarantined)
    log_info("cli: " + std::to_string(ingest.quarantined) + " record(s) dropped in aggregation");
  panel::PanelDataset ds = std::move(ingest.panel);

  if (!args.covariates.empty())
    ds = panel::join(ds, panel::read_panel_csv(args.covariates), panel::JoinLevel::country_year);
  if (!args.accounts.empty()) {
    const auto ind =
        indicators::derive_indicator_columns(indicators::load_accounts_csv(args.accounts));
    ds = panel::join(ds, ind,
                     args.regional ? panel::JoinLevel::country_sector_year
                                   : panel::JoinLevel::key);
  }
  if (args.winsor) {
    const auto [lo, hi] = *args.winsor;
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
      throw Error("[cli] winsor bounds must satisfy 0 <= lo < hi <= 1");
    ds = panel::winsorize(ds, "jobs", lo, hi);
  }
  ds = panel::log_transform(ds, "jobs");
  panel::write_panel_csv(args.out, ds);
  log_info("cli: ingested " + std::to_string(ds.size()) + " row(s) -> " + args.out.string());
}

void cmd_indicators(const std::filesystem::path& accounts, const std::filesystem::path& out) {
  if (out.empty()) throw Error("[cli] indicators needs --out for the panel file");
  const auto ds = indicators::derive_indicator_columns(indicators::load_accounts_csv(accounts));
  panel::write_panel_csv(out, ds);
}

void cmd_estimate(const EstimateArgs& args) {
  const auto ds = panel::read_panel_csv(args.panel);
  const auto cfg = io::read_config(args.spec);
  tables::ResultColumn col;
  col.label = cfg.sections.empty() ? "model" : cfg.sections.front().label;
  col.result = est::run_specification(ds, est::parse_model_spec(spec_entries(cfg), cfg.source));
  emit(args.out, tables::render_results({col}, args.format));
}

void cmd_replicate(const ReplicateArgs& args) {
  const auto ds = panel::read_panel_csv(args.panel);
  const auto plan = io::read_config(args.plan);
  if (plan.sections.empty())
    throw Error("[cli] " + plan.source + ": plan needs at least one [column] section");

  // optional split support: sample_filter names a class of this partition
  std::map<std::string, panel::PanelDataset> classes;
  if (plan.globals.count("partition")) {
    const auto part = splits::load_partition_csv(plan.globals.at("partition"));
    for (auto& [label, sub] : splits::split_sample(ds, part).classes)
      classes.emplace(label, std::move(sub));
  }

  std::vector<tables::ResultColumn> columns(plan.sections.size());
  auto run_column = [&](std::size_t i) {
    auto& col = columns[i];
    col.label = plan.sections[i].label;
    try {
      auto entries = plan.merged(i);
      entries.erase("partition");
      const auto spec =
          est::parse_model_spec(entries, plan.source + ":" + plan.sections[i].label);
      const panel::PanelDataset* sample = &ds;
      if (!spec.sample_filter.empty()) {
        const auto at = classes.find(spec.sample_filter);
        if (at == classes.end())
          throw Error("[cli] plan column '" + col.label + "': no split class '" +
                      spec.sample_filter + "' (is the plan's partition set?)");
        sample = &at->second;
      }
      col.result = est::run_specification(*sample, spec);
    } catch (const Error& e) {
      col.failed = true;
      col.failure_note = e.what();
      log_info("cli: column '" + col.label + "' failed: " + e.what());
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(args.jobs, 1), plan.sections.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < columns.size(); ++i) run_column(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < columns.size(); i += workers) run_column(i);
      });
    for (auto& t : pool) t.join();
  }
  emit(args.out, tables::render_results(columns, args.format));
}

void cmd_simulate(const SimulateArgs& args) {
  const auto cfg = load_synth_config(args.config, args.seed);
  const auto spec = load_spec(args.spec);
  const auto summary =
      synth::monte_carlo(cfg, spec, static_cast<std::size_t>(std::max(args.replications, 0)),
                         static_cast<std::size_t>(std::max(args.jobs, 1)));
  emit(args.out, summary.serialize());
}

void cmd_stats(const StatsArgs& args) {
  const auto ds = panel::read_panel_csv(args.panel);
  std::vector<std::string> vars;
  for (const auto& name : synth::variable_names())
    if (ds.has_column(name)) vars.push_back(name);
  if (vars.size() < 2) vars = ds.column_names();
  emit(args.out, tables::render_descriptives(ds, vars, args.format) + "\n" +
                     tables::render_correlogram(ds, vars, args.format));
}

void cmd_synth(const SynthArgs& args) {
  if (args.out.empty() && args.corpus.empty())
    throw Error("[cli] synth needs --out or --corpus");
  const auto cfg = load_synth_config(args.config, args.seed);
  const auto sp = synth::generate_calibrated(cfg);
  if (!args.out.empty()) panel::write_panel_csv(args.out, sp.data);
  if (!args.corpus.empty()) synth::export_corpus(sp, args.corpus);
  if (!args.truth.empty()) {
    std::string text;
    text += "# ground truth used by the generator (not part of the panel)\n";
    for (const auto& [name, b] : sp.truth.beta)
      text += "beta." + name + " = " + io::format_double(b) + "\n";
    text += "intercept = " + io::format_double(sp.truth.intercept) + "\n";
    text += "sigma_eps = " + io::format_double(sp.truth.sigma_eps) + "\n";
    text += "endogeneity_rho = " + io::format_double(sp.truth.endogeneity_rho) + "\n";
    text += "invalidity_rho = " + io::format_double(sp.truth.invalidity_rho) + "\n";
    text += "persistence = " + io::format_double(sp.truth.persistence) + "\n";
    for (const auto& [k, v] : sp.truth.country_fe)
      text += "country_fe." + k + " = " + io::format_double(v) + "\n";
    for (const auto& [k, v] : sp.truth.sector_fe)
      text += "sector_fe." + k + " = " + io::format_double(v) + "\n";
    for (const auto& [k, v] : sp.truth.year_fe)
      text += "year_fe." + k + " = " + io::format_double(v) + "\n";
    io::write_text_file(args.truth, text);
  }
}

}  // namespace gvcpanel::cli
