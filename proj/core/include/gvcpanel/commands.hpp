#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>

#include "gvcpanel/panel.hpp"
#include "gvcpanel/table.hpp"

namespace gvcpanel::cli {

// Each command throws gvcpanel::Error with a stage-labeled message; the
// binary turns that into a nonzero exit. Paths left empty mean "skip" for
// inputs and "standard output" for outputs.

struct IngestArgs {
  std::filesystem::path projects;
  std::filesystem::path correspondence;
  std::filesystem::path covariates;  // optional country-year block
  std::filesystem::path accounts;    // optional cell-level accounts
  std::filesystem::path out;
  bool regional = false;
  panel::YearWindow years{};
  std::optional<std::pair<double, double>> winsor;  // jobs quantiles, before the log
};
void cmd_ingest(const IngestArgs& args);

// Accounts file in, same keys out with the derived indicator columns.
void cmd_indicators(const std::filesystem::path& accounts, const std::filesystem::path& out);

struct EstimateArgs {
  std::filesystem::path panel;
  std::filesystem::path spec;
  std::filesystem::path out;
  tables::Format format = tables::Format::markdown;
};
void cmd_estimate(const EstimateArgs& args);

struct ReplicateArgs {
  std::filesystem::path panel;
  std::filesystem::path plan;
  std::filesystem::path out;
  tables::Format format = tables::Format::markdown;
  int jobs = 1;
};
void cmd_replicate(const ReplicateArgs& args);

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path spec;
  std::filesystem::path out;
  int replications = 100;
  int jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides the config file's seed
};
void cmd_simulate(const SimulateArgs& args);

struct StatsArgs {
  std::filesystem::path panel;
  std::filesystem::path out;
  tables::Format format = tables::Format::markdown;
};
void cmd_stats(const StatsArgs& args);

struct SynthArgs {
  std::filesystem::path config;
  std::filesystem::path out;     // panel CSV
  std::filesystem::path corpus;  // optional: also export raw source files here
  std::filesystem::path truth;   // optional: ground-truth sidecar
  std::optional<std::uint64_t> seed;
};
void cmd_synth(const SynthArgs& args);

}  // namespace gvcpanel::cli
