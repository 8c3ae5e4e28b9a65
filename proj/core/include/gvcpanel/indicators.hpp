#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gvcpanel/panel.hpp"

namespace gvcpanel::indicators {

// Per-cell sector accounts feeding the participation/position measures.
// Flows are in levels (same currency unit); upstreamness/downstreamness are
// the usual average propagation lengths, bounded below by 1.
struct SectorAccounts {
  double v_gvc = 0.0;          // value added crossing at least one border
  double va = 0.0;             // total value added
  double y_gvc = 0.0;          // output embodying foreign value added
  double y = 0.0;              // total output
  double upstreamness = 0.0;   // forward linkage length
  double downstreamness = 0.0; // backward linkage length
};

// Share of value added that enters cross-border production chains.
// Missing (nullopt) when inputs are negative or va is not positive.
std::optional<double> forward_participation(double v_gvc, double va);

// Share of output that embodies foreign inputs. Missing when inputs are
// negative or y is not positive.
std::optional<double> backward_participation(double y_gvc, double y);

// Upstreamness over downstreamness; above 1 the cell sells into chains more
// than it buys from them. Missing unless both lengths are >= 1.
std::optional<double> position(double upstreamness, double downstreamness);

enum class Orientation { backward_oriented, balanced, forward_oriented };

inline constexpr double kOrientationEps = 1e-9;

// Threshold at 1 with a +-1e-9 dead band mapping to balanced.
Orientation classify_orientation(double pos);

// Adds gvc_fwd, gvc_bwd, gvc_pos computed from the six accounts columns
// (v_gvc, va, y_gvc, y, upstreamness, downstreamness). Cells that fail an
// indicator's preconditions get a missing value; counts per reason go into
// the column notes and the log.
panel::PanelDataset derive_indicator_columns(const panel::PanelDataset& accounts);

// Accounts CSV: country,sector,year,v_gvc,va,y_gvc,y,upstreamness,downstreamness.
panel::PanelDataset load_accounts_csv(const std::filesystem::path& path);

}  // namespace gvcpanel::indicators
