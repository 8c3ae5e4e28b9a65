#include "gvcpanel/indicators.hpp"

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::indicators {

using panel::Column;
using panel::PanelDataset;

std::optional<double> forward_participation(double v_gvc, double va) {
  if (!(va > 0.0)) return std::nullopt;
  if (v_gvc < 0.0) return std::nullopt;
  return v_gvc / va;
}

std::optional<double> backward_participation(double y_gvc, double y) {
  if (!(y > 0.0)) return std::nullopt;
  if (y_gvc < 0.0) return std::nullopt;
  return y_gvc / y;
}

std::optional<double> position(double upstreamness, double downstreamness) {
  if (!(upstreamness >= 1.0) || !(downstreamness >= 1.0)) return std::nullopt;
  return upstreamness / downstreamness;
}

Orientation classify_orientation(double pos) {
  if (pos > 1.0 + kOrientationEps) return Orientation::forward_oriented;
  if (pos < 1.0 - kOrientationEps) return Orientation::backward_oriented;
  return Orientation::balanced;
}

PanelDataset derive_indicator_columns(const PanelDataset& accounts) {
  for (const char* req : {"v_gvc", "va", "y_gvc", "y", "upstreamness", "downstreamness"})
    if (!accounts.has_column(req))
      throw Error("[indicators] accounts dataset is missing column '" + std::string(req) + "'");

  const Column& v_gvc = accounts.column("v_gvc");
  const Column& va = accounts.column("va");
  const Column& y_gvc = accounts.column("y_gvc");
  const Column& y = accounts.column("y");
  const Column& up = accounts.column("upstreamness");
  const Column& down = accounts.column("downstreamness");

  const std::size_t n = accounts.size();
  Column fwd, bwd, pos;
  for (Column* c : {&fwd, &bwd, &pos}) {
    c->values.assign(n, 0.0);
    c->missing.assign(n, 1);
  }
  std::size_t fwd_masked = 0, bwd_masked = 0, pos_masked = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (!v_gvc.missing[i] && !va.missing[i]) {
      if (auto r = forward_participation(v_gvc.values[i], va.values[i])) {
        fwd.values[i] = *r;
        fwd.missing[i] = 0;
      } else {
        ++fwd_masked;
      }
    }
    if (!y_gvc.missing[i] && !y.missing[i]) {
      if (auto r = backward_participation(y_gvc.values[i], y.values[i])) {
        bwd.values[i] = *r;
        bwd.missing[i] = 0;
      } else {
        ++bwd_masked;
      }
    }
    if (!up.missing[i] && !down.missing[i]) {
      if (auto r = position(up.values[i], down.values[i])) {
        pos.values[i] = *r;
        pos.missing[i] = 0;
      } else {
        ++pos_masked;
      }
    }
  }
  if (fwd_masked) fwd.note = std::to_string(fwd_masked) + " cell(s) masked: bad flow or va <= 0";
  if (bwd_masked) bwd.note = std::to_string(bwd_masked) + " cell(s) masked: bad flow or y <= 0";
  if (pos_masked) pos.note = std::to_string(pos_masked) + " cell(s) masked: length below 1";
  if (fwd_masked || bwd_masked || pos_masked)
    log_info("indicators: masked fwd=" + std::to_string(fwd_masked) +
             " bwd=" + std::to_string(bwd_masked) + " pos=" + std::to_string(pos_masked));

  PanelDataset out = accounts;
  out.add_column("gvc_fwd", std::move(fwd));
  out.add_column("gvc_bwd", std::move(bwd));
  out.add_column("gvc_pos", std::move(pos));
  return out;
}

PanelDataset load_accounts_csv(const std::filesystem::path& path) {
  PanelDataset ds = panel::read_panel_csv(path);
  if (!ds.has_country() || !ds.has_sector())
    throw Error("[indicators] " + path.string() + ": accounts must be keyed by country,sector,year");
  for (const char* req : {"v_gvc", "va", "y_gvc", "y", "upstreamness", "downstreamness"})
    if (!ds.has_column(req))
      throw Error("[indicators] " + path.string() + ": missing column '" + std::string(req) + "'");
  return ds;
}

}  // namespace gvcpanel::indicators
