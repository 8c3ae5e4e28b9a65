#include "gvcpanel/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "gvcpanel/error.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::panel {

PanelDataset log_transform(const PanelDataset& ds, const std::string& column) {
  const Column& src = ds.column(column);
  Column out;
  out.values.assign(ds.size(), 0.0);
  out.missing.assign(ds.size(), 1);
  std::size_t nonpositive = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (src.missing[i]) continue;
    if (src.values[i] <= 0.0) {
      ++nonpositive;
      continue;
    }
    out.values[i] = std::log(src.values[i]);
    out.missing[i] = 0;
  }
  if (nonpositive) {
    out.note = std::to_string(nonpositive) + " nonpositive value(s) set missing";
    log_info("log_transform(" + column + "): " + out.note);
  }
  PanelDataset copy = ds;
  copy.add_column("log_" + column, std::move(out));
  return copy;
}

PanelDataset winsorize(const PanelDataset& ds, const std::string& column, double lo_q,
                       double hi_q) {
  if (!(lo_q >= 0.0 && hi_q <= 1.0 && lo_q < hi_q))
    throw Error("[transform] winsorize: need 0 <= lo < hi <= 1");
  const Column& src = ds.column(column);
  std::vector<double> present;
  present.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!src.missing[i]) present.push_back(src.values[i]);
  if (present.empty()) return ds;
  std::sort(present.begin(), present.end());
  const std::size_t n = present.size();
  auto order_stat = [&](double q) {
    const std::size_t r = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(n))));
    return present[std::min(r, n) - 1];
  };
  const double lo = order_stat(lo_q);
  const double hi = order_stat(hi_q);

  Column out = src;
  std::size_t capped = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (out.missing[i]) continue;
    if (out.values[i] < lo) {
      out.values[i] = lo;
      ++capped;
    } else if (out.values[i] > hi) {
      out.values[i] = hi;
      ++capped;
    }
  }
  if (capped) log_debug("winsorize(" + column + "): capped " + std::to_string(capped) + " value(s)");
  PanelDataset copy = ds;
  copy.replace_column(column, std::move(out));
  return copy;
}

PanelDataset lag(const PanelDataset& ds, const std::string& column, int k) {
  if (k < 1) throw Error("[transform] lag order must be >= 1");
  const Column& src = ds.column(column);
  Column out;
  out.values.assign(ds.size(), 0.0);
  out.missing.assign(ds.size(), 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ObsKey probe = ds.key(i);
    probe.year -= k;
    const auto j = ds.find(probe);
    if (!j || src.missing[*j]) continue;
    out.values[i] = src.values[*j];
    out.missing[i] = 0;
  }
  PanelDataset copy = ds;
  copy.add_column(column + "_lag" + std::to_string(k), std::move(out));
  return copy;
}

}  // namespace gvcpanel::panel
