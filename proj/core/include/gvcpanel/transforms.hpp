#pragma once

#include <string>

#include "gvcpanel/panel.hpp"

namespace gvcpanel::panel {

// Adds "log_<column>"; nonpositive inputs become missing and are counted in
// the new column's note (and logged).
PanelDataset log_transform(const PanelDataset& ds, const std::string& column);

// Caps the column at its empirical lo/hi quantiles (computed over present
// values; quantile q maps to the 1-based order statistic max(1, ceil(q*n))).
// Repeated application with the same bounds is a no-op.
PanelDataset winsorize(const PanelDataset& ds, const std::string& column, double lo_q,
                       double hi_q);

// Adds "<column>_lag<k>": the value of the same unit (all key fields except
// year) exactly k years earlier; missing when that cell is absent, so gaps
// are not bridged.
PanelDataset lag(const PanelDataset& ds, const std::string& column, int k);

}  // namespace gvcpanel::panel
