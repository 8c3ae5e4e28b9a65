#pragma once

#include <string>
#include <vector>

#include "gvcpanel/estimator.hpp"
#include "gvcpanel/panel.hpp"

namespace gvcpanel::tables {

enum class Format { csv, markdown };

Format parse_format(const std::string& name);

// One ladder column: either a finished fit or a failure note; failed columns
// render a FAILED marker and never abort the table.
struct ResultColumn {
  std::string label;
  bool failed = false;
  std::string failure_note;
  est::EstimationResult result;
};

// Wide results table: one column per fit, `estimate stars` rows with `(se)`
// beneath, footer rows for observations, R-squared and the two instrument
// diagnostics. Coefficients and SEs use 3 significant figures, p-values 4
// decimals, NA marks an undefined (exactly identified) Hansen p-value.
std::string render_results(const std::vector<ResultColumn>& columns, Format format);

// Descriptive block (n, mean, sd, min, max) for the listed variables.
std::string render_descriptives(const panel::PanelDataset& ds,
                                const std::vector<std::string>& variables, Format format);

// Pairwise-complete correlation matrix, 4 decimals.
std::string render_correlogram(const panel::PanelDataset& ds,
                               const std::vector<std::string>& variables, Format format);

// 3 significant figures (matches the coefficient cells).
std::string sig3(double v);

}  // namespace gvcpanel::tables
