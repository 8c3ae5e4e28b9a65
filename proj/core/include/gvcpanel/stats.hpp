#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gvcpanel/matrix.hpp"
#include "gvcpanel/panel.hpp"

namespace gvcpanel::panel {

struct VariableSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample sd (n-1); undefined for n < 2
  double min = 0.0;
  double max = 0.0;
};

// Per-variable summaries over present values. Empty list = all columns.
std::vector<VariableSummary> describe(const PanelDataset& ds,
                                      const std::vector<std::string>& variables = {});

struct Correlogram {
  std::vector<std::string> names;
  num::Matrix r;        // Pearson, pairwise complete; NaN when undefined
  num::Matrix n_pairs;  // observations behind each cell
};

Correlogram correlate(const PanelDataset& ds, const std::vector<std::string>& variables = {});

}  // namespace gvcpanel::panel
