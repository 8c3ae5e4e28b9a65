#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gvcpanel/panel.hpp"

namespace gvcpanel::splits {

enum class Dimension { country, sector };

std::string dimension_name(Dimension d);

// Key-to-class assignment along one key dimension. Sector keys are the
// 2-digit codes as text ("10"), matching the mapping-file format.
struct PartitionMap {
  Dimension dimension = Dimension::country;
  std::map<std::string, std::string> mapping;
  std::string provenance;

  void validate() const;
};

// CSV `country,class` or `sector,class`; the first header field names the
// dimension. '#' comment lines carry the file's assumptions.
PartitionMap parse_partition_text(std::string_view text, std::string source_label);
PartitionMap load_partition_csv(const std::filesystem::path& path);

struct SplitResult {
  // label-sorted; every sub-panel keeps all columns of the input
  std::vector<std::pair<std::string, panel::PanelDataset>> classes;
  std::size_t quarantined = 0;             // rows whose key has no class
  std::vector<std::string> unmapped_keys;  // distinct, sorted
  std::vector<std::string> empty_classes;  // mapped labels with no rows
};

// Disjoint sub-panels by class; class rows plus quarantined rows add back up
// to the input. Classes with no rows are reported so callers can skip them.
SplitResult split_sample(const panel::PanelDataset& ds, const PartitionMap& partition);

}  // namespace gvcpanel::splits
