#include "gvcpanel/partition.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::splits {

std::string dimension_name(Dimension d) {
  return d == Dimension::country ? "country" : "sector";
}

void PartitionMap::validate() const {
  if (mapping.empty()) throw Error("[splits] partition mapping is empty");
  for (const auto& [key, label] : mapping) {
    if (key.empty()) throw Error("[splits] partition has an empty key");
    if (label.empty()) throw Error("[splits] partition key '" + key + "' has an empty class");
    if (dimension == Dimension::sector) {
      char* end = nullptr;
      const long code = std::strtol(key.c_str(), &end, 10);
      if (end == key.c_str() || *end != '\0' || code < 1 || code > 99)
        throw Error("[splits] sector partition key '" + key + "' is not a 2-digit code");
    }
  }
}

namespace {

PartitionMap from_table(const io::CsvTable& table) {
  if (table.header.size() != 2 || table.header[1] != "class" ||
      (table.header[0] != "country" && table.header[0] != "sector"))
    throw Error("[splits] " + table.source +
                ": header must be 'country,class' or 'sector,class'");
  PartitionMap out;
  out.dimension = table.header[0] == "country" ? Dimension::country : Dimension::sector;
  out.provenance = table.source;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.line_numbers[r]);
    if (row.size() != 2)
      throw Error("[splits] " + table.source + ":" + line + ": expected 2 fields");
    if (out.mapping.count(row[0]))
      throw Error("[splits] " + table.source + ":" + line + ": duplicate key '" + row[0] + "'");
    out.mapping[row[0]] = row[1];
  }
  out.validate();
  return out;
}

}  // namespace

PartitionMap parse_partition_text(std::string_view text, std::string source_label) {
  return from_table(io::read_csv_text(text, std::move(source_label)));
}

PartitionMap load_partition_csv(const std::filesystem::path& path) {
  return from_table(io::read_csv(path));
}

SplitResult split_sample(const panel::PanelDataset& ds, const PartitionMap& partition) {
  partition.validate();
  if (partition.dimension == Dimension::country && !ds.has_country())
    throw Error("[splits] country partition on a panel without country keys");
  if (partition.dimension == Dimension::sector && !ds.has_sector())
    throw Error("[splits] sector partition on a panel without sector keys");

  std::map<std::string, std::vector<std::uint8_t>> keep;
  for (const auto& [key, label] : partition.mapping)
    keep.emplace(label, std::vector<std::uint8_t>(ds.size(), 0));

  SplitResult out;
  std::set<std::string> unmapped;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& k = ds.key(i);
    const std::string text = partition.dimension == Dimension::country
                                 ? *k.country
                                 : std::to_string(*k.sector);
    const auto at = partition.mapping.find(text);
    if (at == partition.mapping.end()) {
      ++out.quarantined;
      unmapped.insert(text);
      continue;
    }
    keep[at->second][i] = 1;
  }
  out.unmapped_keys.assign(unmapped.begin(), unmapped.end());

  for (const auto& [label, mask] : keep) {
    if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end()) {
      out.empty_classes.push_back(label);
      continue;
    }
    out.classes.emplace_back(label, panel::filter(ds, mask));
  }

  std::string note = "splits: " + dimension_name(partition.dimension) + " partition into " +
                     std::to_string(out.classes.size()) + " class(es)";
  if (out.quarantined)
    note += ", " + std::to_string(out.quarantined) + " row(s) quarantined (" +
            std::to_string(out.unmapped_keys.size()) + " unmapped key(s))";
  for (const auto& label : out.empty_classes) note += ", class '" + label + "' empty";
  log_info(note);
  return out;
}

}  // namespace gvcpanel::splits
