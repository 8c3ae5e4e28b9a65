#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gvcpanel/panel.hpp"

namespace gvcpanel::panel {

// One announced project, already mapped to a 2-digit sector code. region may
// be empty (project not attributed below country level).
struct FdiProjectRecord {
  std::string country;
  std::string region;
  int sector_code = 0;
  int year = 0;
  double jobs = 0.0;
};

// Raw sector label -> 2-digit code.
struct SectorCorrespondence {
  std::map<std::string, int> to_code;
};

SectorCorrespondence load_correspondence(const std::filesystem::path& path);
SectorCorrespondence parse_correspondence_text(std::string_view text, std::string source_label);

struct ProjectLoad {
  std::vector<FdiProjectRecord> records;
  std::size_t quarantined = 0;
  std::vector<std::string> notes;  // one per quarantined record
};

// Reads a projects CSV (country,region,sector_raw,year,jobs). Records with
// unknown sector labels, years outside the window, or bad jobs values are
// quarantined with a note; the run continues.
ProjectLoad load_fdi_csv(const std::filesystem::path& path, const SectorCorrespondence& corr,
                         const YearWindow& window);
ProjectLoad parse_fdi_csv_text(std::string_view text, std::string source_label,
                               const SectorCorrespondence& corr, const YearWindow& window);

struct IngestResult {
  PanelDataset panel;
  std::size_t quarantined = 0;  // records dropped during aggregation
  std::vector<std::string> notes;
};

// Aggregates project records into a jobs panel. regional=false keys cells by
// (country, sector, year) and adds n_regions, the number of distinct region
// labels among the cell's projects (at least 1). regional=true keys by
// (country, sector, year, region); records with no region are quarantined.
// Cells with no projects are absent, not zero.
IngestResult ingest_fdi_projects(const std::vector<FdiProjectRecord>& records, bool regional);

// Lowercased, whitespace-normalized region label used for keys/counting.
std::string normalize_region(std::string_view raw);

}  // namespace gvcpanel::panel
