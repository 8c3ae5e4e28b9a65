#include "gvcpanel/fdi.hpp"

#include <cctype>
#include <map>
#include <set>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/log.hpp"

namespace gvcpanel::panel {

std::string normalize_region(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

SectorCorrespondence parse_correspondence_text(std::string_view text, std::string source_label) {
  const io::CsvTable t = io::read_csv_text(text, std::move(source_label));
  const int iraw = t.column("sector_raw");
  const int icode = t.column("nace2");
  if (iraw < 0 || icode < 0)
    throw Error("[ingest] " + t.source + ": correspondence needs columns sector_raw,nace2");
  SectorCorrespondence corr;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& raw = t.rows[r][iraw];
    const long code = io::parse_long(t.rows[r][icode], t.source, t.line_numbers[r], "nace2");
    if (code < 1 || code > 99)
      throw Error("[ingest] " + t.source + ":" + std::to_string(t.line_numbers[r]) +
                  ": sector code out of range 1..99: " + std::to_string(code));
    auto [it, inserted] = corr.to_code.emplace(raw, static_cast<int>(code));
    if (!inserted && it->second != code)
      throw Error("[ingest] " + t.source + ":" + std::to_string(t.line_numbers[r]) +
                  ": conflicting codes for label '" + raw + "'");
  }
  return corr;
}

SectorCorrespondence load_correspondence(const std::filesystem::path& path) {
  return parse_correspondence_text(io::read_text_file(path), path.string());
}

ProjectLoad parse_fdi_csv_text(std::string_view text, std::string source_label,
                               const SectorCorrespondence& corr, const YearWindow& window) {
  const io::CsvTable t = io::read_csv_text(text, std::move(source_label));
  for (const char* req : {"country", "region", "sector_raw", "year", "jobs"})
    if (t.column(req) < 0)
      throw Error("[ingest] " + t.source + ": projects file is missing column '" +
                  std::string(req) + "'");
  const int ic = t.column("country"), ir = t.column("region"), is = t.column("sector_raw"),
            iy = t.column("year"), ij = t.column("jobs");

  ProjectLoad out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.line_numbers[r];
    auto quarantine = [&](const std::string& why) {
      ++out.quarantined;
      out.notes.push_back(t.source + ":" + std::to_string(line) + ": " + why);
    };
    if (row[ic].empty()) {
      quarantine("blank country");
      continue;
    }
    const auto sec = corr.to_code.find(row[is]);
    if (sec == corr.to_code.end()) {
      quarantine("unknown sector label '" + row[is] + "'");
      continue;
    }
    long year = 0;
    try {
      year = io::parse_long(row[iy], t.source, line, "year");
    } catch (const Error&) {
      quarantine("bad year '" + row[iy] + "'");
      continue;
    }
    if (!window.contains(static_cast<int>(year))) {
      quarantine("year " + std::to_string(year) + " outside window " +
                 std::to_string(window.first) + ".." + std::to_string(window.last));
      continue;
    }
    double jobs = 0.0;
    try {
      jobs = io::parse_double(row[ij], t.source, line, "jobs");
    } catch (const Error&) {
      quarantine("bad jobs value '" + row[ij] + "'");
      continue;
    }
    if (!(jobs >= 0.0)) {
      quarantine("negative jobs value");
      continue;
    }
    out.records.push_back({row[ic], row[ir], sec->second, static_cast<int>(year), jobs});
  }
  if (out.quarantined)
    log_info("projects load: quarantined " + std::to_string(out.quarantined) + " of " +
             std::to_string(t.rows.size()) + " record(s)");
  return out;
}

ProjectLoad load_fdi_csv(const std::filesystem::path& path, const SectorCorrespondence& corr,
                         const YearWindow& window) {
  return parse_fdi_csv_text(io::read_text_file(path), path.string(), corr, window);
}

IngestResult ingest_fdi_projects(const std::vector<FdiProjectRecord>& records, bool regional) {
  IngestResult out;
  if (regional) {
    std::map<ObsKey, double> jobs;
    for (const auto& rec : records) {
      const std::string region = normalize_region(rec.region);
      if (region.empty()) {
        ++out.quarantined;
        out.notes.push_back("regional ingest: record for " + rec.country + "/" +
                            std::to_string(rec.sector_code) + "/" + std::to_string(rec.year) +
                            " has no region");
        continue;
      }
      ObsKey k;
      k.country = rec.country;
      k.sector = rec.sector_code;
      k.year = rec.year;
      k.region = region;
      jobs[k] += rec.jobs;
    }
    std::vector<ObsKey> keys;
    keys.reserve(jobs.size());
    for (const auto& [k, v] : jobs) keys.push_back(k);
    PanelDataset ds(std::move(keys));
    Column cj, cn;
    cj.values.assign(ds.size(), 0.0);
    cj.missing.assign(ds.size(), 0);
    cn.values.assign(ds.size(), 1.0);
    cn.missing.assign(ds.size(), 0);
    for (const auto& [k, v] : jobs) cj.values[*ds.find(k)] = v;
    cj.note = "announced jobs summed over projects";
    cn.note = "distinct regions in the cell";
    ds.add_column("jobs", std::move(cj));
    ds.add_column("n_regions", std::move(cn));
    out.panel = std::move(ds);
  } else {
    struct Cell {
      double jobs = 0.0;
      std::set<std::string> regions;
    };
    std::map<ObsKey, Cell> cells;
    for (const auto& rec : records) {
      ObsKey k;
      k.country = rec.country;
      k.sector = rec.sector_code;
      k.year = rec.year;
      Cell& cell = cells[k];
      cell.jobs += rec.jobs;
      const std::string region = normalize_region(rec.region);
      if (!region.empty()) cell.regions.insert(region);
    }
    std::vector<ObsKey> keys;
    keys.reserve(cells.size());
    for (const auto& [k, v] : cells) keys.push_back(k);
    PanelDataset ds(std::move(keys));
    Column cj, cn;
    cj.values.assign(ds.size(), 0.0);
    cj.missing.assign(ds.size(), 0);
    cn.values.assign(ds.size(), 0.0);
    cn.missing.assign(ds.size(), 0);
    for (const auto& [k, cell] : cells) {
      const std::size_t i = *ds.find(k);
      cj.values[i] = cell.jobs;
      cn.values[i] = static_cast<double>(std::max<std::size_t>(1, cell.regions.size()));
    }
    cj.note = "announced jobs summed over projects";
    cn.note = "distinct regions in the cell (1 when unattributed)";
    ds.add_column("jobs", std::move(cj));
    ds.add_column("n_regions", std::move(cn));
    out.panel = std::move(ds);
  }
  if (out.quarantined)
    log_info("ingest: quarantined " + std::to_string(out.quarantined) + " record(s)");
  return out;
}

}  // namespace gvcpanel::panel
