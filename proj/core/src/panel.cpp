#include "gvcpanel/panel.hpp"

#include <algorithm>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"

namespace gvcpanel::panel {

std::string ObsKey::describe() const {
  std::string s = "(";
  if (country) s += *country;
  if (sector) s += "," + std::to_string(*sector);
  s += "," + std::to_string(year);
  if (region) s += "," + *region;
  s += ")";
  return s;
}

std::size_t Column::n_present() const {
  std::size_t n = 0;
  for (auto m : missing)
    if (!m) ++n;
  return n;
}

PanelDataset::PanelDataset(std::vector<ObsKey> keys) : keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end());
  if (!keys_.empty()) {
    shape_country_ = keys_.front().country.has_value();
    shape_sector_ = keys_.front().sector.has_value();
    shape_region_ = keys_.front().region.has_value();
  }
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const ObsKey& k = keys_[i];
    if (k.country.has_value() != shape_country_ || k.sector.has_value() != shape_sector_ ||
        k.region.has_value() != shape_region_)
      throw Error("[panel] mixed key shapes; first offending key " + k.describe());
    if (i > 0 && keys_[i] == keys_[i - 1])
      throw Error("[panel] duplicate key " + k.describe());
    index_.emplace(k, i);
  }
}

void PanelDataset::add_column(const std::string& name, Column col) {
  if (name.empty()) throw Error("[panel] column name must not be empty");
  if (columns_.count(name)) throw Error("[panel] column already exists: " + name);
  if (col.values.size() != keys_.size() || col.missing.size() != keys_.size())
    throw Error("[panel] column '" + name + "' length does not match key count");
  for (std::size_t i = 0; i < col.missing.size(); ++i)
    if (col.missing[i]) col.values[i] = 0.0;
  names_.push_back(name);
  columns_.emplace(name, std::move(col));
}

void PanelDataset::replace_column(const std::string& name, Column col) {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw Error("[panel] no such column: " + name);
  if (col.values.size() != keys_.size() || col.missing.size() != keys_.size())
    throw Error("[panel] column '" + name + "' length does not match key count");
  for (std::size_t i = 0; i < col.missing.size(); ++i)
    if (col.missing[i]) col.values[i] = 0.0;
  it->second = std::move(col);
}

bool PanelDataset::has_column(const std::string& name) const { return columns_.count(name) > 0; }

const Column& PanelDataset::column(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw Error("[panel] no such column: " + name);
  return it->second;
}

std::optional<std::size_t> PanelDataset::find(const ObsKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PanelDataset join(const PanelDataset& base, const PanelDataset& other, JoinLevel level) {
  switch (level) {
    case JoinLevel::key:
      if (other.has_country() != base.has_country() || other.has_sector() != base.has_sector() ||
          other.has_region() != base.has_region())
        throw Error("[panel] key-level join requires matching key shapes");
      break;
    case JoinLevel::country_year:
      if (!base.has_country()) throw Error("[panel] country_year join: base has no country");
      if (!other.has_country() || other.has_sector() || other.has_region())
        throw Error("[panel] country_year join: other must be keyed by (country, year)");
      break;
    case JoinLevel::sector_year:
      if (!base.has_sector()) throw Error("[panel] sector_year join: base has no sector");
      if (other.has_country() || !other.has_sector() || other.has_region())
        throw Error("[panel] sector_year join: other must be keyed by (sector, year)");
      break;
    case JoinLevel::country_sector_year:
      if (!base.has_country() || !base.has_sector())
        throw Error("[panel] country_sector_year join: base has no country or sector");
      if (!other.has_country() || !other.has_sector() || other.has_region())
        throw Error("[panel] country_sector_year join: other must be keyed by (country, sector, year)");
      break;
  }
  for (const auto& name : other.column_names())
    if (base.has_column(name)) throw Error("[panel] join would duplicate column: " + name);

  PanelDataset out = base;
  const std::size_t n = base.size();
  std::vector<std::optional<std::size_t>> match(n);
  for (std::size_t i = 0; i < n; ++i) {
    ObsKey probe = base.key(i);
    if (level == JoinLevel::country_year) {
      probe.sector.reset();
      probe.region.reset();
    } else if (level == JoinLevel::sector_year) {
      probe.country.reset();
      probe.region.reset();
    } else if (level == JoinLevel::country_sector_year) {
      probe.region.reset();
    }
    match[i] = other.find(probe);
  }
  for (const auto& name : other.column_names()) {
    const Column& src = other.column(name);
    Column col;
    col.values.assign(n, 0.0);
    col.missing.assign(n, 1);
    col.note = src.note;
    for (std::size_t i = 0; i < n; ++i) {
      if (match[i] && !src.missing[*match[i]]) {
        col.values[i] = src.values[*match[i]];
        col.missing[i] = 0;
      }
    }
    out.add_column(name, std::move(col));
  }
  return out;
}

PanelDataset filter(const PanelDataset& base, const std::vector<std::uint8_t>& keep) {
  if (keep.size() != base.size()) throw Error("[panel] filter mask length mismatch");
  std::vector<ObsKey> keys;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) {
      keys.push_back(base.key(i));
      rows.push_back(i);
    }
  }
  PanelDataset out(std::move(keys));
  for (const auto& name : base.column_names()) {
    const Column& src = base.column(name);
    Column col;
    col.note = src.note;
    col.values.reserve(rows.size());
    col.missing.reserve(rows.size());
    // keys were already sorted in base, so subset order is preserved
    for (std::size_t r : rows) {
      col.values.push_back(src.values[r]);
      col.missing.push_back(src.missing[r]);
    }
    out.add_column(name, std::move(col));
  }
  return out;
}

PanelDataset read_panel_csv_text(std::string_view text, std::string source_label) {
  const io::CsvTable t = io::read_csv_text(text, std::move(source_label));
  const int ic = t.column("country");
  const int is = t.column("sector");
  const int iy = t.column("year");
  const int ir = t.column("region");
  if (iy < 0) throw Error("[panel] " + t.source + ": required column 'year' is missing");

  std::vector<ObsKey> keys;
  keys.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ObsKey k;
    if (ic >= 0 && !row[ic].empty()) k.country = row[ic];
    if (is >= 0 && !row[is].empty())
      k.sector = static_cast<int>(io::parse_long(row[is], t.source, t.line_numbers[r], "sector"));
    k.year = static_cast<int>(io::parse_long(row[iy], t.source, t.line_numbers[r], "year"));
    if (ir >= 0 && !row[ir].empty()) k.region = row[ir];
    keys.push_back(std::move(k));
  }
  PanelDataset out(keys);  // sorts; map source rows to slots once
  std::vector<std::size_t> slot(t.rows.size());
  for (std::size_t r = 0; r < keys.size(); ++r) slot[r] = *out.find(keys[r]);

  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == ic || ci == is || ci == iy || ci == ir) continue;
    Column col;
    col.values.assign(out.size(), 0.0);
    col.missing.assign(out.size(), 1);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][c].empty()) continue;
      col.values[slot[r]] = io::parse_double(t.rows[r][c], t.source, t.line_numbers[r], t.header[c]);
      col.missing[slot[r]] = 0;
    }
    out.add_column(t.header[c], std::move(col));
  }
  return out;
}

PanelDataset read_panel_csv(const std::filesystem::path& path) {
  return read_panel_csv_text(io::read_text_file(path), path.string());
}

std::string panel_csv_text(const PanelDataset& ds) {
  std::vector<std::string> header;
  if (ds.has_country()) header.push_back("country");
  if (ds.has_sector()) header.push_back("sector");
  header.push_back("year");
  if (ds.has_region()) header.push_back("region");
  for (const auto& name : ds.column_names()) header.push_back(name);

  std::string out = io::csv_line(header);
  std::vector<std::string> fields;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    fields.clear();
    const ObsKey& k = ds.key(i);
    if (ds.has_country()) fields.push_back(*k.country);
    if (ds.has_sector()) fields.push_back(std::to_string(*k.sector));
    fields.push_back(std::to_string(k.year));
    if (ds.has_region()) fields.push_back(*k.region);
    for (const auto& name : ds.column_names()) {
      const Column& col = ds.column(name);
      fields.push_back(col.missing[i] ? std::string() : io::format_double(col.values[i]));
    }
    out += io::csv_line(fields);
  }
  return out;
}

void write_panel_csv(const std::filesystem::path& path, const PanelDataset& ds) {
  io::write_text_file(path, panel_csv_text(ds));
}

}  // namespace gvcpanel::panel
