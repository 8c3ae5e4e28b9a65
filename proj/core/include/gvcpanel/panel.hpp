#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gvcpanel::panel {

// Observation years the pipeline accepts; records outside are quarantined.
struct YearWindow {
  int first = 2003;
  int last = 2020;
  bool contains(int y) const { return y >= first && y <= last; }
};

// Panel cell identity. Which optional fields are populated defines the
// dataset's key shape; every row in a dataset shares one shape. Ordering is
// lexicographic over (country, sector, year, region).
struct ObsKey {
  std::optional<std::string> country;
  std::optional<int> sector;  // NACE-style 2-digit code, 1..99
  int year = 0;
  std::optional<std::string> region;

  auto operator<=>(const ObsKey&) const = default;
  bool operator==(const ObsKey&) const = default;

  std::string describe() const;
};

struct Column {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;  // 1 = missing; values[i] is 0 there
  std::string note;                   // free-form provenance remark

  std::size_t n_present() const;
};

// Keyed panel: unique keys in sorted order, named columns with missing
// masks. Treat instances as immutable once built; transforms return copies.
class PanelDataset {
 public:
  PanelDataset() = default;
  // Sorts and validates keys (uniqueness, uniform shape).
  explicit PanelDataset(std::vector<ObsKey> keys);

  void add_column(const std::string& name, Column col);
  void replace_column(const std::string& name, Column col);

  std::size_t size() const { return keys_.size(); }
  const std::vector<ObsKey>& keys() const { return keys_; }
  const ObsKey& key(std::size_t i) const { return keys_[i]; }

  bool has_column(const std::string& name) const;
  const Column& column(const std::string& name) const;
  const std::vector<std::string>& column_names() const { return names_; }

  std::optional<std::size_t> find(const ObsKey& key) const;

  bool has_country() const { return shape_country_; }
  bool has_sector() const { return shape_sector_; }
  bool has_region() const { return shape_region_; }

 private:
  std::vector<ObsKey> keys_;
  std::map<ObsKey, std::size_t> index_;
  std::vector<std::string> names_;
  std::map<std::string, Column> columns_;
  bool shape_country_ = false, shape_sector_ = false, shape_region_ = false;
};

enum class JoinLevel { key, country_year, sector_year, country_sector_year };

// Left join: every base row kept, unmatched rows get missing values for the
// joined columns. At the broadcast levels the other dataset must be keyed
// exactly at that level. Column name clashes are an error.
PanelDataset join(const PanelDataset& base, const PanelDataset& other, JoinLevel level);

// Rows where keep[i] != 0.
PanelDataset filter(const PanelDataset& base, const std::vector<std::uint8_t>& keep);

// CSV round trip. Key columns are country/sector/year/region (whichever the
// shape uses), data columns follow in stored order; missing values are
// empty fields.
PanelDataset read_panel_csv(const std::filesystem::path& path);
PanelDataset read_panel_csv_text(std::string_view text, std::string source_label);
std::string panel_csv_text(const PanelDataset& ds);
void write_panel_csv(const std::filesystem::path& path, const PanelDataset& ds);

}  // namespace gvcpanel::panel
