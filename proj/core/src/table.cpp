#include "gvcpanel/table.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/stats.hpp"

namespace gvcpanel::tables {

namespace {

constexpr const char* kNa = "NA";

std::string stars_of(int n) { return std::string(static_cast<std::size_t>(n), '*'); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Emits rows in the chosen format; markdown inserts the rule after the
// header and pads nothing (renderers downstream can align if they care).
class RowWriter {
 public:
  RowWriter(Format fmt, std::size_t width) : fmt_(fmt), width_(width) {}

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("[table] internal: ragged row");
    if (fmt_ == Format::csv) {
      out_ << io::csv_line(cells);  // csv_line ends the line itself
    } else {
      out_ << "|";
      for (const auto& c : cells) out_ << " " << c << " |";
      out_ << "\n";
      if (!rule_done_) {
        out_ << "|";
        for (std::size_t i = 0; i < width_; ++i) out_ << " --- |";
        out_ << "\n";
        rule_done_ = true;
      }
    }
  }

  void note(const std::string& text) { notes_.push_back(text); }

  std::string finish() {
    for (const auto& n : notes_) {
      if (fmt_ == Format::csv)
        out_ << "# " << n << "\n";
      else
        out_ << "\n" << n << "\n";
    }
    return out_.str();
  }

 private:
  Format fmt_;
  std::size_t width_;
  bool rule_done_ = false;
  std::ostringstream out_;
  std::vector<std::string> notes_;
};

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "markdown") return Format::markdown;
  throw Error("[table] unknown format '" + name + "' (csv or markdown)");
}

std::string sig3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string render_results(const std::vector<ResultColumn>& columns, Format format) {
  if (columns.empty()) throw Error("[table] no result columns to render");

  // substantive rows in first-appearance order, the constant last
  std::vector<std::string> rows;
  bool any_const = false;
  for (const auto& col : columns) {
    if (col.failed) continue;
    for (const auto& c : col.result.coefficients) {
      if (c.is_dummy) continue;
      if (c.label == "const") {
        any_const = true;
        continue;
      }
      if (std::find(rows.begin(), rows.end(), c.label) == rows.end()) rows.push_back(c.label);
    }
  }
  if (any_const) rows.push_back("const");

  RowWriter w(format, columns.size() + 1);
  std::vector<std::string> header{""};
  for (const auto& col : columns) header.push_back(col.label);
  w.row(header);

  for (const auto& name : rows) {
    std::vector<std::string> est_cells{name == "const" ? "Constant" : name};
    std::vector<std::string> se_cells{""};
    for (const auto& col : columns) {
      if (col.failed) {
        est_cells.push_back("FAILED");
        se_cells.push_back("");
        continue;
      }
      const est::Coefficient* hit = nullptr;
      for (const auto& c : col.result.coefficients)
        if (!c.is_dummy && c.label == name) hit = &c;
      est_cells.push_back(hit ? sig3(hit->estimate) + stars_of(hit->stars) : "");
      se_cells.push_back(hit ? "(" + sig3(hit->se) + ")" : "");
    }
    w.row(est_cells);
    w.row(se_cells);
  }

  std::vector<std::string> n_row{"Observations"}, r2_row{"R-squared"},
      kp_row{"KP rk LM p-value"}, hansen_row{"Hansen J p-value"};
  bool negative_r2 = false;
  for (const auto& col : columns) {
    if (col.failed) {
      n_row.push_back(kNa);
      r2_row.push_back(kNa);
      kp_row.push_back(kNa);
      hansen_row.push_back(kNa);
      continue;
    }
    n_row.push_back(std::to_string(col.result.n_obs));
    r2_row.push_back(fixed(col.result.r2, 3));
    negative_r2 = negative_r2 || col.result.r2 < 0;
    const auto& diag = col.result.diagnostics;
    kp_row.push_back(diag.kp ? fixed(diag.kp->pvalue, 4) : kNa);
    hansen_row.push_back(diag.hansen.pvalue ? fixed(*diag.hansen.pvalue, 4) : kNa);
  }
  w.row(n_row);
  w.row(r2_row);
  w.row(kp_row);
  w.row(hansen_row);

  w.note("*, ** and *** mark significance at the 10, 5 and 1% level; "
         "robust standard errors in parentheses.");
  bool any_dummies = false;
  for (const auto& col : columns)
    if (!col.failed)
      for (const auto& c : col.result.coefficients) any_dummies = any_dummies || c.is_dummy;
  if (any_dummies) w.note("Fixed-effect dummies included in the fits but not reported.");
  if (negative_r2)
    w.note("A negative R-squared can occur for instrumented fits and is reported as computed.");
  for (const auto& col : columns)
    if (col.failed) w.note("column '" + col.label + "' FAILED: " + col.failure_note);
  return w.finish();
}

std::string render_descriptives(const panel::PanelDataset& ds,
                                const std::vector<std::string>& variables, Format format) {
  const auto summaries = panel::describe(ds, variables);
  RowWriter w(format, 6);
  w.row({"variable", "obs", "mean", "sd", "min", "max"});
  for (const auto& s : summaries)
    w.row({s.name, std::to_string(s.n), fixed(s.mean, 4), s.sd ? fixed(*s.sd, 4) : kNa,
           fixed(s.min, 4), fixed(s.max, 4)});
  return w.finish();
}

std::string render_correlogram(const panel::PanelDataset& ds,
                               const std::vector<std::string>& variables, Format format) {
  const auto gram = panel::correlate(ds, variables);
  RowWriter w(format, gram.names.size() + 1);
  std::vector<std::string> header{""};
  for (const auto& n : gram.names) header.push_back(n);
  w.row(header);
  for (std::size_t i = 0; i < gram.names.size(); ++i) {
    std::vector<std::string> cells{gram.names[i]};
    for (std::size_t j = 0; j < gram.names.size(); ++j) cells.push_back(fixed(gram.r(i, j), 4));
    w.row(cells);
  }
  w.note("Pairwise-complete correlations.");
  return w.finish();
}

}  // namespace gvcpanel::tables
