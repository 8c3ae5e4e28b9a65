#include "gvcpanel/design.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gvcpanel/error.hpp"
#include "gvcpanel/linalg.hpp"
#include "gvcpanel/log.hpp"
#include "gvcpanel/transforms.hpp"

namespace gvcpanel::est {

using panel::Column;
using panel::ObsKey;
using panel::PanelDataset;

namespace {

std::string lag_name(const std::string& var, int k) { return var + "_lag" + std::to_string(k); }

// String form of a key's FE level; doubles as the dummy label suffix.
std::string fe_level(const ObsKey& key, FeDim dim) {
  switch (dim) {
    case FeDim::country:
      if (!key.country) throw Error("[design] fixed effect on country but keys have none");
      return *key.country;
    case FeDim::sector:
      if (!key.sector) throw Error("[design] fixed effect on sector but keys have none");
      return std::to_string(*key.sector);
    case FeDim::year:
      return std::to_string(key.year);
    case FeDim::region:
      if (!key.region) throw Error("[design] fixed effect on region but keys have none");
      return *key.region;
  }
  throw Error("[design] bad fixed effect dimension");
}

// Sort FE levels numerically when they are numbers, lexically otherwise.
bool level_less(FeDim dim, const std::string& a, const std::string& b) {
  if (dim == FeDim::sector || dim == FeDim::year) return std::stol(a) < std::stol(b);
  return a < b;
}

}  // namespace

DesignMatrices build_design(const PanelDataset& ds, const ModelSpec& spec) {
  spec.validate();

  for (const auto& v : spec.endogenous)
    if (!ds.has_column(v)) throw Error("[design] endogenous column not in panel: " + v);
  for (const auto& v : spec.controls)
    if (!ds.has_column(v)) throw Error("[design] control column not in panel: " + v);
  for (const auto& v : spec.extra_instruments)
    if (!ds.has_column(v)) throw Error("[design] extra instrument column not in panel: " + v);
  if (!ds.has_column(spec.dependent))
    throw Error("[design] dependent column not in panel: " + spec.dependent);

  if (spec.endogenous.empty() && !spec.instrument_lags.empty())
    log_info("design: no endogenous regressors; instrument lag rule ignored");

  // Materialize lag instruments that are not already present.
  PanelDataset working = ds;
  std::vector<std::string> lag_cols;
  for (const auto& v : spec.endogenous) {
    for (int k : spec.instrument_lags) {
      const std::string name = lag_name(v, k);
      if (!working.has_column(name)) working = panel::lag(working, v, k);
      lag_cols.push_back(name);
    }
  }

  // Listwise deletion over everything the model touches.
  std::vector<std::string> required;
  required.push_back(spec.dependent);
  required.insert(required.end(), spec.endogenous.begin(), spec.endogenous.end());
  required.insert(required.end(), spec.controls.begin(), spec.controls.end());
  required.insert(required.end(), lag_cols.begin(), lag_cols.end());
  required.insert(required.end(), spec.extra_instruments.begin(), spec.extra_instruments.end());

  const std::size_t n_all = working.size();
  std::vector<std::uint8_t> keep(n_all, 1);
  for (const auto& name : required) {
    const Column& col = working.column(name);
    for (std::size_t i = 0; i < n_all; ++i)
      if (col.missing[i]) keep[i] = 0;
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n_all; ++i)
    if (keep[i]) rows.push_back(i);
  const std::size_t n = rows.size();
  if (n == 0) throw Error("[design] no complete observations after listwise deletion");
  log_debug("design: " + std::to_string(n) + " of " + std::to_string(n_all) +
            " rows survive listwise deletion");

  DesignMatrices dm;
  dm.sample_keys.reserve(n);
  for (std::size_t r : rows) dm.sample_keys.push_back(working.key(r));
  dm.y.resize(n);
  {
    const Column& dep = working.column(spec.dependent);
    for (std::size_t i = 0; i < n; ++i) dm.y[i] = dep.values[rows[i]];
  }

  // FE dummies: levels observed in the surviving sample, smallest level as
  // the reference, one column per remaining level.
  struct DummyPlan {
    std::string label;
    FeDim dim;
    std::string level;
  };
  std::vector<DummyPlan> dummies;
  for (FeDim dim : spec.fixed_effects) {
    std::set<std::string> levels;
    for (const auto& key : dm.sample_keys) levels.insert(fe_level(key, dim));
    std::vector<std::string> ordered(levels.begin(), levels.end());
    std::sort(ordered.begin(), ordered.end(),
              [&](const std::string& a, const std::string& b) { return level_less(dim, a, b); });
    if (ordered.size() < 2) {
      log_debug("design: fixed effect " + to_string(dim) + " has a single level; skipped");
      continue;
    }
    for (std::size_t l = 1; l < ordered.size(); ++l)
      dummies.push_back({to_string(dim) + "=" + ordered[l], dim, ordered[l]});
  }

  // Candidate X: endogenous, controls, dummies, intercept.
  std::vector<std::string> cand_labels;
  std::vector<std::uint8_t> cand_dummy;
  const std::size_t k_endo = spec.endogenous.size();
  num::Matrix cand(n, k_endo + spec.controls.size() + dummies.size() + 1);
  std::size_t cc = 0;
  auto fill_from_column = [&](const std::string& name) {
    const Column& col = working.column(name);
    for (std::size_t i = 0; i < n; ++i) cand(i, cc) = col.values[rows[i]];
    cand_labels.push_back(name);
    cand_dummy.push_back(0);
    ++cc;
  };
  for (const auto& v : spec.endogenous) fill_from_column(v);
  for (const auto& v : spec.controls) fill_from_column(v);
  for (const auto& d : dummies) {
    for (std::size_t i = 0; i < n; ++i)
      cand(i, cc) = fe_level(dm.sample_keys[i], d.dim) == d.level ? 1.0 : 0.0;
    cand_labels.push_back(d.label);
    cand_dummy.push_back(1);
    ++cc;
  }
  for (std::size_t i = 0; i < n; ++i) cand(i, cc) = 1.0;
  cand_labels.push_back("const");
  cand_dummy.push_back(0);
  ++cc;

  // Order-preserving rank filter; earlier columns win ties.
  const auto kept = num::independent_columns(cand);
  std::set<std::size_t> kept_set(kept.begin(), kept.end());
  for (std::size_t c = 0; c < cand.cols(); ++c) {
    if (kept_set.count(c)) continue;
    if (c < k_endo)
      throw Error("[design] endogenous regressor is collinear in the sample: " + cand_labels[c]);
    dm.dropped_collinear.push_back(cand_labels[c]);
  }
  if (!dm.dropped_collinear.empty()) {
    std::string msg = "design: dropped collinear column(s):";
    for (const auto& l : dm.dropped_collinear) msg += " " + l;
    log_info(msg);
  }

  dm.x = num::Matrix(n, kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) dm.x(i, j) = cand(i, kept[j]);
    dm.x_labels.push_back(cand_labels[kept[j]]);
    dm.x_is_dummy.push_back(cand_dummy[kept[j]]);
  }
  dm.n_endogenous = k_endo;

  // Candidate Z: the filter runs with X's exogenous block first so columns
  // that already earned a place in X cannot be evicted by an instrument;
  // the stored Z puts excluded instruments first.
  const std::size_t k_exog = dm.x.cols() - k_endo;
  std::vector<std::string> excl_labels;
  std::vector<std::vector<double>> excl_cols;
  for (const auto& name : lag_cols) {
    const Column& col = working.column(name);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = col.values[rows[i]];
    excl_cols.push_back(std::move(v));
    excl_labels.push_back(name);
  }
  for (const auto& name : spec.extra_instruments) {
    const Column& col = working.column(name);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = col.values[rows[i]];
    excl_cols.push_back(std::move(v));
    excl_labels.push_back(name);
  }

  num::Matrix zf(n, k_exog + excl_cols.size());
  for (std::size_t j = 0; j < k_exog; ++j)
    for (std::size_t i = 0; i < n; ++i) zf(i, j) = dm.x(i, k_endo + j);
  for (std::size_t j = 0; j < excl_cols.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) zf(i, k_exog + j) = excl_cols[j][i];
  const auto zkept = num::independent_columns(zf);

  std::vector<std::size_t> kept_excluded;
  for (std::size_t c : zkept) {
    if (c < k_exog) continue;  // exogenous block always survives (already independent)
    kept_excluded.push_back(c - k_exog);
  }
  for (std::size_t j = 0; j < excl_cols.size(); ++j) {
    if (std::find(kept_excluded.begin(), kept_excluded.end(), j) == kept_excluded.end()) {
      dm.dropped_collinear.push_back(excl_labels[j]);
      log_info("design: dropped collinear instrument " + excl_labels[j]);
    }
  }
  if (kept_excluded.size() < k_endo)
    throw Error("[design] underidentified: " + std::to_string(kept_excluded.size()) +
                " excluded instrument(s) for " + std::to_string(k_endo) +
                " endogenous regressor(s)");

  dm.n_excluded = kept_excluded.size();
  dm.z = num::Matrix(n, dm.n_excluded + k_exog);
  for (std::size_t j = 0; j < dm.n_excluded; ++j) {
    const auto& src = excl_cols[kept_excluded[j]];
    for (std::size_t i = 0; i < n; ++i) dm.z(i, j) = src[i];
    dm.z_labels.push_back(excl_labels[kept_excluded[j]]);
    dm.z_is_dummy.push_back(0);
  }
  for (std::size_t j = 0; j < k_exog; ++j) {
    for (std::size_t i = 0; i < n; ++i) dm.z(i, dm.n_excluded + j) = dm.x(i, k_endo + j);
    dm.z_labels.push_back(dm.x_labels[k_endo + j]);
    dm.z_is_dummy.push_back(dm.x_is_dummy[k_endo + j]);
  }
  if (dm.l() < dm.k())
    throw Error("[design] fewer instruments than regressors after filtering");
  if (n <= dm.l())
    throw Error("[design] sample too small: " + std::to_string(n) + " rows for " +
                std::to_string(dm.l()) + " instrument columns");
  return dm;
}

}  // namespace gvcpanel::est
