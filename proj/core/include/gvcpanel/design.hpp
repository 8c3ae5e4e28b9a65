#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvcpanel/matrix.hpp"
#include "gvcpanel/model_spec.hpp"
#include "gvcpanel/panel.hpp"

namespace gvcpanel::est {

// Estimation-ready matrices after listwise deletion, dummy expansion and
// collinearity pruning. X columns are ordered endogenous, controls, FE
// dummies, intercept; Z is ordered excluded instruments (endogenous lags
// then extra instruments) followed by X's exogenous columns.
struct DesignMatrices {
  std::vector<double> y;
  num::Matrix x;
  num::Matrix z;
  std::vector<std::string> x_labels;
  std::vector<std::string> z_labels;
  std::vector<std::uint8_t> x_is_dummy;  // FE dummy indicator (intercept is not a dummy)
  std::vector<std::uint8_t> z_is_dummy;
  std::size_t n_endogenous = 0;  // leading X columns
  std::size_t n_excluded = 0;    // leading Z columns
  std::vector<panel::ObsKey> sample_keys;
  std::vector<std::string> dropped_collinear;  // labels removed by the rank filter

  std::size_t n() const { return y.size(); }
  std::size_t k() const { return x.cols(); }
  std::size_t l() const { return z.cols(); }
};

// Assembles y, X, Z from the panel per the spec. Lag instrument columns are
// computed on the fly when absent. Listwise deletion runs over every
// variable the model touches; dummy levels come from the surviving sample;
// the sequential rank filter protects earlier columns (endogenous first).
// Dropping an endogenous column or ending underidentified is a hard error.
DesignMatrices build_design(const panel::PanelDataset& ds, const ModelSpec& spec);

}  // namespace gvcpanel::est
