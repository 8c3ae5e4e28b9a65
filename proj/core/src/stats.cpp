#include "gvcpanel/stats.hpp"

#include <cmath>
#include <limits>

#include "gvcpanel/error.hpp"

namespace gvcpanel::panel {

std::vector<VariableSummary> describe(const PanelDataset& ds,
                                      const std::vector<std::string>& variables) {
  const auto& names = variables.empty() ? ds.column_names() : variables;
  std::vector<VariableSummary> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    const Column& col = ds.column(name);
    VariableSummary s;
    s.name = name;
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (col.missing[i]) continue;
      const double v = col.values[i];
      if (s.n == 0) {
        s.min = s.max = v;
      } else {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
      }
      sum += v;
      ++s.n;
    }
    if (s.n > 0) s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0.0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (col.missing[i]) continue;
        const double d = col.values[i] - s.mean;
        ss += d * d;
      }
      s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Correlogram correlate(const PanelDataset& ds, const std::vector<std::string>& variables) {
  const auto& names = variables.empty() ? ds.column_names() : variables;
  const std::size_t k = names.size();
  Correlogram out;
  out.names = names;
  out.r = num::Matrix(k, k, std::numeric_limits<double>::quiet_NaN());
  out.n_pairs = num::Matrix(k, k, 0.0);
  const std::size_t n = ds.size();
  std::vector<const Column*> cols(k);
  for (std::size_t c = 0; c < k; ++c) cols[c] = &ds.column(names[c]);

  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (cols[a]->missing[i] || cols[b]->missing[i]) continue;
        const double x = cols[a]->values[i];
        const double y = cols[b]->values[i];
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++m;
      }
      out.n_pairs(a, b) = out.n_pairs(b, a) = static_cast<double>(m);
      if (m < 2) continue;
      const double dm = static_cast<double>(m);
      const double covxy = sxy - sx * sy / dm;
      const double varx = sxx - sx * sx / dm;
      const double vary = syy - sy * sy / dm;
      if (varx <= 0.0 || vary <= 0.0) continue;
      const double r = covxy / std::sqrt(varx * vary);
      out.r(a, b) = out.r(b, a) = std::max(-1.0, std::min(1.0, r));
    }
  }
  return out;
}

}  // namespace gvcpanel::panel
