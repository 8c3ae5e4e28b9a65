#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gvcpanel/model_spec.hpp"
#include "gvcpanel/synth.hpp"

namespace gvcpanel::synth {

struct CoefficientSummary {
  std::string label;
  std::size_t n = 0;  // replications where the column survived
  double mean = 0.0;
  double sd = 0.0;  // across replications
  bool has_truth = false;
  double truth = 0.0;
  double bias = 0.0;             // mean - truth (when planted)
  double reject_rate_05 = 0.0;   // share with |estimate/se| above the 5% normal cutoff
};

struct MonteCarloSummary {
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_notes;  // first few, one per failed replication

  // Substantive (non-dummy, non-intercept) coefficients, in spec order.
  std::vector<CoefficientSummary> coefficients;

  std::size_t hansen_defined = 0;  // replications with an overidentified model
  double hansen_reject_rate_05 = 0.0;
  std::size_t kp_defined = 0;
  double kp_reject_rate_05 = 0.0;
  double kp_reject_rate_001 = 0.0;
  double mean_n_obs = 0.0;

  // Stable text form; two summaries are equal iff their serializations are.
  std::string serialize() const;
};

// Estimates spec on `replications` panels drawn from config, replication r
// reseeded deterministically from the base seed. Estimation failures are
// recorded (message kept for the first few) and skipped, never fatal.
// Reduction runs in replication order, so the result is byte-stable for a
// given (config, spec, replications, threads irrelevant).
MonteCarloSummary monte_carlo(const SyntheticConfig& config, const est::ModelSpec& spec,
                              std::size_t replications, std::size_t threads = 1);

}  // namespace gvcpanel::synth
