#include "gvcpanel/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "gvcpanel/csv.hpp"
#include "gvcpanel/error.hpp"
#include "gvcpanel/estimator.hpp"
#include "gvcpanel/log.hpp"
#include "gvcpanel/rng.hpp"

namespace gvcpanel::synth {

namespace {

constexpr double kZ05 = 1.959963984540054;
constexpr std::size_t kMaxNotes = 12;

struct RepOutcome {
  bool ok = false;
  std::string note;
  std::vector<std::string> labels;
  std::vector<double> estimates;
  std::vector<double> ses;
  bool hansen_defined = false;
  double hansen_p = 1.0;
  bool kp_defined = false;
  double kp_p = 1.0;
  std::size_t n_obs = 0;
  std::map<std::string, double> truth;
};

RepOutcome run_one(const SyntheticConfig& base, const est::ModelSpec& spec, std::uint64_t seed) {
  RepOutcome out;
  try {
    SyntheticConfig cfg = base;
    cfg.seed = seed;
    const SyntheticPanel sp = generate_calibrated(cfg);
    const est::EstimationResult res = est::run_specification(sp.data, spec);
    for (const est::Coefficient& c : res.coefficients) {
      if (c.is_dummy || c.label == "const") continue;
      out.labels.push_back(c.label);
      out.estimates.push_back(c.estimate);
      out.ses.push_back(c.se);
    }
    if (res.diagnostics.hansen.dof > 0 && res.diagnostics.hansen.pvalue) {
      out.hansen_defined = true;
      out.hansen_p = *res.diagnostics.hansen.pvalue;
    }
    if (res.diagnostics.kp) {
      out.kp_defined = true;
      out.kp_p = res.diagnostics.kp->pvalue;
    }
    out.n_obs = res.n_obs;
    out.truth = sp.truth.beta;
    out.ok = true;
  } catch (const Error& e) {
    out.note = e.what();
  } catch (const std::exception& e) {
    out.note = e.what();
  }
  return out;
}

}  // namespace

MonteCarloSummary monte_carlo(const SyntheticConfig& config, const est::ModelSpec& spec,
                              std::size_t replications, std::size_t threads) {
  if (replications < 2) throw Error("[synth] monte_carlo needs at least 2 replications");
  config.validate();
  spec.validate();

  const Rng base(config.seed);
  std::vector<std::uint64_t> seeds(replications);
  for (std::size_t r = 0; r < replications; ++r) seeds[r] = base.fork(r + 1).seed();

  std::vector<RepOutcome> reps(replications);
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, replications));
  if (n_threads == 1) {
    for (std::size_t r = 0; r < replications; ++r) reps[r] = run_one(config, spec, seeds[r]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < replications; r += n_threads)
          reps[r] = run_one(config, spec, seeds[r]);
      });
    for (std::thread& t : pool) t.join();
  }

  MonteCarloSummary sum;
  sum.replications = replications;

  // Reduce in replication order so the summary never depends on scheduling.
  std::vector<std::string> label_order;
  std::map<std::string, std::vector<std::pair<double, double>>> by_label;
  const std::map<std::string, double>* truth = nullptr;
  std::size_t hansen_reject = 0, kp_reject05 = 0, kp_reject001 = 0;
  double total_n = 0.0;
  std::size_t ok_count = 0;
  for (const RepOutcome& rep : reps) {
    if (!rep.ok) {
      ++sum.failures;
      if (sum.failure_notes.size() < kMaxNotes) sum.failure_notes.push_back(rep.note);
      continue;
    }
    ++ok_count;
    total_n += static_cast<double>(rep.n_obs);
    if (!truth) truth = &rep.truth;
    for (std::size_t i = 0; i < rep.labels.size(); ++i) {
      auto [it, inserted] = by_label.try_emplace(rep.labels[i]);
      if (inserted) label_order.push_back(rep.labels[i]);
      it->second.emplace_back(rep.estimates[i], rep.ses[i]);
    }
    if (rep.hansen_defined) {
      ++sum.hansen_defined;
      if (rep.hansen_p < 0.05) ++hansen_reject;
    }
    if (rep.kp_defined) {
      ++sum.kp_defined;
      if (rep.kp_p < 0.05) ++kp_reject05;
      if (rep.kp_p < 0.001) ++kp_reject001;
    }
  }

  for (const std::string& label : label_order) {
    const auto& draws = by_label[label];
    CoefficientSummary cs;
    cs.label = label;
    cs.n = draws.size();
    double mean = 0.0;
    for (const auto& [est, se] : draws) mean += est;
    mean /= static_cast<double>(draws.size());
    double ssq = 0.0;
    std::size_t rejected = 0;
    for (const auto& [est, se] : draws) {
      ssq += (est - mean) * (est - mean);
      if (se > 0.0 && std::abs(est / se) >= kZ05) ++rejected;
    }
    cs.mean = mean;
    cs.sd = draws.size() > 1 ? std::sqrt(ssq / static_cast<double>(draws.size() - 1)) : 0.0;
    cs.reject_rate_05 = static_cast<double>(rejected) / static_cast<double>(draws.size());
    if (truth) {
      const auto it = truth->find(label);
      if (it != truth->end()) {
        cs.has_truth = true;
        cs.truth = it->second;
        cs.bias = mean - it->second;
      }
    }
    sum.coefficients.push_back(std::move(cs));
  }

  if (sum.hansen_defined > 0)
    sum.hansen_reject_rate_05 =
        static_cast<double>(hansen_reject) / static_cast<double>(sum.hansen_defined);
  if (sum.kp_defined > 0) {
    sum.kp_reject_rate_05 =
        static_cast<double>(kp_reject05) / static_cast<double>(sum.kp_defined);
    sum.kp_reject_rate_001 =
        static_cast<double>(kp_reject001) / static_cast<double>(sum.kp_defined);
  }
  if (ok_count > 0) sum.mean_n_obs = total_n / static_cast<double>(ok_count);

  log_info("[synth] monte carlo: " + std::to_string(ok_count) + "/" +
           std::to_string(replications) + " replications succeeded");
  return sum;
}

std::string MonteCarloSummary::serialize() const {
  auto f = [](double v) { return io::format_double(v); };
  std::string out;
  out += "replications=" + std::to_string(replications) + "\n";
  out += "failures=" + std::to_string(failures) + "\n";
  out += "mean_n_obs=" + f(mean_n_obs) + "\n";
  for (const CoefficientSummary& c : coefficients) {
    out += "coef " + c.label + " n=" + std::to_string(c.n) + " mean=" + f(c.mean) +
           " sd=" + f(c.sd) + " reject05=" + f(c.reject_rate_05);
    if (c.has_truth) out += " truth=" + f(c.truth) + " bias=" + f(c.bias);
    out += "\n";
  }
  out += "hansen n=" + std::to_string(hansen_defined) + " reject05=" + f(hansen_reject_rate_05) +
         "\n";
  out += "kp n=" + std::to_string(kp_defined) + " reject05=" + f(kp_reject_rate_05) +
         " reject001=" + f(kp_reject_rate_001) + "\n";
  for (const std::string& note : failure_notes) out += "note " + note + "\n";
  return out;
}

}  // namespace gvcpanel::synth
