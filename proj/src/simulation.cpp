#include "etsm/simulation.hpp"

#include <cmath>
#include <sstream>

namespace etsm {

void SimConfig::validate() const {
  model.validate();
  trigger.validate();
  if (x0.size() != model.n()) throw std::invalid_argument("config: x0 must have n entries");
  if (!x0.allFinite()) throw std::invalid_argument("config: x0 must be finite");
  if (N < model.n()) throw std::invalid_argument("config: N must be at least n");
  if (a.size() != model.n()) throw std::invalid_argument("config: a must have n entries");
}

Vector step_plant(const Vector& x, const Vector& w, const SystemModel& model) {
  if (x.size() != model.n() || w.size() != model.n()) {
    throw std::invalid_argument("step_plant: dimension mismatch");
  }
  return model.A * x + w;
}

TriggerDecision evaluate_trigger(double y, double y_tau_prev, const TriggerConfig& trigger) {
  const double delta = y - y_tau_prev;
  if (delta * delta > trigger.threshold) return {true, y};
  return {false, y_tau_prev};
}

NoiseSample sample_noise(const SystemModel& model, Rng& rng) {
  NoiseSample s;
  s.w = sample_point(Ellipsoid(Vector::Zero(model.n()), model.Q), rng);
  s.v = sample_point(Ellipsoid(Vector::Zero(1), Matrix::Constant(1, 1, model.R)), rng)(0);
  return s;
}

Trace simulate_plant(const SimConfig& config) {
  config.validate();
  const auto& model = config.model;
  const auto steps = static_cast<std::size_t>(config.N) + 1;
  Rng rng(config.seed);
  // Factor the noise shapes once; draws match sample_noise.
  const Matrix q_root = psd_sqrt(model.Q);
  const double r_root = std::sqrt(model.R);

  Trace trace;
  trace.states.reserve(steps);
  trace.outputs.reserve(steps);
  trace.records.reserve(steps);
  trace.output_noise.reserve(steps);
  trace.disturbances.reserve(steps - 1);

  Vector x = config.x0;
  double y_tau = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector w = q_root * sample_unit_ball(model.n(), rng);
    const double v = r_root * sample_unit_ball(1, rng)(0);
    const double y = model.C.dot(x) + v;
    TriggerDecision decision{true, y};
    if (k > 0) decision = evaluate_trigger(y, y_tau, config.trigger);
    y_tau = decision.y_tau;

    trace.states.push_back(x);
    trace.outputs.push_back(y);
    trace.output_noise.push_back(v);
    trace.records.push_back({static_cast<std::int64_t>(k), decision.gamma, decision.y_tau});
    if (k + 1 < steps) {
      trace.disturbances.push_back(w);
      x = step_plant(x, w, model);
    }
  }
  return trace;
}

Metrics compute_metrics(const Trace& trace, std::span<const ObserverOutput> estimates,
                        std::vector<double>* distances) {
  Metrics m;
  const auto steps = trace.records.size();
  if (steps > 1) {
    std::int64_t sent = 0;
    for (std::size_t k = 1; k < steps; ++k) sent += trace.records[k].gamma ? 1 : 0;
    m.comm_rate = static_cast<double>(sent) / static_cast<double>(steps - 1);
  }
  double error_sum = 0.0;
  std::int64_t error_count = 0;
  if (distances) distances->clear();
  for (const auto& est : estimates) {
    const Vector& x = trace.states.at(static_cast<std::size_t>(est.k));
    const double dist = contains(est.posterior_set, x).distance;
    if (distances) distances->push_back(dist);
    if (!(dist <= 1.0 + kContainTolerance)) ++m.containment_violations;
    m.max_generalized_distance = std::max(m.max_generalized_distance, dist);
    if (est.k >= 1) {
      error_sum += (x - est.posterior_set.center()).norm();
      ++error_count;
    }
  }
  m.estimates = static_cast<std::int64_t>(estimates.size());
  if (error_count > 0) m.mean_error = error_sum / static_cast<double>(error_count);
  return m;
}

ClosedLoopResult run_closed_loop(const SimConfig& config) {
  config.validate();
  if (!has_full_rank(observability_matrix(config.model))) {
    throw std::invalid_argument("run_closed_loop: observability matrix is rank-deficient");
  }
  ClosedLoopResult result;
  result.trace = simulate_plant(config);
  result.estimates = observer_run(result.trace.records, config.model, config.trigger, config.a);
  result.metrics = compute_metrics(result.trace, result.estimates, &result.generalized_distances);
  return result;
}

}  // namespace etsm
