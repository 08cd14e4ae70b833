#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "etsm/model.hpp"
#include "etsm/observer.hpp"

namespace etsm {

struct SimConfig {
  SystemModel model;
  TriggerConfig trigger;
  Vector x0;
  std::int64_t N = 200;
  std::uint64_t seed = 0;
  WeightVector a = WeightVector::uniform(1);

  void validate() const;
};

struct NoiseSample {
  Vector w;
  double v = 0.0;
};

struct TriggerDecision {
  bool gamma = false;
  double y_tau = 0.0;
};

/// x_0 ... x_N, y_0 ... y_N and the channel log. disturbances[k] drives
/// x_k -> x_{k+1}; output_noise[k] enters y_k.
struct Trace {
  std::vector<Vector> states;
  std::vector<double> outputs;
  std::vector<MeasurementRecord> records;
  std::vector<Vector> disturbances;
  std::vector<double> output_noise;
};

struct Metrics {
  double mean_error = 0.0;  // E_d
  double comm_rate = 0.0;   // eta
  std::int64_t containment_violations = 0;
  double max_generalized_distance = 0.0;
  std::int64_t estimates = 0;
};

struct ClosedLoopResult {
  Trace trace;
  std::vector<ObserverOutput> estimates;
  std::vector<double> generalized_distances;  // one per estimate
  Metrics metrics;
};

Vector step_plant(const Vector& x, const Vector& w, const SystemModel& model);

/// gamma = (y - y_tau_prev)^2 > Gamma; a transmission resets y_tau to y.
TriggerDecision evaluate_trigger(double y, double y_tau_prev, const TriggerConfig& trigger);

/// Uniform draws from W = E(0, Q) and V = E(0, R).
NoiseSample sample_noise(const SystemModel& model, Rng& rng);

/// Plant and channel only. The first sample is always transmitted.
Trace simulate_plant(const SimConfig& config);

/// E_d over the estimated steps k >= 1, eta over k = 1 ... N.
Metrics compute_metrics(const Trace& trace, std::span<const ObserverOutput> estimates,
                        std::vector<double>* distances = nullptr);

/// Throws std::invalid_argument when the model is not epsilon-observable.
ClosedLoopResult run_closed_loop(const SimConfig& config);

struct SweepEntry {
  std::uint64_t seed = 0;
  Metrics metrics;
};

/// Independent runs for seeds config.seed ... config.seed + count - 1,
/// returned in seed order. The parallel form distributes seeds over OpenMP
/// threads; the serial form is the reference.
std::vector<SweepEntry> monte_carlo(const SimConfig& config, std::int64_t count);
std::vector<SweepEntry> monte_carlo_serial(const SimConfig& config, std::int64_t count);

}  // namespace etsm
