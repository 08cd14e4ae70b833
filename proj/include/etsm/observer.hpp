#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "etsm/ellipsoid.hpp"
#include "etsm/model.hpp"
#include "etsm/observability.hpp"

namespace etsm {

/// Thrown when the posterior trace leaves the range the convergence bound
/// allows (1e6 x bound^2) or stops being finite.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct FusionResult {
  Ellipsoid posterior;
  Matrix gain;                     // M*
  std::optional<double> parameter; // p*, empty when a part is degenerate
  double measurement_part_trace;   // Tr(M* P_bar M*')
  double prior_part_trace;         // Tr((I - M*) P_check (I - M*)')
  bool regularized = false;
};

struct ObserverOutput {
  std::int64_t k = 0;
  std::int64_t available_at = 0;  // k + n - 1, when the window closes
  Ellipsoid measurement_set;
  std::optional<Ellipsoid> prior_set;  // absent at the first step
  Ellipsoid posterior_set;
  std::optional<FusionResult> fusion;
  /// predictions[j - 1] bounds x_{k+j}, j = 1 ... n-1.
  std::vector<Ellipsoid> predictions;
};

/// E(A c, f+(A P A', Q)).
Ellipsoid prior_set(const Ellipsoid& previous, const SystemModel& model);

/// X_bar_k from the n records starting at k.
Ellipsoid measurement_info_set(std::span<const MeasurementRecord> window, const SystemModel& model,
                               const TriggerConfig& trigger, const WeightVector& a);

/// Trace-optimal outer bound of measurement n prior. Throws NumericalError
/// for singular P_bar + P_check unless regularize is set, in which case
/// 1e-12 Tr(P_bar + P_check)/n I is added to the sum before the solve.
FusionResult fuse(const Ellipsoid& measurement, const Ellipsoid& prior, bool regularize = false);

/// Delay-free sets for x_{k+1} ... x_{k+horizon}, 1 <= horizon <= n-1.
std::vector<Ellipsoid> predict_no_delay(const Ellipsoid& posterior, const SystemModel& model,
                                        Eigen::Index horizon);

/// Streaming form: feed each n-record window in order.
class SetMembershipObserver {
 public:
  SetMembershipObserver(SystemModel model, TriggerConfig trigger, WeightVector weights);

  ObserverOutput step(std::span<const MeasurementRecord> window);

  const SystemModel& model() const { return model_; }
  std::optional<double> bound() const { return bound_; }

 private:
  SystemModel model_;
  TriggerConfig trigger_;
  WeightVector weights_;
  WindowMap window_map_;
  std::optional<double> bound_;
  std::optional<Ellipsoid> posterior_;
};

/// Runs over a log of N+1 records and returns estimates for k = 0 ... N-(n-1).
/// Throws std::invalid_argument when the log holds fewer than n records.
std::vector<ObserverOutput> observer_run(std::span<const MeasurementRecord> records,
                                         const SystemModel& model, const TriggerConfig& trigger,
                                         const WeightVector& a);

}  // namespace etsm
