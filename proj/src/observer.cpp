#include "etsm/observer.hpp"

#include <cmath>
#include <sstream>

namespace etsm {

Ellipsoid prior_set(const Ellipsoid& previous, const SystemModel& model) {
  const Ellipsoid disturbance(Vector::Zero(model.n()), model.Q);
  return minkowski_sum_outer(linear_transform(previous, model.A), disturbance);
}

Ellipsoid measurement_info_set(std::span<const MeasurementRecord> window, const SystemModel& model,
                               const TriggerConfig& trigger, const WeightVector& a) {
  return window_state_set(model, trigger, a, window);
}

FusionResult fuse(const Ellipsoid& measurement, const Ellipsoid& prior, bool regularize) {
  if (measurement.dim() != prior.dim()) throw std::invalid_argument("fuse: dimension mismatch");
  const Eigen::Index n = measurement.dim();
  Matrix gain;
  bool regularized = false;
  try {
    gain = optimal_fusion_matrix(measurement.shape(), prior.shape());
  } catch (const NumericalError&) {
    if (!regularize) throw;
    Matrix sum = measurement.shape() + prior.shape();
    sum.diagonal().array() += kRegularization * sum.trace() / static_cast<double>(n);
    gain = Eigen::PartialPivLU<Matrix>(sum).solve(prior.shape()).transpose();
    regularized = true;
  }
  const Matrix complement = Matrix::Identity(n, n) - gain;
  const Ellipsoid meas_part = linear_transform(measurement, gain);
  const Ellipsoid prior_part = linear_transform(prior, complement);
  std::optional<double> parameter;
  if (!meas_part.degenerate() && !prior_part.degenerate()) {
    parameter = optimal_sum_parameter(meas_part.shape(), prior_part.shape());
  }
  return FusionResult{minkowski_sum_outer(meas_part, prior_part), gain, parameter,
                      meas_part.trace(), prior_part.trace(), regularized};
}

std::vector<Ellipsoid> predict_no_delay(const Ellipsoid& posterior, const SystemModel& model,
                                        Eigen::Index horizon) {
  if (horizon < 1 || horizon > model.n() - 1) {
    std::ostringstream msg;
    msg << "predict_no_delay: horizon " << horizon << " outside [1, " << model.n() - 1 << "]";
    throw std::invalid_argument(msg.str());
  }
  std::vector<Ellipsoid> out;
  out.reserve(static_cast<std::size_t>(horizon));
  out.push_back(prior_set(posterior, model));
  for (Eigen::Index j = 2; j <= horizon; ++j) out.push_back(prior_set(out.back(), model));
  return out;
}

namespace {

std::optional<double> guard_bound(const SystemModel& model, const TriggerConfig& trigger,
                                  const WeightVector& a) {
  if (model.n() > kMaxEnumerationDim) return std::nullopt;
  return convergence_bound(model, trigger, a);
}

}  // namespace

SetMembershipObserver::SetMembershipObserver(SystemModel model, TriggerConfig trigger,
                                             WeightVector weights)
    : model_(std::move(model)),
      trigger_(trigger),
      weights_(std::move(weights)),
      window_map_(model_, trigger_, weights_),
      bound_(guard_bound(model_, trigger_, weights_)) {}

ObserverOutput SetMembershipObserver::step(std::span<const MeasurementRecord> window) {
  const Ellipsoid measurement = window_map_(window);
  std::optional<Ellipsoid> prior;
  std::optional<FusionResult> fusion;
  if (posterior_) {
    prior = prior_set(*posterior_, model_);
    fusion = fuse(measurement, *prior, /*regularize=*/true);
    posterior_ = fusion->posterior;
  } else {
    posterior_ = measurement;
  }

  const double trace = posterior_->trace();
  const bool diverged = !std::isfinite(trace) || (bound_ && trace > 1e6 * (*bound_) * (*bound_));
  if (diverged) {
    std::ostringstream msg;
    msg << "observer diverged at k = " << window.front().k << ": Tr(P_hat) = " << trace;
    if (bound_) msg << " exceeds 1e6 x bound^2 = " << 1e6 * (*bound_) * (*bound_);
    throw DivergenceError(msg.str());
  }

  std::vector<Ellipsoid> predictions;
  if (model_.n() > 1) predictions = predict_no_delay(*posterior_, model_, model_.n() - 1);
  return ObserverOutput{window.front().k, window.back().k, measurement, prior, *posterior_,
                        fusion, std::move(predictions)};
}

std::vector<ObserverOutput> observer_run(std::span<const MeasurementRecord> records,
                                         const SystemModel& model, const TriggerConfig& trigger,
                                         const WeightVector& a) {
  const auto n = static_cast<std::size_t>(model.n());
  if (records.size() < n) {
    std::ostringstream msg;
    msg << "observer_run: log holds " << records.size() << " records, need at least n = " << n;
    throw std::invalid_argument(msg.str());
  }
  SetMembershipObserver observer(model, trigger, a);
  std::vector<ObserverOutput> outputs;
  outputs.reserve(records.size() - n + 1);
  for (std::size_t k = 0; k + n <= records.size(); ++k) {
    outputs.push_back(observer.step(records.subspan(k, n)));
  }
  return outputs;
}

}  // namespace etsm
