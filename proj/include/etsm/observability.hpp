#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etsm/ellipsoid.hpp"
#include "etsm/model.hpp"

namespace etsm {

inline constexpr Eigen::Index kMaxEnumerationDim = 20;

/// [C; CA; ...; CA^{n-1}].
Matrix observability_matrix(const SystemModel& model);

/// Full column rank iff sigma_min(O) > n * 1e-12 * ||O||.
bool has_full_rank(const Matrix& o);

double spectral_norm(const Matrix& a);

/// Scalar shape W_i of the window inequality at offset i: the trace-optimal
/// outer sum of M (Gamma or Gamma_e), C A^j Q A^j' C' for j = i-1 ... 0, and R.
double measurement_uncertainty(const SystemModel& model, const TriggerConfig& trigger,
                               bool transmitted, Eigen::Index offset);

/// Both flag variants of W_i for every offset, shape n x 2 (column = flag).
Matrix uncertainty_table(const SystemModel& model, const TriggerConfig& trigger);

/// diag(a_i / W_i) under the given window flags.
Matrix information_weight_matrix(const SystemModel& model, const TriggerConfig& trigger,
                                 const WeightVector& a, const std::vector<bool>& pattern);

std::string pattern_string(PatternMask mask, Eigen::Index n);
std::vector<bool> pattern_flags(PatternMask mask, Eigen::Index n);
/// Lexicographic order of the pattern strings.
bool pattern_precedes(PatternMask lhs, PatternMask rhs);

struct PatternMaximum {
  PatternMask pattern = 0;
  double trace = 0.0;
};

/// Tr(O^-1 Q(a)^-1 O^-T) for every one of the 2^n flag patterns, indexed by
/// mask. The kernel form uses the column norms of O^-1 and runs under
/// OpenMP; the reference form builds each matrix explicitly and runs
/// serially.
std::vector<double> pattern_traces(const SystemModel& model, const TriggerConfig& trigger,
                                   const WeightVector& a);
std::vector<double> pattern_traces_reference(const SystemModel& model,
                                             const TriggerConfig& trigger, const WeightVector& a);

/// Deterministic arg-max; ties go to the lexicographically smallest string.
PatternMaximum worst_pattern(std::span<const double> traces, Eigen::Index n);
PatternMaximum worst_pattern_reference(std::span<const double> traces, Eigen::Index n);

struct ObservabilityReport {
  Matrix O;
  bool full_rank = false;
  Eigen::Index horizon = 0;  // K = n - 1
  std::optional<double> epsilon;
  std::vector<double> per_pattern_traces;  // indexed by PatternMask; empty if rank-deficient
  std::optional<PatternMask> worst_pattern;

  Eigen::Index n() const { return O.rows(); }
};

/// Throws std::invalid_argument when n exceeds kMaxEnumerationDim.
ObservabilityReport epsilon_observability(const SystemModel& model, const TriggerConfig& trigger,
                                          const WeightVector& a);

/// Maps an n-record window to E(O^-1 Y, O^-1 Q(a)^-1 O^-T). Holds the LU
/// factors of O and the W table so the observer does not refactor per step.
class WindowMap {
 public:
  /// Throws NumericalError for rank-deficient O.
  WindowMap(const SystemModel& model, const TriggerConfig& trigger, const WeightVector& a);

  Ellipsoid operator()(std::span<const MeasurementRecord> window) const;
  const Matrix& observability() const { return o_; }
  Eigen::Index n() const { return o_.rows(); }

 private:
  Matrix o_;
  Eigen::PartialPivLU<Matrix> lu_;
  Matrix scaled_uncertainty_;  // W_i / a_i, n x 2
};

Ellipsoid window_state_set(const SystemModel& model, const TriggerConfig& trigger,
                           const WeightVector& a, std::span<const MeasurementRecord> window);

/// Initial-state set from the first n records.
Ellipsoid initial_state_set(const SystemModel& model, const TriggerConfig& trigger,
                            const WeightVector& a, std::span<const MeasurementRecord> records);

/// Asymptotic bound on sqrt(Tr P_hat):
/// max over patterns of (sqrt(Tr P_bar) + sqrt(Tr Q)) / (1 - ||A||).
/// Empty when ||A|| >= 1.
std::optional<double> convergence_bound(const SystemModel& model, const TriggerConfig& trigger,
                                        const WeightVector& a);

}  // namespace etsm
