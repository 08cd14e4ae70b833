#include "etsm/observability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etsm {

void SystemModel::validate() const {
  const Eigen::Index dim = A.rows();
  if (dim < 1 || A.cols() != dim) throw std::invalid_argument("model: A must be square, n >= 1");
  if (C.size() != dim) throw std::invalid_argument("model: C must have n columns");
  if (Q.rows() != dim || Q.cols() != dim) throw std::invalid_argument("model: Q must be n x n");
  if (!A.allFinite() || !C.allFinite() || !Q.allFinite() || !std::isfinite(R)) {
    throw std::invalid_argument("model: non-finite entries");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("model: Q must be symmetric");
  }
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(Q), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (!(min_eig > 0.0)) throw std::invalid_argument("model: Q must be positive definite");
  if (!(R > 0.0)) throw std::invalid_argument("model: R must be positive");
}

void TriggerConfig::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("trigger: Gamma must be positive");
  }
  if (!(error > 0.0)) throw std::invalid_argument("trigger: Gamma_e must be positive");
  if (!(error < threshold)) throw std::invalid_argument("trigger: Gamma_e must be below Gamma");
}

WeightVector::WeightVector(Vector weights) : values_(std::move(weights)) {
  if (values_.size() < 1) throw std::invalid_argument("weights: empty");
  if (!(values_.array() > 0.0).all()) throw std::invalid_argument("weights: entries must be positive");
  if (std::abs(values_.sum() - 1.0) > 1e-12) throw std::invalid_argument("weights: must sum to 1");
}

WeightVector WeightVector::uniform(Eigen::Index n) {
  return WeightVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Matrix observability_matrix(const SystemModel& model) {
  const Eigen::Index n = model.n();
  Matrix o(n, n);
  Eigen::RowVectorXd row = model.C;
  for (Eigen::Index i = 0; i < n; ++i) {
    o.row(i) = row;
    row = row * model.A;
  }
  return o;
}

bool has_full_rank(const Matrix& o) {
  const Vector sv = Eigen::JacobiSVD<Matrix>(o).singularValues();
  if (sv.size() == 0) return false;
  return sv.minCoeff() > static_cast<double>(o.cols()) * 1e-12 * sv.maxCoeff();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues().maxCoeff();
}

double measurement_uncertainty(const SystemModel& model, const TriggerConfig& trigger,
                               bool transmitted, Eigen::Index offset) {
  if (offset < 0 || offset >= model.n()) {
    throw std::invalid_argument("measurement_uncertainty: offset outside [0, n-1]");
  }
  auto scalar = [](double s) { return Ellipsoid(Vector::Zero(1), Matrix::Constant(1, 1, s)); };
  std::vector<Ellipsoid> terms;
  terms.reserve(static_cast<std::size_t>(offset) + 2);
  terms.push_back(scalar(trigger.uncertainty(transmitted)));
  // Disturbance terms C A^j Q A^j' C' for j = offset-1 down to 0.
  std::vector<Eigen::RowVectorXd> rows;
  Eigen::RowVectorXd row = model.C;
  for (Eigen::Index j = 0; j < offset; ++j) {
    rows.push_back(row);
    row = row * model.A;
  }
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    terms.push_back(scalar((*it) * model.Q * it->transpose()));
  }
  terms.push_back(scalar(model.R));
  return minkowski_sum_chain(terms).shape()(0, 0);
}

Matrix uncertainty_table(const SystemModel& model, const TriggerConfig& trigger) {
  Matrix table(model.n(), 2);
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    table(i, 0) = measurement_uncertainty(model, trigger, false, i);
    table(i, 1) = measurement_uncertainty(model, trigger, true, i);
  }
  return table;
}

Matrix information_weight_matrix(const SystemModel& model, const TriggerConfig& trigger,
                                 const WeightVector& a, const std::vector<bool>& pattern) {
  const Eigen::Index n = model.n();
  if (static_cast<Eigen::Index>(pattern.size()) != n || a.size() != n) {
    throw std::invalid_argument("information_weight_matrix: pattern and weights need length n");
  }
  Matrix q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i, i) = a[i] / measurement_uncertainty(model, trigger, pattern[static_cast<std::size_t>(i)], i);
  }
  return q;
}

std::string pattern_string(PatternMask mask, Eigen::Index n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((mask >> i) & 1U) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

std::vector<bool> pattern_flags(PatternMask mask, Eigen::Index n) {
  std::vector<bool> flags(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) flags[static_cast<std::size_t>(i)] = ((mask >> i) & 1U) != 0;
  return flags;
}

bool pattern_precedes(PatternMask lhs, PatternMask rhs) {
  const PatternMask diff = lhs ^ rhs;
  if (diff == 0) return false;
  // First differing character is the lowest differing bit.
  return (lhs & (diff & (~diff + 1))) == 0;
}

namespace {

void require_enumerable(Eigen::Index n) {
  if (n > kMaxEnumerationDim) {
    std::ostringstream msg;
    msg << "pattern enumeration needs 2^n evaluations; n = " << n << " exceeds the cap of "
        << kMaxEnumerationDim;
    throw std::invalid_argument(msg.str());
  }
}

bool better(const PatternMaximum& cand, const PatternMaximum& best) {
  return cand.trace > best.trace ||
         (cand.trace == best.trace && pattern_precedes(cand.pattern, best.pattern));
}

Eigen::PartialPivLU<Matrix> factor_observability(const Matrix& o) {
  if (!has_full_rank(o)) {
    throw NumericalError("observability matrix is rank-deficient; window map is undefined");
  }
  return Eigen::PartialPivLU<Matrix>(o);
}

}  // namespace

std::vector<double> pattern_traces(const SystemModel& model, const TriggerConfig& trigger,
                                   const WeightVector& a) {
  const Eigen::Index n = model.n();
  require_enumerable(n);
  const Matrix o = observability_matrix(model);
  const auto lu = factor_observability(o);
  // Tr(O^-1 D O^-T) = sum_i D_ii |O^-1 e_i|^2 for diagonal D.
  const Vector col_norms = lu.solve(Matrix::Identity(n, n)).colwise().squaredNorm().transpose();
  const Matrix w = uncertainty_table(model, trigger);
  Matrix weighted(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) weighted.row(i) = w.row(i) * (col_norms(i) / a[i]);

  const std::int64_t count = std::int64_t{1} << n;
  std::vector<double> traces(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
  for (std::int64_t mask = 0; mask < count; ++mask) {
    double t = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) t += weighted(i, (mask >> i) & 1);
    traces[static_cast<std::size_t>(mask)] = t;
  }
  return traces;
}

std::vector<double> pattern_traces_reference(const SystemModel& model,
                                             const TriggerConfig& trigger, const WeightVector& a) {
  const Eigen::Index n = model.n();
  require_enumerable(n);
  const Matrix o = observability_matrix(model);
  const auto lu = factor_observability(o);
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> traces(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    const auto flags = pattern_flags(static_cast<PatternMask>(mask), n);
    const Matrix info = information_weight_matrix(model, trigger, a, flags);
    const Matrix info_inv = info.ldlt().solve(Matrix::Identity(n, n));
    // O^-1 D O^-T = O^-1 (O^-1 D)' for symmetric D.
    const Matrix left = lu.solve(info_inv);
    const Matrix p_bar = lu.solve(left.transpose());
    traces[mask] = p_bar.trace();
  }
  return traces;
}

PatternMaximum worst_pattern(std::span<const double> traces, Eigen::Index n) {
  if (traces.size() != (std::size_t{1} << n)) throw std::invalid_argument("worst_pattern: need 2^n traces");
  PatternMaximum best{0, traces[0]};
  const auto count = static_cast<std::int64_t>(traces.size());
#pragma omp parallel
  {
    PatternMaximum local{0, traces[0]};
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 0; mask < count; ++mask) {
      const PatternMaximum cand{static_cast<PatternMask>(mask), traces[static_cast<std::size_t>(mask)]};
      if (better(cand, local)) local = cand;
    }
#pragma omp critical(etsm_worst_pattern)
    if (better(local, best)) best = local;
  }
  return best;
}

PatternMaximum worst_pattern_reference(std::span<const double> traces, Eigen::Index n) {
  if (traces.size() != (std::size_t{1} << n)) throw std::invalid_argument("worst_pattern: need 2^n traces");
  PatternMaximum best{0, traces[0]};
  for (std::size_t mask = 1; mask < traces.size(); ++mask) {
    const PatternMaximum cand{static_cast<PatternMask>(mask), traces[mask]};
    if (better(cand, best)) best = cand;
  }
  return best;
}

ObservabilityReport epsilon_observability(const SystemModel& model, const TriggerConfig& trigger,
                                          const WeightVector& a) {
  require_enumerable(model.n());
  ObservabilityReport report;
  report.O = observability_matrix(model);
  report.horizon = model.n() - 1;
  report.full_rank = has_full_rank(report.O);
  if (!report.full_rank) return report;
  report.per_pattern_traces = pattern_traces(model, trigger, a);
  const PatternMaximum worst = worst_pattern(report.per_pattern_traces, model.n());
  report.epsilon = worst.trace;
  report.worst_pattern = worst.pattern;
  return report;
}

WindowMap::WindowMap(const SystemModel& model, const TriggerConfig& trigger, const WeightVector& a)
    : o_(observability_matrix(model)), lu_(factor_observability(o_)) {
  if (a.size() != model.n()) throw std::invalid_argument("window map: weights need length n");
  scaled_uncertainty_ = uncertainty_table(model, trigger);
  for (Eigen::Index i = 0; i < model.n(); ++i) scaled_uncertainty_.row(i) /= a[i];
}

Ellipsoid WindowMap::operator()(std::span<const MeasurementRecord> window) const {
  const Eigen::Index n = o_.rows();
  if (static_cast<Eigen::Index>(window.size()) != n) {
    throw std::invalid_argument("measurement window must hold exactly n records");
  }
  Vector y(n);
  Vector root(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = window[static_cast<std::size_t>(i)];
    y(i) = rec.y_tau;
    root(i) = std::sqrt(scaled_uncertainty_(i, rec.gamma ? 1 : 0));
  }
  // P_bar = L L' with L = O^-1 diag(sqrt(W_i / a_i)).
  const Matrix factor = lu_.solve(Matrix(root.asDiagonal()));
  return Ellipsoid(lu_.solve(y), symmetrized(factor * factor.transpose()));
}

Ellipsoid window_state_set(const SystemModel& model, const TriggerConfig& trigger,
                           const WeightVector& a, std::span<const MeasurementRecord> window) {
  return WindowMap(model, trigger, a)(window);
}

Ellipsoid initial_state_set(const SystemModel& model, const TriggerConfig& trigger,
                            const WeightVector& a, std::span<const MeasurementRecord> records) {
  if (static_cast<Eigen::Index>(records.size()) < model.n()) {
    throw std::invalid_argument("initial_state_set: need the first n records");
  }
  return window_state_set(model, trigger, a, records.first(static_cast<std::size_t>(model.n())));
}

std::optional<double> convergence_bound(const SystemModel& model, const TriggerConfig& trigger,
                                        const WeightVector& a) {
  const double norm = spectral_norm(model.A);
  if (!(norm < 1.0)) return std::nullopt;
  const auto traces = pattern_traces(model, trigger, a);
  const double worst = worst_pattern(traces, model.n()).trace;
  return (std::sqrt(worst) + std::sqrt(model.Q.trace())) / (1.0 - norm);
}

}  // namespace etsm
