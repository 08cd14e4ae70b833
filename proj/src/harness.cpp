#include "etsm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "etsm/observability.hpp"

namespace etsm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::pair<double, double>> ellipse_boundary(const Ellipsoid& e, Eigen::Index i,
                                                        Eigen::Index j, int points) {
  if (i < 0 || j < 0 || i >= e.dim() || j >= e.dim() || i == j) {
    throw std::invalid_argument("ellipse_boundary: invalid coordinate pair");
  }
  Matrix sub(2, 2);
  sub << e.shape()(i, i), e.shape()(i, j), e.shape()(j, i), e.shape()(j, j);
  const Matrix root = psd_sqrt(sub);
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int t = 0; t < points; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / points;
    Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    const Eigen::Vector2d p = root * u;
    out.emplace_back(e.center()(i) + p(0), e.center()(j) + p(1));
  }
  return out;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double parse_real(const std::string& cell, std::size_t row, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "log row " << row << ": column " << column << " is not a finite number ('" << cell << "')";
    throw std::invalid_argument(msg.str());
  }
  return v;
}

void write_header(std::ostream& out, Eigen::Index n, bool with_truth) {
  out << "k";
  if (with_truth) {
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  }
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_hat" << i;
  out << ",gamma";
  if (with_truth) out << ",y";
  out << ",y_tau,trace_P_hat";
  if (with_truth) out << ",gen_distance";
  out << "\n";
}

void write_ellipsoids(const fs::path& dir, const std::vector<ObserverOutput>& estimates,
                      Eigen::Index n, std::vector<std::string>& files) {
  if (n < 2) return;
  const std::size_t shown = std::min<std::size_t>(estimates.size(), 10);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const std::string name = n == 2 ? std::string("ellipsoids.csv")
                                      : "ellipsoids_" + std::to_string(i + 1) + "_" +
                                            std::to_string(j + 1) + ".csv";
      auto out = open_out(dir / name);
      out << "step,set_kind,x1,x2\n";
      auto emit = [&](std::int64_t k, const char* kind, const Ellipsoid& e) {
        for (const auto& [a, b] : ellipse_boundary(e, i, j)) {
          out << k << ',' << kind << ',' << format_real(a) << ',' << format_real(b) << '\n';
        }
      };
      for (std::size_t s = 0; s < shown; ++s) {
        const auto& est = estimates[s];
        emit(est.k, "measurement", est.measurement_set);
        if (est.prior_set) emit(est.k, "prior", *est.prior_set);
        emit(est.k, "posterior", est.posterior_set);
      }
      files.push_back(name);
    }
  }
}

json metrics_json(const Metrics& m) {
  return json{{"E_d", m.mean_error},
              {"eta", m.comm_rate},
              {"containment_violations", m.containment_violations},
              {"max_generalized_distance", m.max_generalized_distance},
              {"estimates", m.estimates}};
}

bool observable(const SimConfig& config, std::ostream& out) {
  if (has_full_rank(observability_matrix(config.model))) return true;
  out << "not epsilon-observable: observability matrix is rank-deficient\n";
  return false;
}

}  // namespace

void write_measurement_log(const fs::path& path, const std::vector<MeasurementRecord>& records) {
  auto out = open_out(path);
  out << "k,gamma,y_tau\n";
  for (const auto& r : records) {
    out << r.k << ',' << (r.gamma ? 1 : 0) << ',' << format_real(r.y_tau) << '\n';
  }
}

std::vector<MeasurementRecord> read_measurement_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open log " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("log is empty: " + path.string());
  const auto header = split_csv(line);
  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument(std::string("log lacks column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ck = column("k");
  const std::size_t cg = column("gamma");
  const std::size_t cy = column("y_tau");

  std::vector<MeasurementRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() < header.size()) {
      throw std::invalid_argument("log row " + std::to_string(row) + ": too few columns");
    }
    MeasurementRecord rec;
    const double k = parse_real(cells[ck], row, "k");
    if (k != std::floor(k) || k < 0) {
      throw std::invalid_argument("log row " + std::to_string(row) + ": k must be a non-negative integer");
    }
    rec.k = static_cast<std::int64_t>(k);
    if (cells[cg] == "1") {
      rec.gamma = true;
    } else if (cells[cg] != "0") {
      throw std::invalid_argument("log row " + std::to_string(row) + ": gamma must be 0 or 1");
    }
    rec.y_tau = parse_real(cells[cy], row, "y_tau");
    if (!records.empty() && rec.k != records.back().k + 1) {
      std::ostringstream msg;
      msg << "log row " << row << ": gap in k sequence (expected k = " << records.back().k + 1
          << ", got " << rec.k << ")";
      throw std::invalid_argument(msg.str());
    }
    records.push_back(rec);
  }
  return records;
}

int cmd_check(const SimConfig& config, std::ostream& out) {
  const auto report = epsilon_observability(config.model, config.trigger, config.a);
  const Eigen::Index n = report.n();
  out << "full_rank: " << (report.full_rank ? "true" : "false") << "\n";
  out << "K: " << report.horizon << "\n";
  if (!report.full_rank) {
    out << "epsilon: undefined\n";
    out << "status: not epsilon-observable\n";
    return kExitNotObservable;
  }
  out << "epsilon: " << format_real(*report.epsilon) << "\n";
  out << "worst_pattern: " << pattern_string(*report.worst_pattern, n) << "\n";
  out << "patterns: " << report.per_pattern_traces.size() << "\n";
  for (std::size_t mask = 0; mask < report.per_pattern_traces.size(); ++mask) {
    out << "pattern " << pattern_string(static_cast<PatternMask>(mask), n) << ": "
        << format_real(report.per_pattern_traces[mask]) << "\n";
  }
  out << "status: epsilon-observable\n";
  return kExitOk;
}

int cmd_bound(const SimConfig& config, std::ostream& out) {
  if (!observable(config, out)) return kExitNotObservable;
  const double norm = spectral_norm(config.model.A);
  out << "spectral_norm: " << format_real(norm) << "\n";
  const auto bound = convergence_bound(config.model, config.trigger, config.a);
  if (!bound) {
    out << "bound: undefined (spectral norm >= 1)\n";
    return kExitBoundUndefined;
  }
  out << "bound_sqrt_trace: " << format_real(*bound) << "\n";
  out << "bound_trace: " << format_real(*bound * *bound) << "\n";
  return kExitOk;
}

int cmd_simulate(const SimConfig& config, const fs::path& out_dir, std::int64_t seeds,
                 std::ostream& out) {
  if (!observable(config, out)) return kExitNotObservable;
  fs::create_directories(out_dir);
  const Eigen::Index n = config.model.n();
  const auto report = epsilon_observability(config.model, config.trigger, config.a);
  const auto bound = convergence_bound(config.model, config.trigger, config.a);
  const ClosedLoopResult run = run_closed_loop(config);

  {
    auto steps = open_out(out_dir / "steps.csv");
    write_header(steps, n, true);
    for (std::size_t s = 0; s < run.estimates.size(); ++s) {
      const auto& est = run.estimates[s];
      const auto k = static_cast<std::size_t>(est.k);
      steps << est.k;
      for (Eigen::Index i = 0; i < n; ++i) steps << ',' << format_real(run.trace.states[k](i));
      for (Eigen::Index i = 0; i < n; ++i) steps << ',' << format_real(est.posterior_set.center()(i));
      const auto& rec = run.trace.records[k];
      steps << ',' << (rec.gamma ? 1 : 0) << ',' << format_real(run.trace.outputs[k]) << ','
            << format_real(rec.y_tau) << ',' << format_real(est.posterior_set.trace()) << ','
            << format_real(run.generalized_distances[s]) << '\n';
    }
  }
  write_measurement_log(out_dir / "log.csv", run.trace.records);
  std::vector<std::string> ellipsoid_files;
  write_ellipsoids(out_dir, run.estimates, n, ellipsoid_files);

  json summary;
  summary["config"] = config_to_json(config);
  summary["epsilon"] = *report.epsilon;
  summary["worst_pattern"] = pattern_string(*report.worst_pattern, n);
  summary["spectral_norm"] = spectral_norm(config.model.A);
  if (bound) {
    summary["bound_sqrt_trace"] = *bound;
    summary["bound_trace"] = *bound * *bound;
  } else {
    summary["bound_sqrt_trace"] = nullptr;
    summary["bound_trace"] = nullptr;
  }
  summary["metrics"] = metrics_json(run.metrics);
  summary["steps_file"] = "steps.csv";
  summary["log_file"] = "log.csv";
  summary["ellipsoid_files"] = ellipsoid_files;

  if (seeds > 1) {
    const auto entries = monte_carlo(config, seeds);
    json runs = json::array();
    double ed_sum = 0.0, eta_sum = 0.0;
    double ed_min = INFINITY, ed_max = -INFINITY, eta_min = INFINITY, eta_max = -INFINITY;
    std::int64_t violations = 0;
    for (const auto& e : entries) {
      json row = metrics_json(e.metrics);
      row["seed"] = e.seed;
      runs.push_back(row);
      ed_sum += e.metrics.mean_error;
      eta_sum += e.metrics.comm_rate;
      ed_min = std::min(ed_min, e.metrics.mean_error);
      ed_max = std::max(ed_max, e.metrics.mean_error);
      eta_min = std::min(eta_min, e.metrics.comm_rate);
      eta_max = std::max(eta_max, e.metrics.comm_rate);
      violations += e.metrics.containment_violations;
    }
    const auto count = static_cast<double>(entries.size());
    summary["sweep"] = {{"seeds", seeds},
                        {"E_d_mean", ed_sum / count},
                        {"E_d_min", ed_min},
                        {"E_d_max", ed_max},
                        {"eta_mean", eta_sum / count},
                        {"eta_min", eta_min},
                        {"eta_max", eta_max},
                        {"containment_violations", violations},
                        {"runs", runs}};
  }
  {
    auto file = open_out(out_dir / "summary.json");
    file << summary.dump(2) << "\n";
  }

  out << "epsilon: " << format_real(*report.epsilon) << "\n";
  if (bound) out << "bound_sqrt_trace: " << format_real(*bound) << "\n";
  out << "E_d: " << format_real(run.metrics.mean_error) << "\n";
  out << "eta: " << format_real(run.metrics.comm_rate) << "\n";
  out << "containment_violations: " << run.metrics.containment_violations << "\n";
  out << "wrote " << (out_dir / "steps.csv").string() << "\n";
  return kExitOk;
}

int cmd_replay(const SimConfig& config, const fs::path& log_path, const fs::path& out_dir,
               std::ostream& out) {
  if (!observable(config, out)) return kExitNotObservable;
  const auto records = read_measurement_log(log_path);
  const auto estimates = observer_run(records, config.model, config.trigger, config.a);
  fs::create_directories(out_dir);
  const Eigen::Index n = config.model.n();
  auto steps = open_out(out_dir / "replay_steps.csv");
  write_header(steps, n, false);
  for (const auto& est : estimates) {
    const auto& rec = records[static_cast<std::size_t>(est.k - records.front().k)];
    steps << est.k;
    for (Eigen::Index i = 0; i < n; ++i) steps << ',' << format_real(est.posterior_set.center()(i));
    steps << ',' << (rec.gamma ? 1 : 0) << ',' << format_real(rec.y_tau) << ','
          << format_real(est.posterior_set.trace()) << '\n';
  }
  out << "estimates: " << estimates.size() << "\n";
  out << "wrote " << (out_dir / "replay_steps.csv").string() << "\n";
  return kExitOk;
}

}  // namespace etsm
