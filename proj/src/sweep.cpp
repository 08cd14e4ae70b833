#include <exception>

#include "etsm/simulation.hpp"

namespace etsm {

namespace {

SimConfig with_seed(const SimConfig& config, std::int64_t offset) {
  SimConfig run = config;
  run.seed = config.seed + static_cast<std::uint64_t>(offset);
  return run;
}

}  // namespace

std::vector<SweepEntry> monte_carlo(const SimConfig& config, std::int64_t count) {
  if (count < 1) throw std::invalid_argument("monte_carlo: need at least one seed");
  config.validate();
  std::vector<SweepEntry> entries(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    try {
      const SimConfig run = with_seed(config, i);
      entries[slot] = {run.seed, run_closed_loop(run).metrics};
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return entries;
}

std::vector<SweepEntry> monte_carlo_serial(const SimConfig& config, std::int64_t count) {
  if (count < 1) throw std::invalid_argument("monte_carlo: need at least one seed");
  config.validate();
  std::vector<SweepEntry> entries;
  entries.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const SimConfig run = with_seed(config, i);
    entries.push_back({run.seed, run_closed_loop(run).metrics});
  }
  return entries;
}

}  // namespace etsm
