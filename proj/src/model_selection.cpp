#include "pmcgd/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <variant>

#include "pmcgd/errors.hpp"

namespace pmcgd {

long count_free_params(StructureId s, long G, long p, bool contaminated) {
  long m = sigma_param_count(s, G, p) + G * p + (G - 1);
  if (contaminated) m += 2 * G;
  return m;
}

double bic(double loglik, long m, long n) {
  if (n < 1) throw std::invalid_argument("bic: n must be at least 1");
  return 2.0 * loglik - static_cast<double>(m) * std::log(static_cast<double>(n));
}

void SweepGrid::validate() const {
  if (structures.empty() || g_values.empty()) throw std::invalid_argument("sweep grid is empty");
  for (int g : g_values)
    if (g < 1) throw std::invalid_argument("sweep grid: G values must be at least 1");
  config.validate();
}

RankedResults sweep(const DataMatrix& X, const SweepGrid& grid) {
  grid.validate();
  struct Job {
    StructureId s;
    int G;
  };
  std::vector<Job> jobs;
  for (auto s : grid.structures)
    for (int g : grid.g_values) jobs.push_back({s, g});

  std::vector<std::variant<std::monostate, FitResult, std::string>> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        outcomes[k] = fit(X, jobs[k].s, jobs[k].G, grid.config);
      } catch (const std::exception& e) {
        outcomes[k] = std::string(e.what());
      }
    }
  };
  unsigned n_workers = grid.workers ? grid.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }

  RankedResults out;
  const long n = static_cast<long>(X.rows());
  const long p = static_cast<long>(X.cols());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (auto* f = std::get_if<FitResult>(&outcomes[k])) {
      const long m = count_free_params(jobs[k].s, jobs[k].G, p);
      const double b = bic(f->loglik(), m, n);
      out.entries.push_back({jobs[k].s, jobs[k].G, std::move(*f), m, b});
    } else {
      out.failures.push_back({jobs[k].s, jobs[k].G, std::get<std::string>(outcomes[k])});
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.bic > b.bic; });
  if (out.entries.empty()) throw FitError("every fit in the sweep failed");
  return out;
}

}  // namespace pmcgd
