#include "drift/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace drift {

std::size_t worker_threads() {
  if (const char* env = std::getenv("DRIFT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::vector<FoldResult> cross_validate(const RunConfig& cfg, const Dataset& data, std::size_t k,
                                       std::uint64_t fold_seed, std::size_t threads) {
  const auto folds = kfold(data.size(), k, fold_seed);
  std::vector<FoldResult> results(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t f = next++; f < folds.size(); f = next++) {
      try {
        const Dataset train = data.subset(folds[f].train);
        const Dataset test = data.subset(folds[f].test);
        DriftModel model = init_model(cfg.spec, train, cfg.train.init, cfg.train.seed);
        FoldResult r;
        r.fold = f;
        r.n_test = test.size();
        r.report = fit(model, train, cfg.train);
        r.log_score = log_score(model, test);
        if (cfg.schema.outcome.kind == OutcomeKind::Survival) r.ibs = compare_ibs(model, train, test);
        results[f] = std::move(r);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, folds.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace drift
