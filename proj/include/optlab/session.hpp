#pragma once

#include <optional>
#include <string>

#include "optlab/catalog.hpp"
#include "optlab/cost.hpp"
#include "optlab/plancache.hpp"

namespace optlab {

// off:         heuristic rewrites plus default rule policies; no planner
//              calls during the rewrite phase.
// naive:       every matched rule is settled by planning both alternatives.
// cache:       naive decision flow backed by the session plan cache.
// cache_guess: cache plus winner prediction and bound-driven pruning.
// guess_only:  rules settled purely by prediction; single final planning.
enum class Mode { Off, Naive, Cache, CacheGuess, GuessOnly };

const char* mode_name(Mode m);
std::optional<Mode> mode_from_name(const std::string& name);

struct Counters {
  int64_t cbo_invocations = 0;      // full planner entries
  int64_t qrw_cbo_invocations = 0;  // planner entries made by the rewrite phase
  int64_t cost_path_calls = 0;      // candidate cost computations
  int64_t paths_constructed = 0;
  int64_t prune_events = 0;         // paths discarded against the session bound
};

// All state for optimizing one query: counters, the plan cache, and the
// monotone cost upper bound used by guided planning.
class OptimizerSession {
 public:
  OptimizerSession(const Catalog& cat, Mode mode) : catalog_(cat), mode_(mode) {}

  const Catalog& catalog() const { return catalog_; }
  Mode mode() const { return mode_; }
  const CostParams& params() const { return params_; }
  CostParams& params() { return params_; }

  bool cache_enabled() const { return mode_ == Mode::Cache || mode_ == Mode::CacheGuess; }

  PlanCache& cache() { return cache_; }
  const PlanCache& cache() const { return cache_; }

  Counters& counters() { return counters_; }
  const Counters& counters() const { return counters_; }

  // The bound only ever tightens while set; begin_bound_scope resets it for
  // the next independent comparison.
  void begin_bound_scope() {
    bound_.reset();
    bound_history_.clear();
  }
  void set_upper_bound(double v) {
    if (!bound_ || v < *bound_) bound_ = v;
    bound_history_.push_back(*bound_);
  }
  std::optional<double> upper_bound() const { return bound_; }
  const std::vector<double>& bound_history() const { return bound_history_; }

  bool in_qrw_phase = false;

  // Test hook: flips every rule prediction. Guided planning must still land
  // on the same final plan, only doing the exploration in the other order.
  bool invert_guesses = false;

 private:
  const Catalog& catalog_;
  Mode mode_;
  CostParams params_;
  PlanCache cache_;
  Counters counters_;
  std::optional<double> bound_;
  std::vector<double> bound_history_;
};

}  // namespace optlab
