#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dsy/kernels.hpp"
#include "dsy/vertex.hpp"

namespace dsy {

// A cascade realization: every vertex v carries an independent mean-one
// exponential T_v, and its edge takes time T_v / lambda_v. Intensities come
// either from a Markov chain along each path (type-(M) models) or from the
// deterministic generation-scaled rule lambda_v = alpha^{-|v|}.
//
// All per-vertex randomness is keyed by (seed, trial, vertex address), so a
// realization is a deterministic function of those three values no matter in
// which order the tree is explored.
struct CascadeModel {
  std::shared_ptr<const MarkovKernel> kernel;  // null for generation-scaled
  std::optional<double> initial_state;         // default: stationary draw
  std::optional<GenerationScaledModel> scaled;
  // Every intensity is multiplied by this factor; scaling by c divides all
  // path sums by exactly c pathwise.
  double intensity_scale = 1.0;

  bool valid() const { return static_cast<bool>(kernel) != scaled.has_value(); }
};

// Minimal path sums zeta_n = min_{|v|=n} sum of edge times along prefixes.
struct ZetaEstimate {
  int n_max = 0;
  // zeta[k] for k = 0..n_max; +inf when the realized tree dies out before
  // depth k, NaN for depths not reached before the node budget.
  std::vector<double> zeta;
  VertexId argmin_path;  // first vertex extracted at the deepest reached depth
  std::uint64_t nodes_expanded = 0;
  bool censored = false;  // node budget exhausted first
};

// Outcome of evolving the frontier V(t) to a fixed horizon.
struct FrontierResult {
  double horizon = 0;
  std::uint64_t crossed_count = 0;  // #V(t), valid when !budget_exceeded
  std::vector<double> event_times;  // branching times <= t, first max_events
  bool budget_exceeded = false;
  std::uint64_t budget = 0;
};

// Offspring law of a Galton-Watson tree; weights (p_0, p_1, ...).
struct GwConfig {
  std::vector<double> offspring_probs;
  double mean() const;
  void validate() const;  // weights nonnegative, sum to 1
};

// Exact minimal path sums by best-first search over the lazily sampled tree.
// Edge times are strictly positive, so the first depth-k vertex leaving the
// priority queue realizes min_{|v|=k}; the search never materializes
// unexplored subtrees. Budget counts queue extractions; running out sets
// `censored` rather than failing.
ZetaEstimate zeta_to_depth(const CascadeModel& model, int n,
                           std::uint64_t budget, std::uint64_t seed,
                           std::uint64_t trial = 0);

// Same search on a Galton-Watson tree: each expanded vertex draws its
// offspring count; leaves are never expanded (an infinite edge lies beyond
// them), and an emptied queue reports zeta_n = +inf (the tree is finite).
ZetaEstimate gw_zeta_to_depth(const CascadeModel& model, const GwConfig& gw,
                              int n, std::uint64_t budget, std::uint64_t seed,
                              std::uint64_t trial = 0);

// Event-driven simulation of V(t): vertices whose cumulative time exceeds t
// are counted as crossed and not expanded. budget bounds the live queue.
FrontierResult simulate_frontier(const CascadeModel& model, double t,
                                 std::uint64_t budget, std::uint64_t seed,
                                 std::uint64_t trial = 0,
                                 std::size_t max_events = 1000);

// Budget-censored explosion evidence: the fraction of trials whose frontier
// exhausts the node budget before the horizon, with a Wilson 95% interval.
// Simulation can never prove explosion or non-explosion; treat the fraction
// as evidence only.
struct ExplosionEstimate {
  double fraction = 0;
  double wilson_lo = 0, wilson_hi = 0;
  int trials = 0;
  std::uint64_t budget = 0;
  double horizon = 0;
  std::vector<std::uint64_t> crossed_counts;  // per trial; 0 when censored
  // per trial; bytes rather than vector<bool> so worker threads can write
  // disjoint elements without sharing words
  std::vector<std::uint8_t> censored;
};
ExplosionEstimate explosion_probability(const CascadeModel& model, double t,
                                        std::uint64_t budget, int trials,
                                        std::uint64_t seed, int threads = 1);

// Edge time of a vertex given its state: (T_v / lambda) with T_v drawn from
// the vertex's holding substream. Exposed so tests can recompute
// realizations independently of the search order.
double edge_time(const CascadeModel& model, std::uint64_t vkey,
                 std::size_t depth, double state);

}  // namespace dsy
