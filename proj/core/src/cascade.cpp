#include "dsy/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <thread>

#include "dsy/errors.hpp"

namespace dsy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const CascadeModel& model) {
  if (!model.valid())
    throw config_error("cascade model needs exactly one intensity source");
  if (!(model.intensity_scale > 0.0))
    throw config_error("intensity_scale must be positive");
  if (model.kernel && !model.initial_state && !model.kernel->sample_invariant)
    throw config_error(
        "kernel has no stationary sampler; an initial state is required");
}

double intensity(const CascadeModel& model, std::size_t depth, double state) {
  const double base = model.kernel
                          ? model.kernel->lambda(state)
                          : std::pow(model.scaled->alpha,
                                     -static_cast<double>(depth));
  return model.intensity_scale * base;
}

double root_state(const CascadeModel& model, std::uint64_t tkey) {
  if (!model.kernel) return 0.0;
  if (model.initial_state) return *model.initial_state;
  CounterStream s(tkey, Draw::initial);
  return model.kernel->sample_invariant(s);
}

struct SearchNode {
  double cost;  // cumulative path sum including this vertex's edge
  std::uint64_t key;
  std::uint32_t depth;
  double state;
  std::vector<std::uint32_t> path;
};

struct SearchNodeAfter {
  bool operator()(const SearchNode& a, const SearchNode& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.path > b.path;  // deterministic tie-break
  }
};

int draw_offspring(const GwConfig& gw, CounterStream& s) {
  const double u = s.next_unit();
  double acc = 0;
  for (std::size_t k = 0; k < gw.offspring_probs.size(); ++k) {
    acc += gw.offspring_probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(gw.offspring_probs.size()) - 1;
}

ZetaEstimate zeta_impl(const CascadeModel& model, const GwConfig* gw, int n,
                       std::uint64_t budget, std::uint64_t seed,
                       std::uint64_t trial) {
  validate(model);
  if (n < 0) throw config_error("zeta: depth must be >= 0");
  if (budget < 1) throw config_error("zeta: budget must be >= 1");

  const std::uint64_t tkey = trial_key(seed, trial);

  ZetaEstimate out;
  out.n_max = n;
  out.zeta.assign(static_cast<std::size_t>(n) + 1, kNaN);

  std::priority_queue<SearchNode, std::vector<SearchNode>, SearchNodeAfter> pq;
  {
    SearchNode root;
    root.key = tkey;  // vertex_key of the empty path
    root.depth = 0;
    root.state = root_state(model, tkey);
    root.cost = edge_time(model, root.key, 0, root.state);
    pq.push(std::move(root));
  }

  while (!pq.empty()) {
    if (out.nodes_expanded >= budget) {
      out.censored = true;
      return out;
    }
    SearchNode node = pq.top();
    pq.pop();
    ++out.nodes_expanded;

    if (std::isnan(out.zeta[node.depth])) {
      out.zeta[node.depth] = node.cost;
      if (static_cast<int>(node.depth) == n) {
        out.argmin_path = VertexId{node.path};
        return out;
      }
    }
    if (static_cast<int>(node.depth) >= n) continue;

    int children = 2;
    if (gw) {
      CounterStream s(node.key, Draw::offspring);
      children = draw_offspring(*gw, s);
    }
    for (int k = 1; k <= children; ++k) {
      SearchNode child;
      child.key = child_key(node.key, static_cast<std::uint32_t>(k));
      child.depth = node.depth + 1;
      if (model.kernel) {
        CounterStream s(child.key, Draw::state);
        child.state = model.kernel->sample(node.state, s);
      } else {
        child.state = 0.0;
      }
      child.cost =
          node.cost + edge_time(model, child.key, child.depth, child.state);
      child.path = node.path;
      child.path.push_back(static_cast<std::uint32_t>(k));
      pq.push(std::move(child));
    }
  }

  // Queue emptied: the realized tree dies out before depth n; unreached
  // depths have infinite minimal path sums (1/0 = inf beyond leaves).
  for (double& z : out.zeta)
    if (std::isnan(z)) z = kInf;
  return out;
}

}  // namespace

double GwConfig::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < offspring_probs.size(); ++k)
    m += static_cast<double>(k) * offspring_probs[k];
  return m;
}

void GwConfig::validate() const {
  if (offspring_probs.empty())
    throw config_error("galton-watson: empty offspring law");
  double total = 0;
  for (double p : offspring_probs) {
    if (p < 0) throw config_error("galton-watson: negative weight");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw config_error("galton-watson: weights must sum to 1");
}

double edge_time(const CascadeModel& model, std::uint64_t vkey,
                 std::size_t depth, double state) {
  CounterStream s(vkey, Draw::holding);
  return s.next_exp() / intensity(model, depth, state);
}

ZetaEstimate zeta_to_depth(const CascadeModel& model, int n,
                           std::uint64_t budget, std::uint64_t seed,
                           std::uint64_t trial) {
  return zeta_impl(model, nullptr, n, budget, seed, trial);
}

ZetaEstimate gw_zeta_to_depth(const CascadeModel& model, const GwConfig& gw,
                              int n, std::uint64_t budget, std::uint64_t seed,
                              std::uint64_t trial) {
  gw.validate();
  return zeta_impl(model, &gw, n, budget, seed, trial);
}

FrontierResult simulate_frontier(const CascadeModel& model, double t,
                                 std::uint64_t budget, std::uint64_t seed,
                                 std::uint64_t trial, std::size_t max_events) {
  validate(model);
  if (!(t > 0.0)) throw config_error("frontier: horizon must be positive");

  struct Node {
    double crossing;  // cumulative path sum through this vertex
    std::uint64_t key;
    std::uint32_t depth;
    double state;
    bool operator>(const Node& o) const { return crossing > o.crossing; }
  };

  FrontierResult out;
  out.horizon = t;
  out.budget = budget;

  const std::uint64_t tkey = trial_key(seed, trial);
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  {
    Node root{0, tkey, 0, root_state(model, tkey)};
    root.crossing = edge_time(model, root.key, 0, root.state);
    pq.push(root);
  }

  while (!pq.empty()) {
    if (pq.size() > budget) {
      out.budget_exceeded = true;
      return out;
    }
    const Node node = pq.top();
    pq.pop();
    if (node.crossing > t) {
      ++out.crossed_count;  // member of V(t): crossed the horizon
      continue;
    }
    if (out.event_times.size() < max_events)
      out.event_times.push_back(node.crossing);
    for (std::uint32_t k = 1; k <= 2; ++k) {
      Node child;
      child.key = child_key(node.key, k);
      child.depth = node.depth + 1;
      if (model.kernel) {
        CounterStream s(child.key, Draw::state);
        child.state = model.kernel->sample(node.state, s);
      } else {
        child.state = 0.0;
      }
      child.crossing =
          node.crossing + edge_time(model, child.key, child.depth, child.state);
      pq.push(child);
    }
  }
  return out;
}

ExplosionEstimate explosion_probability(const CascadeModel& model, double t,
                                        std::uint64_t budget, int trials,
                                        std::uint64_t seed, int threads) {
  if (trials < 1) throw config_error("explosion: trials must be >= 1");
  validate(model);
  threads = std::max(1, threads);

  ExplosionEstimate out;
  out.trials = trials;
  out.budget = budget;
  out.horizon = t;
  out.crossed_counts.assign(trials, 0);
  out.censored.assign(trials, false);

  auto worker = [&](int offset) {
    for (int i = offset; i < trials; i += threads) {
      FrontierResult r = simulate_frontier(model, t, budget, seed,
                                           static_cast<std::uint64_t>(i), 0);
      out.crossed_counts[i] = r.crossed_count;
      out.censored[i] = r.budget_exceeded ? 1 : 0;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int r = 0; r < threads; ++r) pool.emplace_back(worker, r);
    for (auto& th : pool) th.join();
  }

  int exhausted = 0;
  for (int i = 0; i < trials; ++i) exhausted += out.censored[i] ? 1 : 0;
  const double n = trials, x = exhausted;
  const double z = 1.959963984540054;  // 95%
  const double p = x / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  out.fraction = p;
  // exact boundary fractions clamp to exact interval endpoints
  out.wilson_lo = x == 0 ? 0.0 : std::max(0.0, center - half);
  out.wilson_hi = x == n ? 1.0 : std::min(1.0, center + half);
  return out;
}

}  // namespace dsy
