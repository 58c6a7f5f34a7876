#include "revtime/graph/collab_graph.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "revtime/core/error.h"

namespace revtime::graph {

namespace {

constexpr double kEigenTolerance = 1e-10;
constexpr int kEigenMaxIterations = 1000;

std::vector<int> bfs_distances(const InteractionGraph& g, std::size_t source) {
  std::vector<int> dist(g.node_count(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto w : g.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

struct EigenResult {
  double value = 0;
  bool converged = true;
};

EigenResult eigenvector_impl(const InteractionGraph& g, AccountId id) {
  if (!g.contains(id)) return {};
  const std::size_t v = g.index_of(id);
  if (g.neighbors(v).empty()) return {};

  const auto dist = bfs_distances(g, v);
  std::vector<std::size_t> component;
  std::vector<std::size_t> local(g.node_count(), 0);
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    if (dist[u] >= 0) {
      local[u] = component.size();
      component.push_back(u);
    }
  }
  const std::size_t m = component.size();
  std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m))), next(m);
  bool converged = false;
  for (int iter = 0; iter < kEigenMaxIterations && !converged; ++iter) {
    // Half-step damping (A + I) / 2 keeps bipartite components from oscillating.
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0;
      for (auto w : g.neighbors(component[i])) sum += x[local[w]];
      next[i] = 0.5 * x[i] + 0.5 * sum;
    }
    double norm = 0;
    for (double e : next) norm += e * e;
    norm = std::sqrt(norm);
    double delta = 0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] /= norm;
      delta = std::max(delta, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    converged = delta < kEigenTolerance;
  }
  const double max_entry = *std::max_element(x.begin(), x.end());
  return {x[local[v]] / max_entry, converged};
}

std::vector<int> core_numbers(const InteractionGraph& g) {
  // Batagelj-Zaversnik peeling.
  const std::size_t n = g.node_count();
  std::vector<int> degree(n);
  int max_degree = 0;
  for (std::size_t u = 0; u < n; ++u) {
    degree[u] = static_cast<int>(g.neighbors(u).size());
    max_degree = std::max(max_degree, degree[u]);
  }
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(max_degree) + 1);
  for (std::size_t u = 0; u < n; ++u) buckets[static_cast<std::size_t>(degree[u])].push_back(u);
  std::vector<bool> removed(n, false);
  std::vector<int> core(n, 0);
  int k = 0;
  for (std::size_t processed = 0; processed < n;) {
    std::size_t d = 0;
    while (d < buckets.size() && buckets[d].empty()) ++d;
    const std::size_t u = buckets[d].back();
    buckets[d].pop_back();
    if (removed[u] || degree[u] != static_cast<int>(d)) continue;  // stale entry
    removed[u] = true;
    ++processed;
    k = std::max(k, degree[u]);
    core[u] = k;
    for (auto w : g.neighbors(u)) {
      if (!removed[w] && degree[w] > degree[u]) {
        --degree[w];
        buckets[static_cast<std::size_t>(degree[w])].push_back(w);
      }
    }
  }
  return core;
}

}  // namespace

InteractionGraph InteractionGraph::from_edges(std::span<const AccountId> nodes,
                                              std::span<const std::pair<AccountId, AccountId>> edges) {
  InteractionGraph g;
  for (auto id : nodes) g.add_node(id);
  for (const auto& [a, b] : edges) g.add_interaction(a, b);
  return g;
}

void InteractionGraph::add_node(AccountId id) {
  if (index_.emplace(id, ids_.size()).second) {
    ids_.push_back(id);
    adjacency_.emplace_back();
  }
}

void InteractionGraph::add_interaction(AccountId a, AccountId b) {
  if (a == b) return;
  add_node(a);
  add_node(b);
  const auto key = std::minmax(a, b);
  auto [it, inserted] = weights_.emplace(std::make_pair(key.first, key.second), 0);
  ++it->second;
  if (inserted) {
    const auto ia = index_.at(a), ib = index_.at(b);
    adjacency_[ia].insert(std::lower_bound(adjacency_[ia].begin(), adjacency_[ia].end(), ib), ib);
    adjacency_[ib].insert(std::lower_bound(adjacency_[ib].begin(), adjacency_[ib].end(), ia), ia);
  }
}

int InteractionGraph::weight(AccountId a, AccountId b) const {
  const auto key = std::minmax(a, b);
  auto it = weights_.find({key.first, key.second});
  return it == weights_.end() ? 0 : it->second;
}

void InteractionGraph::write_edge_list(std::ostream& out) const {
  for (const auto& [pair, w] : weights_) out << pair.first << ' ' << pair.second << ' ' << w << '\n';
}

InteractionGraph build_graph(std::span<const ChangeRecord> history, Timestamp as_of,
                             int window_days) {
  InteractionGraph g(as_of, window_days);
  const Timestamp window_start = as_of - std::chrono::days(window_days);
  for (const auto& change : history) {
    if (change.created_at >= as_of || change.created_at < window_start) continue;
    std::set<AccountId> participants;
    for (const auto& m : change.messages) {
      if (m.posted_at >= as_of || m.from_bot || m.author_id == kNoAccount ||
          m.author_id == change.owner_id) {
        continue;
      }
      participants.insert(m.author_id);
    }
    for (auto p : participants) g.add_interaction(change.owner_id, p);
  }
  return g;
}

double degree_centrality(const InteractionGraph& g, AccountId v) {
  const std::size_t n = g.node_count();
  if (n <= 1 || !g.contains(v)) return 0.0;
  return static_cast<double>(g.neighbors(g.index_of(v)).size()) / static_cast<double>(n - 1);
}

double closeness_centrality(const InteractionGraph& g, AccountId v) {
  const std::size_t n = g.node_count();
  if (n <= 1 || !g.contains(v)) return 0.0;
  const auto dist = bfs_distances(g, g.index_of(v));
  double total = 0;
  std::size_t reachable = 0;
  for (int d : dist) {
    if (d > 0) {
      total += d;
      ++reachable;
    }
  }
  if (reachable == 0) return 0.0;
  const double r = static_cast<double>(reachable);
  return (r / total) * (r / static_cast<double>(n - 1));
}

double betweenness_centrality(const InteractionGraph& g, AccountId v) {
  const std::size_t n = g.node_count();
  if (n < 3 || !g.contains(v)) return 0.0;
  const std::size_t target = g.index_of(v);
  double score = 0;
  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    if (s == target) continue;
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();
    sigma[s] = 1;
    dist[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (auto w : g.neighbors(u)) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[u] + 1) {
          sigma[w] += sigma[u];
          preds[w].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto u : preds[w]) delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
    }
    score += delta[target];
  }
  return score / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
}

double eigenvector_centrality(const InteractionGraph& g, AccountId v) {
  const auto r = eigenvector_impl(g, v);
  if (!r.converged) {
    throw Error(ErrorCode::kConvergenceFailure, "eigenvector iteration did not converge");
  }
  return r.value;
}

double clustering_coefficient(const InteractionGraph& g, AccountId v) {
  if (!g.contains(v)) return 0.0;
  const auto& nb = g.neighbors(g.index_of(v));
  const std::size_t k = nb.size();
  if (k < 2) return 0.0;
  std::size_t links = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& other = g.neighbors(nb[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      if (std::binary_search(other.begin(), other.end(), nb[j])) ++links;
    }
  }
  return 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
}

int core_number(const InteractionGraph& g, AccountId v) {
  if (!g.contains(v)) return 0;
  return core_numbers(g)[g.index_of(v)];
}

CollabFeatures collab_features(const InteractionGraph& g, AccountId v) {
  if (!g.contains(v)) return {};
  return CollabFeatures{degree_centrality(g, v),       closeness_centrality(g, v),
                        betweenness_centrality(g, v),  eigenvector_impl(g, v).value,
                        clustering_coefficient(g, v),  core_number(g, v)};
}

}  // namespace revtime::graph
