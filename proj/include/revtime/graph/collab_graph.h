#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "revtime/core/time.h"
#include "revtime/dataset/change_record.h"

namespace revtime::graph {

inline constexpr int kDefaultWindowDays = 365;

// Undirected developer-interaction graph. Weights count the changes on which
// two accounts interacted; centralities ignore them and use the simple graph.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  InteractionGraph(Timestamp as_of, int window_days) : as_of_(as_of), window_days_(window_days) {}

  // Test/debug constructor from an explicit edge list. Repeated pairs add
  // weight; self-loops are ignored.
  static InteractionGraph from_edges(std::span<const AccountId> nodes,
                                     std::span<const std::pair<AccountId, AccountId>> edges);

  void add_node(AccountId id);
  void add_interaction(AccountId a, AccountId b);

  bool contains(AccountId id) const { return index_.count(id) != 0; }
  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return weights_.size(); }
  int weight(AccountId a, AccountId b) const;

  // Dense-index view used by the metric routines.
  std::size_t index_of(AccountId id) const { return index_.at(id); }
  AccountId id_at(std::size_t index) const { return ids_[index]; }
  const std::vector<std::size_t>& neighbors(std::size_t index) const { return adjacency_[index]; }

  Timestamp as_of() const { return as_of_; }
  int window_days() const { return window_days_; }

  // One "u v weight" line per edge, u < v.
  void write_edge_list(std::ostream& out) const;

 private:
  Timestamp as_of_{};
  int window_days_ = kDefaultWindowDays;
  std::map<AccountId, std::size_t> index_;
  std::vector<AccountId> ids_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::map<std::pair<AccountId, AccountId>, int> weights_;
};

// Owner-centric graph over changes created in [as_of - window_days, as_of):
// one owner--participant edge increment per change and distinct non-owner,
// non-bot message author. Only messages posted before as_of are considered.
InteractionGraph build_graph(std::span<const ChangeRecord> history, Timestamp as_of,
                             int window_days = kDefaultWindowDays);

double degree_centrality(const InteractionGraph& g, AccountId v);
// Wasserman-Faust closeness for possibly disconnected graphs.
double closeness_centrality(const InteractionGraph& g, AccountId v);
// Brandes, normalized by (n-1)(n-2) over ordered pairs.
double betweenness_centrality(const InteractionGraph& g, AccountId v);
// Principal eigenvector of v's component, scaled so its largest entry is 1.
// Throws Error(kConvergenceFailure) after 1000 iterations.
double eigenvector_centrality(const InteractionGraph& g, AccountId v);
double clustering_coefficient(const InteractionGraph& g, AccountId v);
int core_number(const InteractionGraph& g, AccountId v);

struct CollabFeatures {
  double degree_centrality = 0;
  double closeness_centrality = 0;
  double betweenness_centrality = 0;
  double eigenvector_centrality = 0;
  double clustering_coefficient = 0;
  int core_number = 0;
};

// All six metrics for v; zeros when v is not in the graph. A non-converged
// eigenvector iteration contributes its last iterate instead of failing.
CollabFeatures collab_features(const InteractionGraph& g, AccountId v);

}  // namespace revtime::graph
