#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "confound/types.hpp"

namespace confound {

// Directed acyclic graph over observed and latent nodes. Observed nodes are
// indexed 0..n_observed-1; latents are appended after them. Latent nodes are
// root causes: they have no parents and are never adjacent to each other.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n_observed);

  int add_latent();  // returns the new node's global index
  void add_edge(int parent, int child);
  bool has_edge(int parent, int child) const;

  int n_observed() const { return n_observed_; }
  int n_latent() const { return n_latent_; }
  int n_nodes() const { return n_observed_ + n_latent_; }
  bool is_latent(int v) const;
  NodeId node(int v) const;
  std::string node_name(int v) const;  // X<i> for observed, Z<i> for latent

  std::vector<int> parents(int v) const;   // ascending
  std::vector<int> children(int v) const;  // ascending
  std::vector<int> observed_nodes() const;
  std::vector<int> latent_nodes() const;
  const std::set<std::pair<int, int>>& edges() const { return edges_; }

  // Parents of a node in one topological order (latents always precede their
  // children because they are roots).
  std::vector<int> topological_order() const;

  bool reaches(int from, int to) const;  // directed reachability, from != to

 private:
  void check_node(int v) const;

  int n_observed_ = 0;
  int n_latent_ = 0;
  std::set<std::pair<int, int>> edges_;
};

// Random DAG: draws a permutation of the observed nodes as topological order,
// then includes each forward pair independently with probability edge_prob.
// Draw order (replayable): Fisher-Yates on [0..n), then one uniform01 per
// ordered position pair (a<b).
Dag generate_er_dag(int n, double edge_prob, std::uint64_t seed);

// Adds k latent roots, each with `children_per` distinct observed children
// chosen uniformly. With enforce_minimality, placements are resampled (up to
// max_retries) until no observed subset S with |S| >= 4 receives more than
// 2|S| edges from latents having >= 3 children inside S.
Dag inject_latent_confounders(const Dag& dag, int k, int children_per, std::uint64_t seed,
                              bool enforce_minimality = false, int max_retries = 1000);

bool satisfies_latent_minimality(const Dag& dag);

// Observed nodes lying on some directed path from i to j: excludes i,
// includes j when j is reachable. Empty when there is no path.
std::set<int> path_node_set(const Dag& dag, int i, int j);

// Unordered observed pairs sharing at least one latent parent.
std::set<std::pair<int, int>> true_confounded_pairs(const Dag& dag);

// True when a single latent is a parent of every node in S.
bool is_jointly_confounded(const Dag& dag, const std::vector<int>& S);

std::string dag_to_json(const Dag& dag);
Dag dag_from_json(const std::string& text);

}  // namespace confound
