#include "confound/graph.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "confound/rng.hpp"

namespace confound {

using nlohmann::json;

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::retry_exhausted: return "RetryExhausted";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::unknown_column: return "UnknownColumn";
    case Errc::invalid_intervention_value: return "InvalidInterventionValue";
    case Errc::malformed_file: return "MalformedFile";
    case Errc::empty_context_set: return "EmptyContextSet";
    case Errc::unsupported_support: return "UnsupportedSupport";
    case Errc::insufficient_contexts: return "InsufficientContexts";
    case Errc::support_not_covered: return "SupportNotCovered";
    case Errc::non_hard_context: return "NonHardContext";
    case Errc::support_mismatch: return "SupportMismatch";
    case Errc::divergence_infinite: return "DivergenceInfinite";
    case Errc::stratum_empty: return "StratumEmpty";
    case Errc::invalid_set_size: return "InvalidSetSize";
    case Errc::direction_required: return "DirectionRequired";
  }
  return "Error";
}

Dag::Dag(int n_observed) : n_observed_(n_observed) {
  if (n_observed < 0) throw Error(Errc::unknown_node, "negative node count");
}

void Dag::check_node(int v) const {
  if (v < 0 || v >= n_nodes())
    throw Error(Errc::unknown_node, "node " + std::to_string(v) + " out of range");
}

bool Dag::is_latent(int v) const {
  check_node(v);
  return v >= n_observed_;
}

NodeId Dag::node(int v) const {
  check_node(v);
  return NodeId{v, is_latent(v) ? NodeKind::latent : NodeKind::observed};
}

std::string Dag::node_name(int v) const {
  return (is_latent(v) ? "Z" : "X") + std::to_string(v);
}

int Dag::add_latent() {
  ++n_latent_;
  return n_nodes() - 1;
}

bool Dag::has_edge(int parent, int child) const {
  return edges_.count({parent, child}) > 0;
}

void Dag::add_edge(int parent, int child) {
  check_node(parent);
  check_node(child);
  if (parent == child) throw Error(Errc::unknown_node, "self edge");
  if (is_latent(child))
    throw Error(Errc::unknown_node, "latent nodes cannot have parents");
  if (has_edge(parent, child)) return;
  if (reaches(child, parent))
    throw Error(Errc::unknown_node, "edge " + std::to_string(parent) + "->" +
                                        std::to_string(child) + " would create a cycle");
  edges_.insert({parent, child});
}

std::vector<int> Dag::parents(int v) const {
  check_node(v);
  std::vector<int> out;
  for (const auto& [p, c] : edges_)
    if (c == v) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Dag::children(int v) const {
  check_node(v);
  std::vector<int> out;
  for (const auto& [p, c] : edges_)
    if (p == v) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Dag::observed_nodes() const {
  std::vector<int> out(n_observed_);
  for (int i = 0; i < n_observed_; ++i) out[i] = i;
  return out;
}

std::vector<int> Dag::latent_nodes() const {
  std::vector<int> out(n_latent_);
  for (int i = 0; i < n_latent_; ++i) out[i] = n_observed_ + i;
  return out;
}

bool Dag::reaches(int from, int to) const {
  std::vector<int> stack{from};
  std::vector<char> seen(n_nodes(), 0);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& [p, c] : edges_) {
      if (p != v || seen[c]) continue;
      if (c == to) return true;
      seen[c] = 1;
      stack.push_back(c);
    }
  }
  return false;
}

std::vector<int> Dag::topological_order() const {
  std::vector<int> indeg(n_nodes(), 0);
  for (const auto& [p, c] : edges_) ++indeg[c];
  std::vector<int> order, ready;
  for (int v = 0; v < n_nodes(); ++v)
    if (indeg[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (const auto& [p, c] : edges_)
      if (p == v && --indeg[c] == 0) ready.push_back(c);
  }
  if (static_cast<int>(order.size()) != n_nodes())
    throw Error(Errc::unknown_node, "graph has a cycle");
  return order;
}

Dag generate_er_dag(int n, double edge_prob, std::uint64_t seed) {
  Dag dag(n);
  Rng rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i >= 1; --i) {
    int j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (uniform01(rng) < edge_prob) dag.add_edge(perm[a], perm[b]);
  return dag;
}

namespace {

// Exact check of the incoming-latent-edge cap. Only subsets of U (children of
// latents with >= 3 children) can violate, and adding nodes outside U only
// weakens a violation, so enumerating subsets of U is exhaustive.
bool minimality_holds(const std::vector<std::vector<int>>& child_sets) {
  std::vector<int> universe;
  for (const auto& cs : child_sets)
    if (cs.size() >= 3)
      for (int v : cs)
        if (std::find(universe.begin(), universe.end(), v) == universe.end())
          universe.push_back(v);
  const int m = static_cast<int>(universe.size());
  if (m < 4) return true;
  if (m > 22)
    throw Error(Errc::retry_exhausted,
                "minimality check limited to 22 latent-covered nodes, got " + std::to_string(m));
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size < 4) continue;
    int incoming = 0;
    for (const auto& cs : child_sets) {
      int inside = 0;
      for (int v : cs) {
        for (int u = 0; u < m; ++u)
          if ((mask >> u & 1u) && universe[u] == v) ++inside;
      }
      if (inside >= 3) incoming += inside;
    }
    if (incoming > 2 * size) return false;
  }
  return true;
}

}  // namespace

bool satisfies_latent_minimality(const Dag& dag) {
  std::vector<std::vector<int>> child_sets;
  for (int z : dag.latent_nodes()) child_sets.push_back(dag.children(z));
  return minimality_holds(child_sets);
}

Dag inject_latent_confounders(const Dag& dag, int k, int children_per, std::uint64_t seed,
                              bool enforce_minimality, int max_retries) {
  if (children_per < 1 || children_per > dag.n_observed())
    throw Error(Errc::unknown_node, "children_per out of range");
  Rng rng(seed);
  for (int attempt = 0; attempt < std::max(1, max_retries); ++attempt) {
    Dag out = dag;
    for (int t = 0; t < k; ++t) {
      int z = out.add_latent();
      std::vector<int> pool = dag.observed_nodes();
      for (int pick = 0; pick < children_per; ++pick) {
        int j = static_cast<int>(uniform_below(rng, pool.size()));
        out.add_edge(z, pool[j]);
        pool.erase(pool.begin() + j);
      }
    }
    if (!enforce_minimality || satisfies_latent_minimality(out)) return out;
  }
  throw Error(Errc::retry_exhausted,
              "no latent placement satisfied the minimality cap after " +
                  std::to_string(max_retries) + " attempts");
}

std::set<int> path_node_set(const Dag& dag, int i, int j) {
  if (i == j) throw Error(Errc::unknown_node, "path endpoints must differ");
  std::set<int> out;
  if (!dag.reaches(i, j)) return out;
  for (int v = 0; v < dag.n_nodes(); ++v) {
    if (v == i) continue;
    if (v == j || (dag.reaches(i, v) && dag.reaches(v, j))) out.insert(v);
  }
  return out;
}

std::set<std::pair<int, int>> true_confounded_pairs(const Dag& dag) {
  std::set<std::pair<int, int>> out;
  for (int z : dag.latent_nodes()) {
    const auto ch = dag.children(z);
    for (size_t a = 0; a < ch.size(); ++a)
      for (size_t b = a + 1; b < ch.size(); ++b) out.insert({ch[a], ch[b]});
  }
  return out;
}

bool is_jointly_confounded(const Dag& dag, const std::vector<int>& S) {
  if (S.size() < 2) throw Error(Errc::invalid_set_size, "need at least two nodes");
  for (int z : dag.latent_nodes()) {
    const auto ch = dag.children(z);
    bool all = true;
    for (int v : S)
      if (!std::binary_search(ch.begin(), ch.end(), v)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

std::string dag_to_json(const Dag& dag) {
  json j;
  j["observed"] = dag.observed_nodes();
  j["latent"] = dag.latent_nodes();
  auto edges = json::array();
  for (const auto& [p, c] : dag.edges()) edges.push_back({p, c});
  j["edges"] = edges;
  return j.dump(2);
}

Dag dag_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_file, std::string("dag json: ") + e.what());
  }
  if (!j.contains("observed") || !j.contains("latent") || !j.contains("edges"))
    throw Error(Errc::malformed_file, "dag json needs observed/latent/edges");
  Dag dag(static_cast<int>(j["observed"].size()));
  for (size_t t = 0; t < j["latent"].size(); ++t) dag.add_latent();
  try {
    for (const auto& e : j["edges"]) dag.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_file, std::string("dag edges: ") + e.what());
  }
  return dag;
}

}  // namespace confound
