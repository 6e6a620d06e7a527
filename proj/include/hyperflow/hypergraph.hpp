#pragma once

// Directed, weighted, nonuniform hypergraphs stored as coordinate-format
// adjacency tensors, one layer per interaction order.
//
// An entry of order r carries a head node i, a primary tail node k and r - 1
// further tail nodes I; its weight multiplies the monomial prod_{j in I} x_j
// in the rate kernel Q_{k->i}(x). All node indices are 0-based in memory.

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hyperflow/errors.hpp"
#include "hyperflow/state.hpp"

namespace hyperflow {

inline constexpr double kTgdbTolerance = 1e-9;

struct EdgeKey {
  int order = 1;
  int head = 0;
  int tail = 0;
  std::vector<int> rest;

  auto operator<=>(const EdgeKey&) const = default;
  bool operator==(const EdgeKey&) const = default;

  EdgeKey reversed() const { return EdgeKey{order, tail, head, rest}; }
};

struct HyperEdge {
  int order = 1;
  int head = 0;
  int tail = 0;
  std::vector<int> rest;
  double weight = 0.0;

  EdgeKey key() const { return EdgeKey{order, head, tail, rest}; }
};

// Human-readable description using 1-based node labels.
inline std::string describe(const EdgeKey& k) {
  std::ostringstream os;
  os << "(order " << k.order << ", head " << k.head + 1 << ", tail [" << k.tail + 1;
  for (int j : k.rest) os << ", " << j + 1;
  os << "])";
  return os.str();
}

inline std::string describe(const HyperEdge& e) {
  std::ostringstream os;
  os << describe(e.key()) << " weight " << e.weight;
  return os.str();
}

/// Sparse collection of adjacency tensors {A^(r)}.
///
/// Entries are kept sorted by key. Two flavours exist: validated sets, whose
/// weights are nonnegative, and direction sets, which describe signed
/// perturbations dA and skip the sign check.
class HyperTensorSet {
 public:
  HyperTensorSet() = default;

  static HyperTensorSet create(int n, std::vector<HyperEdge> entries) {
    return HyperTensorSet(n, std::move(entries), /*signed_weights=*/false);
  }

  static HyperTensorSet direction(int n, std::vector<HyperEdge> entries) {
    return HyperTensorSet(n, std::move(entries), /*signed_weights=*/true);
  }

  static HyperTensorSet empty(int n) { return create(n, {}); }

  int size() const noexcept { return n_; }
  const std::vector<HyperEdge>& entries() const noexcept { return entries_; }
  std::size_t entry_count() const noexcept { return entries_.size(); }
  bool is_direction() const noexcept { return signed_; }

  int max_order() const {
    int r = 0;
    for (const auto& e : entries_) r = std::max(r, e.order);
    return r;
  }

  std::size_t entry_count(int order) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [order](const HyperEdge& e) { return e.order == order; }));
  }

  std::vector<int> orders() const {
    std::set<int> s;
    for (const auto& e : entries_) s.insert(e.order);
    return {s.begin(), s.end()};
  }

  std::optional<double> weight(const EdgeKey& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const HyperEdge& e, const EdgeKey& k) { return e.key() < k; });
    if (it != entries_.end() && it->key() == key) return it->weight;
    return std::nullopt;
  }

 private:
  HyperTensorSet(int n, std::vector<HyperEdge> entries, bool signed_weights)
      : n_(n), entries_(std::move(entries)), signed_(signed_weights) {
    if (n_ < 1) throw ValidationError("node count must be positive");
    for (const auto& e : entries_) validate(e);
    std::sort(entries_.begin(), entries_.end(),
              [](const HyperEdge& a, const HyperEdge& b) { return a.key() < b.key(); });
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i - 1].key() == entries_[i].key())
        throw ValidationError("duplicate entry " + describe(entries_[i].key()));
  }

  void validate(const HyperEdge& e) const {
    auto in_range = [this](int j) { return j >= 0 && j < n_; };
    if (e.order < 1) throw ValidationError("order must be >= 1 in entry " + describe(e));
    if (!in_range(e.head) || !in_range(e.tail))
      throw ValidationError("node index out of range in entry " + describe(e));
    for (int j : e.rest)
      if (!in_range(j)) throw ValidationError("node index out of range in entry " + describe(e));
    if (e.head == e.tail) throw ValidationError("head equals primary tail in entry " + describe(e));
    if (static_cast<int>(e.rest.size()) != e.order - 1)
      throw ValidationError("tail length does not match order in entry " + describe(e));
    if (!std::isfinite(e.weight)) throw ValidationError("non-finite weight in entry " + describe(e));
    if (!signed_ && e.weight < 0.0) throw ValidationError("negative weight in entry " + describe(e));
  }

  int n_ = 1;
  std::vector<HyperEdge> entries_;
  bool signed_ = false;
};

inline double frobenius_norm(const HyperTensorSet& t) {
  double s = 0.0;
  for (const auto& e : t.entries()) s += e.weight * e.weight;
  return std::sqrt(s);
}

inline HyperTensorSet scaled(const HyperTensorSet& t, double factor) {
  auto entries = t.entries();
  for (auto& e : entries) e.weight *= factor;
  if (t.is_direction() || factor < 0.0) return HyperTensorSet::direction(t.size(), std::move(entries));
  return HyperTensorSet::create(t.size(), std::move(entries));
}

// Coefficient-wise sum; entries with equal keys are added. The result is a
// validated set when every summed weight is nonnegative, a direction set
// otherwise.
inline HyperTensorSet add(const HyperTensorSet& a, const HyperTensorSet& b) {
  if (a.size() != b.size()) throw ValidationError("tensor sets have different node counts");
  std::map<EdgeKey, double> sum;
  for (const auto& e : a.entries()) sum[e.key()] += e.weight;
  for (const auto& e : b.entries()) sum[e.key()] += e.weight;
  std::vector<HyperEdge> out;
  out.reserve(sum.size());
  bool nonnegative = true;
  for (auto& [k, w] : sum) {
    out.push_back(HyperEdge{k.order, k.head, k.tail, k.rest, w});
    nonnegative = nonnegative && w >= 0.0;
  }
  if (nonnegative) return HyperTensorSet::create(a.size(), std::move(out));
  return HyperTensorSet::direction(a.size(), std::move(out));
}

// ---------------------------------------------------------------------------
// Tensor generalized detailed balance

struct TgdbViolation {
  EdgeKey key;  // (order, i, k, I); the reverse (order, k, i, I) is implied
  double residual = 0.0;
};

struct TgdbReport {
  bool holds = false;
  Vector reference;
  std::vector<TgdbViolation> violations;
  double max_residual = 0.0;
};

/// Checks v_k a_{ikI} = v_i a_{kiI} layer by layer. A missing reverse entry
/// counts as weight 0. Each unordered pair is reported once, under the key
/// whose head is smaller.
inline TgdbReport check_tgdb(const HyperTensorSet& tensors, const StateVector& v,
                             double tolerance = kTgdbTolerance) {
  if (v.size() != tensors.size()) throw ValidationError("reference vector has wrong dimension");
  TgdbReport report;
  report.reference = v.values();
  std::set<EdgeKey> seen;
  for (const auto& e : tensors.entries()) {
    EdgeKey key = e.key();
    EdgeKey rev = key.reversed();
    const EdgeKey& canonical = key.head < key.tail ? key : rev;
    if (!seen.insert(canonical).second) continue;
    const double forward = tensors.weight(canonical).value_or(0.0);
    const double backward = tensors.weight(canonical.reversed()).value_or(0.0);
    // canonical = (i, k, I): v_k a_{ikI} - v_i a_{kiI}
    const double residual =
        std::abs(v[canonical.tail] * forward - v[canonical.head] * backward);
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > tolerance) report.violations.push_back({canonical, residual});
  }
  report.holds = report.max_residual <= tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Support graph

struct SupportGraph {
  int n = 0;
  std::set<std::pair<int, int>> directed;    // (k, i): channel from tail k to head i
  std::set<std::pair<int, int>> undirected;  // {i, k} stored with i < k
};

inline SupportGraph support_graph(const HyperTensorSet& tensors) {
  SupportGraph g;
  g.n = tensors.size();
  for (const auto& e : tensors.entries()) {
    if (e.weight <= 0.0) continue;
    g.directed.emplace(e.tail, e.head);
    g.undirected.emplace(std::min(e.head, e.tail), std::max(e.head, e.tail));
  }
  return g;
}

enum class ConnectivityMode { undirected, strong };

namespace detail {

inline std::vector<bool> reachable_from(int n, int start,
                                        const std::vector<std::vector<int>>& adjacency) {
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  seen[start] = true;
  frontier.push(start);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int w : adjacency[u])
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
  }
  return seen;
}

}  // namespace detail

inline bool is_connected(const SupportGraph& g, ConnectivityMode mode) {
  if (g.n <= 1) return true;
  std::vector<std::vector<int>> fwd(g.n), bwd(g.n);
  if (mode == ConnectivityMode::strong) {
    for (auto [k, i] : g.directed) {
      fwd[k].push_back(i);
      bwd[i].push_back(k);
    }
  } else {
    for (auto [i, k] : g.undirected) {
      fwd[i].push_back(k);
      fwd[k].push_back(i);
    }
    bwd = fwd;
  }
  auto all = [](const std::vector<bool>& s) { return std::all_of(s.begin(), s.end(), [](bool b) { return b; }); };
  return all(detail::reachable_from(g.n, 0, fwd)) && all(detail::reachable_from(g.n, 0, bwd));
}

// ---------------------------------------------------------------------------
// Multilayer decomposition

inline std::vector<HyperTensorSet> decompose_layers(const HyperTensorSet& tensors) {
  std::map<int, std::vector<HyperEdge>> by_order;
  for (const auto& e : tensors.entries()) by_order[e.order].push_back(e);
  std::vector<HyperTensorSet> layers;
  for (auto& [r, entries] : by_order) {
    if (tensors.is_direction())
      layers.push_back(HyperTensorSet::direction(tensors.size(), std::move(entries)));
    else
      layers.push_back(HyperTensorSet::create(tensors.size(), std::move(entries)));
  }
  return layers;
}

/// Union of disjoint layers; overlapping keys are rejected like duplicates
/// in a spec file.
inline HyperTensorSet merge_layers(int n, const std::vector<HyperTensorSet>& layers) {
  std::vector<HyperEdge> all;
  bool direction = false;
  for (const auto& l : layers) {
    if (l.size() != n) throw ValidationError("layer has wrong node count");
    all.insert(all.end(), l.entries().begin(), l.entries().end());
    direction = direction || l.is_direction();
  }
  return direction ? HyperTensorSet::direction(n, std::move(all))
                   : HyperTensorSet::create(n, std::move(all));
}

}  // namespace hyperflow
