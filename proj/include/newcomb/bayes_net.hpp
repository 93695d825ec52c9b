#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "newcomb/error.hpp"

namespace newcomb {

// Probabilities are 64-bit doubles throughout. Input rows must sum to 1
// within kRowTolerance; distributions returned by query are normalized and
// sum to 1 within the same bound.
inline constexpr double kRowTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Mixed-radix indexing. Every flat table in this library (CPT rows, utility
// tables, distributions) uses the same convention: the first digit (first
// declared parent / first scope node) is the most significant.
// ---------------------------------------------------------------------------

inline std::size_t radix_product(std::span<const std::size_t> radices) {
  std::size_t n = 1;
  for (std::size_t r : radices) n *= r;
  return n;
}

inline std::size_t radix_index(std::span<const std::size_t> digits,
                               std::span<const std::size_t> radices) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) idx = idx * radices[i] + digits[i];
  return idx;
}

inline std::vector<std::size_t> radix_digits(std::size_t flat,
                                             std::span<const std::size_t> radices) {
  std::vector<std::size_t> d(radices.size());
  for (std::size_t i = radices.size(); i-- > 0;) {
    d[i] = flat % radices[i];
    flat /= radices[i];
  }
  return d;
}

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

// Conditional probability table. rows[r][s] = P(own state s | parent
// combination r), rows indexed mixed-radix over parent states in declared
// parent order.
struct Cpt {
  std::vector<std::vector<double>> rows;

  // Builds from a row-major flat array (the scenario-file layout).
  static Cpt from_flat(std::span<const double> flat, std::size_t n_states) {
    Cpt c;
    if (n_states == 0 || flat.size() % n_states != 0)
      fail(ErrorCode::CptShapeMismatch, "flat cpt of length " +
                                            std::to_string(flat.size()) +
                                            " is not a multiple of " +
                                            std::to_string(n_states) + " states");
    c.rows.reserve(flat.size() / n_states);
    for (std::size_t r = 0; r < flat.size(); r += n_states)
      c.rows.emplace_back(flat.begin() + r, flat.begin() + r + n_states);
    return c;
  }

  std::vector<double> to_flat() const {
    std::vector<double> flat;
    for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
  }

  // Point mass on `state`, no parents.
  static Cpt point_mass(std::size_t state, std::size_t n_states) {
    Cpt c;
    c.rows.emplace_back(n_states, 0.0);
    c.rows[0][state] = 1.0;
    return c;
  }

  bool operator==(const Cpt&) const = default;
};

struct NodeSpec {
  std::string id;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  Cpt cpt;

  bool operator==(const NodeSpec&) const = default;
};

// Partial or full binding of node ids to state labels.
struct Assignment {
  std::map<std::string, std::string> bindings;

  Assignment() = default;
  Assignment(std::initializer_list<std::pair<const std::string, std::string>> init)
      : bindings(init) {}

  bool contains(const std::string& id) const { return bindings.count(id) > 0; }
  void set(const std::string& id, const std::string& state) { bindings[id] = state; }
};

// Normalized probability table over the joint states of an ordered list of
// target nodes. Flat storage, mixed-radix, first target most significant.
class Distribution {
 public:
  Distribution(std::vector<std::string> targets,
               std::vector<std::vector<std::string>> state_labels,
               std::vector<double> probs)
      : targets_(std::move(targets)),
        state_labels_(std::move(state_labels)),
        probs_(std::move(probs)) {
    radices_.reserve(state_labels_.size());
    for (const auto& s : state_labels_) radices_.push_back(s.size());
  }

  const std::vector<std::string>& targets() const { return targets_; }
  const std::vector<std::vector<std::string>>& state_labels() const { return state_labels_; }
  std::size_t size() const { return probs_.size(); }
  double at(std::size_t flat) const { return probs_.at(flat); }
  const std::vector<double>& probabilities() const { return probs_; }

  double at(std::span<const std::string> states) const {
    if (states.size() != targets_.size())
      throw std::invalid_argument("state tuple arity does not match targets");
    std::vector<std::size_t> digits(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto& labels = state_labels_[i];
      auto it = std::find(labels.begin(), labels.end(), states[i]);
      if (it == labels.end())
        fail(ErrorCode::UnknownState,
             "state '" + states[i] + "' is not valid for node '" + targets_[i] + "'");
      digits[i] = static_cast<std::size_t>(it - labels.begin());
    }
    return probs_[radix_index(digits, radices_)];
  }

  double at(const std::vector<std::string>& states) const {
    return at(std::span<const std::string>(states));
  }

  std::vector<std::string> labels_of(std::size_t flat) const {
    auto digits = radix_digits(flat, radices_);
    std::vector<std::string> out(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i) out[i] = state_labels_[i][digits[i]];
    return out;
  }

  // "a|b|c" key, the convention shared with the scenario-file utility table.
  std::string key_of(std::size_t flat) const {
    auto labels = labels_of(flat);
    std::string key;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i) key += '|';
      key += labels[i];
    }
    return key;
  }

 private:
  std::vector<std::string> targets_;
  std::vector<std::vector<std::string>> state_labels_;
  std::vector<std::size_t> radices_;
  std::vector<double> probs_;
};

// ---------------------------------------------------------------------------
// Network: validated DAG of finite-state nodes with CPTs. Immutable after
// validation; all operations below are pure functions returning new values.
// ---------------------------------------------------------------------------

class Network {
 public:
  // Checks every structural invariant and returns the validated network.
  // Throws Error with one of: DuplicateId, UnknownParent, CptShapeMismatch,
  // RowNotNormalized, CycleDetected.
  static Network validate(std::vector<NodeSpec> nodes) {
    Network net;
    net.nodes_ = std::move(nodes);

    for (std::size_t i = 0; i < net.nodes_.size(); ++i) {
      const auto& n = net.nodes_[i];
      if (net.index_.count(n.id))
        fail(ErrorCode::DuplicateId, "node id '" + n.id + "' declared twice");
      net.index_[n.id] = i;
    }

    net.parent_idx_.resize(net.nodes_.size());
    net.parent_radices_.resize(net.nodes_.size());
    for (std::size_t i = 0; i < net.nodes_.size(); ++i) {
      const auto& n = net.nodes_[i];
      if (n.states.empty())
        fail(ErrorCode::CptShapeMismatch, "node '" + n.id + "' has no states");
      for (std::size_t a = 0; a < n.states.size(); ++a)
        for (std::size_t b = a + 1; b < n.states.size(); ++b)
          if (n.states[a] == n.states[b])
            fail(ErrorCode::DuplicateId,
                 "node '" + n.id + "' repeats state label '" + n.states[a] + "'");

      std::unordered_set<std::string> seen;
      for (const auto& p : n.parents) {
        if (!seen.insert(p).second)
          fail(ErrorCode::DuplicateId, "node '" + n.id + "' lists parent '" + p + "' twice");
        auto it = net.index_.find(p);
        if (it == net.index_.end())
          fail(ErrorCode::UnknownParent, "node '" + n.id + "' has unknown parent '" + p + "'");
        net.parent_idx_[i].push_back(it->second);
        net.parent_radices_[i].push_back(net.nodes_[it->second].states.size());
      }

      const std::size_t want_rows = radix_product(net.parent_radices_[i]);
      if (n.cpt.rows.size() != want_rows)
        fail(ErrorCode::CptShapeMismatch,
             "node '" + n.id + "' cpt has " + std::to_string(n.cpt.rows.size()) +
                 " rows, expected " + std::to_string(want_rows));
      for (const auto& row : n.cpt.rows) {
        if (row.size() != n.states.size())
          fail(ErrorCode::CptShapeMismatch,
               "node '" + n.id + "' cpt row has " + std::to_string(row.size()) +
                   " entries, expected " + std::to_string(n.states.size()));
        double sum = 0.0;
        for (double v : row) {
          if (!(v >= 0.0 && v <= 1.0))
            fail(ErrorCode::RowNotNormalized,
                 "node '" + n.id + "' cpt entry " + std::to_string(v) + " outside [0, 1]");
          sum += v;
        }
        if (std::abs(sum - 1.0) > kRowTolerance)
          fail(ErrorCode::RowNotNormalized,
               "node '" + n.id + "' cpt row sums to " + std::to_string(sum));
      }
    }

    net.compute_topo_order();
    return net;
  }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool has_node(const std::string& id) const { return index_.count(id) > 0; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorCode::UnknownNode, "no node '" + id + "'");
    return it->second;
  }

  const NodeSpec& node(const std::string& id) const { return nodes_[index_of(id)]; }

  std::size_t state_index(const std::string& id, const std::string& state) const {
    const NodeSpec& n = node(id);
    auto it = std::find(n.states.begin(), n.states.end(), state);
    if (it == n.states.end())
      fail(ErrorCode::UnknownState, "node '" + id + "' has no state '" + state + "'");
    return static_cast<std::size_t>(it - n.states.begin());
  }

  std::size_t n_states(std::size_t i) const { return nodes_[i].states.size(); }
  const std::vector<std::size_t>& parent_indices(std::size_t i) const { return parent_idx_[i]; }
  const std::vector<std::size_t>& topo_order() const { return topo_; }

  std::vector<std::size_t> children_of(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      for (std::size_t p : parent_idx_[j])
        if (p == i) out.push_back(j);
    return out;
  }

  // CPT row of node i selected by a full per-node state-index vector.
  const std::vector<double>& cpt_row(std::size_t i,
                                     std::span<const std::size_t> all_states) const {
    std::size_t row = 0;
    const auto& pidx = parent_idx_[i];
    const auto& prad = parent_radices_[i];
    for (std::size_t k = 0; k < pidx.size(); ++k)
      row = row * prad[k] + all_states[pidx[k]];
    return nodes_[i].cpt.rows[row];
  }

 private:
  Network() = default;

  void compute_topo_order() {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = parent_idx_[i].size();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.push_back(i);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p : parent_idx_[i]) children[p].push_back(i);
    topo_.clear();
    while (!ready.empty()) {
      std::size_t i = ready.front();
      ready.pop_front();
      topo_.push_back(i);
      for (std::size_t c : children[i])
        if (--indeg[c] == 0) ready.push_back(c);
    }
    if (topo_.size() != n) {
      std::string cyclic;
      for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] > 0) cyclic += (cyclic.empty() ? "" : ", ") + nodes_[i].id;
      fail(ErrorCode::CycleDetected, "cycle through {" + cyclic + "}");
    }
  }

  std::vector<NodeSpec> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parent_idx_;
  std::vector<std::vector<std::size_t>> parent_radices_;
  std::vector<std::size_t> topo_;
};

inline Network validate(std::vector<NodeSpec> nodes) {
  return Network::validate(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace detail {

// Resolves an assignment to per-node state indices. Entries for nodes not in
// the network raise UnknownNode, bad state labels raise UnknownState.
inline std::vector<std::optional<std::size_t>> resolve(const Network& net,
                                                       const Assignment& a) {
  std::vector<std::optional<std::size_t>> fixed(net.size());
  for (const auto& [id, state] : a.bindings) {
    std::size_t i = net.index_of(id);
    fixed[i] = net.state_index(id, state);
  }
  return fixed;
}

}  // namespace detail

// Joint probability of one full assignment: the product of the local CPT
// entries, accumulated in declared node order (fixed arithmetic order, so
// results are bit-for-bit reproducible).
inline double joint_probability(const Network& net, const Assignment& a) {
  auto fixed = detail::resolve(net, a);
  std::vector<std::size_t> st(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!fixed[i])
      fail(ErrorCode::IncompleteAssignment,
           "assignment does not bind node '" + net.nodes()[i].id + "'");
    st[i] = *fixed[i];
  }
  double p = 1.0;
  for (std::size_t i = 0; i < net.size(); ++i) p *= net.cpt_row(i, st)[st[i]];
  return p;
}

// Exact conditional P(targets | evidence) by enumeration over the free
// nodes in topological order, pruning zero-probability branches. Raises
// ImpossibleEvidence when the evidence has probability exactly zero instead
// of dividing by it.
inline Distribution query(const Network& net, const std::vector<std::string>& targets,
                          const Assignment& evidence) {
  if (targets.empty()) throw std::invalid_argument("query: empty target set");
  std::vector<std::size_t> tgt_idx;
  std::vector<std::size_t> tgt_radices;
  std::vector<std::vector<std::string>> tgt_labels;
  {
    std::unordered_set<std::string> seen;
    for (const auto& t : targets) {
      if (!seen.insert(t).second)
        throw std::invalid_argument("query: target '" + t + "' repeated");
      std::size_t i = net.index_of(t);
      tgt_idx.push_back(i);
      tgt_radices.push_back(net.n_states(i));
      tgt_labels.push_back(net.nodes()[i].states);
    }
  }

  auto fixed = detail::resolve(net, evidence);
  const auto& order = net.topo_order();
  std::vector<std::size_t> st(net.size(), 0);
  std::vector<double> accum(radix_product(tgt_radices), 0.0);
  std::vector<std::size_t> digits(tgt_idx.size());

  auto dfs = [&](auto&& self, std::size_t depth, double p) -> void {
    if (depth == order.size()) {
      for (std::size_t k = 0; k < tgt_idx.size(); ++k) digits[k] = st[tgt_idx[k]];
      accum[radix_index(digits, tgt_radices)] += p;
      return;
    }
    const std::size_t i = order[depth];
    const auto& row = net.cpt_row(i, st);
    if (fixed[i]) {
      st[i] = *fixed[i];
      const double f = row[st[i]];
      if (f != 0.0) self(self, depth + 1, p * f);
    } else {
      for (std::size_t s = 0; s < row.size(); ++s) {
        if (row[s] == 0.0) continue;
        st[i] = s;
        self(self, depth + 1, p * row[s]);
      }
    }
  };
  dfs(dfs, 0, 1.0);

  double total = 0.0;
  for (double v : accum) total += v;
  if (total == 0.0) {
    std::string ev;
    for (const auto& [id, state] : evidence.bindings)
      ev += (ev.empty() ? "" : ", ") + id + "=" + state;
    fail(ErrorCode::ImpossibleEvidence, "evidence {" + ev + "} has probability 0");
  }
  for (double& v : accum) v /= total;
  return Distribution(targets, std::move(tgt_labels), std::move(accum));
}

// do-surgery: drop the node's incoming edges and clamp it to `value` with a
// degenerate CPT. Everything else is untouched; the result re-validates.
inline Network intervene(const Network& net, const std::string& node,
                         const std::string& value) {
  const std::size_t i = net.index_of(node);
  const std::size_t s = net.state_index(node, value);
  std::vector<NodeSpec> nodes = net.nodes();
  nodes[i].parents.clear();
  nodes[i].cpt = Cpt::point_mass(s, nodes[i].states.size());
  return Network::validate(std::move(nodes));
}

// Counterfactual detachment: remove the node's parent edges and give it a
// single-row CPT equal to its prior marginal in the original network.
inline Network marginalize_parents(const Network& net, const std::string& node) {
  const std::size_t i = net.index_of(node);
  Distribution prior = query(net, {node}, {});
  std::vector<NodeSpec> nodes = net.nodes();
  nodes[i].parents.clear();
  nodes[i].cpt.rows.assign(1, prior.probabilities());
  return Network::validate(std::move(nodes));
}

// Standard d-separation via active-trail reachability. X, Y, Z must be
// disjoint. Returns true iff every path between X and Y is blocked by Z.
inline bool d_separated(const Network& net, const std::vector<std::string>& X,
                        const std::vector<std::string>& Y,
                        const std::vector<std::string>& Z) {
  auto to_idx = [&](const std::vector<std::string>& ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(net.index_of(id));
    return out;
  };
  const auto xi = to_idx(X), yi = to_idx(Y), zi = to_idx(Z);
  {
    std::unordered_set<std::size_t> seen;
    for (auto v : xi) seen.insert(v);
    for (auto v : yi)
      if (!seen.insert(v).second) throw std::invalid_argument("d_separated: sets overlap");
    for (auto v : zi)
      if (!seen.insert(v).second) throw std::invalid_argument("d_separated: sets overlap");
  }

  const std::size_t n = net.size();
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p : net.parent_indices(i)) children[p].push_back(i);

  std::vector<bool> in_z(n, false);
  for (std::size_t z : zi) in_z[z] = true;

  // in_anc_z[v] = v is in Z or has a descendant in Z (collider activation).
  std::vector<bool> in_anc_z(n, false);
  {
    std::deque<std::size_t> work(zi.begin(), zi.end());
    for (std::size_t z : zi) in_anc_z[z] = true;
    while (!work.empty()) {
      std::size_t v = work.front();
      work.pop_front();
      for (std::size_t p : net.parent_indices(v))
        if (!in_anc_z[p]) {
          in_anc_z[p] = true;
          work.push_back(p);
        }
    }
  }

  std::vector<bool> in_y(n, false);
  for (std::size_t y : yi) in_y[y] = true;

  // State (v, dir): dir 0 = trail arrives from a child (moving up),
  // dir 1 = trail arrives from a parent (moving down).
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, int>> frontier;
  for (std::size_t x : xi) frontier.emplace_back(x, 0);

  while (!frontier.empty()) {
    auto [v, dir] = frontier.front();
    frontier.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    if (in_y[v]) return false;

    if (dir == 0) {
      // Entered from a child: pass through unless observed.
      if (!in_z[v]) {
        for (std::size_t p : net.parent_indices(v)) frontier.emplace_back(p, 0);
        for (std::size_t c : children[v]) frontier.emplace_back(c, 1);
      }
    } else {
      // Entered from a parent: chain continues unless observed; the
      // v-structure opens only when v or a descendant of v is observed.
      if (!in_z[v])
        for (std::size_t c : children[v]) frontier.emplace_back(c, 1);
      if (in_anc_z[v])
        for (std::size_t p : net.parent_indices(v)) frontier.emplace_back(p, 0);
    }
  }
  return true;
}

}  // namespace newcomb
