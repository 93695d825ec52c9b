#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "newcomb/bayes_net.hpp"
#include "newcomb/error.hpp"

namespace newcomb {

// One CPT replacement requested by a logical annotation. The target's new
// parent list is its original parents followed by every logical id that
// rewires it, in annotation declaration order. Exactly one rewire entry per
// target supplies the replacement table (shaped against that final parent
// list); entries without a table just register the logical edge.
struct LogicalRewire {
  std::string target;
  std::optional<Cpt> cpt;

  bool operator==(const LogicalRewire&) const = default;
};

// Declaration of an abstract-computation node: a fresh root with a prior,
// plus the physical nodes whose CPTs gain it as a parent. The annotation
// flagged is_self_decision stands for the agent's own decision algorithm and
// must carry the decision node's exact state labels.
struct LogicalAnnotation {
  std::string logical_id;
  std::vector<std::string> states;
  std::vector<double> prior;
  std::vector<LogicalRewire> rewires;
  bool is_self_decision = false;

  bool operator==(const LogicalAnnotation&) const = default;
};

// Result of apply_tdt: the rewritten network plus the node the decision
// surgery now applies to.
struct TransformedProblem {
  Network net;
  std::string logical_decision;
  std::string original_decision;
};

// Materializes the declared logical nodes: each is appended as a root with
// its prior, and each rewired target gets the augmented parent list and the
// replacement CPT. An empty annotation list returns the network unchanged.
inline Network insert_logical_nodes(const Network& net,
                                    const std::vector<LogicalAnnotation>& annotations) {
  if (annotations.empty()) return net;

  std::unordered_set<std::string> fresh;
  for (const auto& ann : annotations) {
    if (net.has_node(ann.logical_id))
      fail(ErrorCode::DuplicateLogicalId,
           "logical id '" + ann.logical_id + "' collides with an existing node");
    if (!fresh.insert(ann.logical_id).second)
      fail(ErrorCode::DuplicateLogicalId,
           "logical id '" + ann.logical_id + "' declared twice");
  }

  // Gather, per target: appended logical parents (annotation order) and the
  // unique replacement table.
  struct Pending {
    std::vector<std::string> logical_parents;
    std::optional<Cpt> cpt;
    std::string cpt_source;
  };
  std::unordered_map<std::string, Pending> pending;
  std::vector<std::string> target_order;
  for (const auto& ann : annotations) {
    for (const auto& rw : ann.rewires) {
      if (!net.has_node(rw.target))
        fail(ErrorCode::UnknownRewireTarget,
             "annotation '" + ann.logical_id + "' rewires unknown node '" + rw.target + "'");
      auto [it, inserted] = pending.try_emplace(rw.target);
      if (inserted) target_order.push_back(rw.target);
      it->second.logical_parents.push_back(ann.logical_id);
      if (rw.cpt) {
        if (it->second.cpt)
          fail(ErrorCode::CptShapeMismatch,
               "node '" + rw.target + "' has replacement cpts from both '" +
                   it->second.cpt_source + "' and '" + ann.logical_id + "'");
        it->second.cpt = rw.cpt;
        it->second.cpt_source = ann.logical_id;
      }
    }
  }
  for (const auto& target : target_order)
    if (!pending[target].cpt)
      fail(ErrorCode::CptShapeMismatch,
           "rewired node '" + target + "' has no replacement cpt");

  std::vector<NodeSpec> nodes = net.nodes();
  for (auto& n : nodes) {
    auto it = pending.find(n.id);
    if (it == pending.end()) continue;
    for (const auto& lp : it->second.logical_parents) n.parents.push_back(lp);
    n.cpt = *it->second.cpt;
  }
  for (const auto& ann : annotations) {
    NodeSpec root;
    root.id = ann.logical_id;
    root.states = ann.states;
    root.cpt.rows.assign(1, ann.prior);
    nodes.push_back(std::move(root));
  }
  // Logical nodes are roots, so the graph stays acyclic; validate still
  // checks every other invariant (prior normalization, replacement shapes).
  return Network::validate(std::move(nodes));
}

// Full TDT rewrite: insert the logical nodes, then make the original
// decision node a deterministic copy of the self logical node, dropping all
// of its other parents.
inline TransformedProblem apply_tdt(const Network& net, const std::string& decision_node,
                                    const std::vector<LogicalAnnotation>& annotations) {
  const LogicalAnnotation* self = nullptr;
  for (const auto& ann : annotations) {
    if (!ann.is_self_decision) continue;
    if (self)
      fail(ErrorCode::MultipleSelfAnnotations,
           "both '" + self->logical_id + "' and '" + ann.logical_id +
               "' claim to be the self decision");
    self = &ann;
  }
  if (!self)
    fail(ErrorCode::MissingSelfAnnotation, "no annotation has is_self_decision set");

  const NodeSpec& decision = net.node(decision_node);
  if (self->states != decision.states)
    fail(ErrorCode::StateMismatch,
         "self logical node '" + self->logical_id +
             "' must carry the decision node's states in the same order");

  Network inserted = insert_logical_nodes(net, annotations);

  std::vector<NodeSpec> nodes = inserted.nodes();
  const std::size_t di = inserted.index_of(decision_node);
  nodes[di].parents = {self->logical_id};
  nodes[di].cpt.rows.clear();
  for (std::size_t s = 0; s < decision.states.size(); ++s) {
    std::vector<double> row(decision.states.size(), 0.0);
    row[s] = 1.0;
    nodes[di].cpt.rows.push_back(std::move(row));
  }

  return TransformedProblem{Network::validate(std::move(nodes)), self->logical_id,
                            decision_node};
}

}  // namespace newcomb
