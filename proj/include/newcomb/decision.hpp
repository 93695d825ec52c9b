#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "newcomb/bayes_net.hpp"
#include "newcomb/error.hpp"
#include "newcomb/tdt.hpp"

namespace newcomb {

enum class Theory { Edt, Cdt, Tdt };

inline const char* to_string(Theory t) {
  switch (t) {
    case Theory::Edt: return "edt";
    case Theory::Cdt: return "cdt";
    case Theory::Tdt: return "tdt";
  }
  return "?";
}

inline Theory parse_theory(const std::string& s) {
  if (s == "edt" || s == "EDT") return Theory::Edt;
  if (s == "cdt" || s == "CDT") return Theory::Cdt;
  if (s == "tdt" || s == "TDT") return Theory::Tdt;
  throw std::invalid_argument("unknown theory '" + s + "' (expected edt, cdt or tdt)");
}

// Utility over the joint states of an explicit node subset. Values are flat,
// mixed-radix over the scope's state counts, first scope node most
// significant (the same convention as CPT rows). The scope may include the
// decision node, which is how action-dependent utilities are expressed.
struct UtilityTable {
  std::vector<std::string> scope;
  std::vector<double> values;

  bool operator==(const UtilityTable&) const = default;
};

struct DecisionProblem {
  Network net;
  std::string decision_node;
  UtilityTable utility;
  std::vector<LogicalAnnotation> annotations;
};

// How the evaluated network differs from the scenario's network: which node
// the per-action surgery applies to, which parent edges it lost, and what
// the logical rewrite added or replaced.
struct TransformSummary {
  Theory theory = Theory::Edt;
  std::string queried_decision;
  std::vector<std::string> severed_parents;
  std::vector<std::string> logical_nodes;
  std::vector<std::string> rewired_targets;
};

struct DecisionReport {
  Theory theory = Theory::Edt;
  std::string chosen;
  std::vector<std::pair<std::string, double>> eus;  // declared action order
  TransformSummary transformed;
};

namespace detail {

inline void check_problem(const DecisionProblem& p) {
  const NodeSpec& d = p.net.node(p.decision_node);  // UnknownNode if absent
  if (d.states.size() < 1) fail(ErrorCode::SchemaError, "decision node has no states");
  std::vector<std::size_t> radices;
  for (const auto& id : p.utility.scope) radices.push_back(p.net.node(id).states.size());
  const std::size_t want = radix_product(radices);
  if (p.utility.values.size() != want)
    fail(ErrorCode::SchemaError,
         "utility table has " + std::to_string(p.utility.values.size()) +
             " values, expected " + std::to_string(want));
  for (double v : p.utility.values)
    if (!std::isfinite(v)) fail(ErrorCode::SchemaError, "utility value is not finite");
}

// Sum of U(v) * P(v) over the utility scope, in flat scope order.
inline double utility_expectation(const UtilityTable& u, const Distribution& dist) {
  double eu = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) eu += u.values[i] * dist.at(i);
  return eu;
}

}  // namespace detail

// Expected utility of one action under one theory.
//   EDT: condition the unmodified network on {decision = action}.
//   CDT: intervene on the decision node, then query unconditionally.
//   TDT: apply the logical rewrite, then CDT surgery on the logical node.
inline double expected_utility(const DecisionProblem& p, Theory theory,
                               const std::string& action) {
  detail::check_problem(p);
  switch (theory) {
    case Theory::Edt: {
      Distribution prior = query(p.net, {p.decision_node}, {});
      const std::size_t a = p.net.state_index(p.decision_node, action);
      if (prior.at(a) == 0.0)
        fail(ErrorCode::ImpossibleAction,
             "action '" + action + "' has prior probability 0; conditioning on it "
             "is undefined");
      Assignment ev;
      ev.set(p.decision_node, action);
      return detail::utility_expectation(p.utility, query(p.net, p.utility.scope, ev));
    }
    case Theory::Cdt: {
      Network cut = intervene(p.net, p.decision_node, action);
      return detail::utility_expectation(p.utility, query(cut, p.utility.scope, {}));
    }
    case Theory::Tdt: {
      if (p.annotations.empty())
        fail(ErrorCode::MissingAnnotations,
             "tdt needs logical annotations (none declared)");
      TransformedProblem t = apply_tdt(p.net, p.decision_node, p.annotations);
      Network cut = intervene(t.net, t.logical_decision, action);
      return detail::utility_expectation(p.utility, query(cut, p.utility.scope, {}));
    }
  }
  throw std::logic_error("unreachable theory");
}

inline TransformedProblem apply_tdt(const DecisionProblem& p) {
  return apply_tdt(p.net, p.decision_node, p.annotations);
}

// Evaluates every action and picks the maximizer; ties go to the earliest
// action in declared state order.
inline DecisionReport decide(const DecisionProblem& p, Theory theory) {
  detail::check_problem(p);
  DecisionReport report;
  report.theory = theory;
  report.transformed.theory = theory;
  report.transformed.queried_decision = p.decision_node;

  const std::vector<std::string>& actions = p.net.node(p.decision_node).states;
  for (const auto& action : actions)
    report.eus.emplace_back(action, expected_utility(p, theory, action));

  std::size_t best = 0;
  for (std::size_t i = 1; i < report.eus.size(); ++i)
    if (report.eus[i].second > report.eus[best].second) best = i;
  report.chosen = report.eus[best].first;

  switch (theory) {
    case Theory::Edt:
      break;  // conditioning only, nothing structural changes
    case Theory::Cdt:
      report.transformed.severed_parents = p.net.node(p.decision_node).parents;
      break;
    case Theory::Tdt: {
      TransformedProblem t = apply_tdt(p);
      report.transformed.queried_decision = t.logical_decision;
      report.transformed.severed_parents = p.net.node(p.decision_node).parents;
      for (const auto& ann : p.annotations)
        report.transformed.logical_nodes.push_back(ann.logical_id);
      std::vector<std::string> rewired;
      for (const auto& ann : p.annotations)
        for (const auto& rw : ann.rewires)
          if (std::find(rewired.begin(), rewired.end(), rw.target) == rewired.end())
            rewired.push_back(rw.target);
      if (std::find(rewired.begin(), rewired.end(), p.decision_node) == rewired.end())
        rewired.push_back(p.decision_node);
      report.transformed.rewired_targets = std::move(rewired);
      break;
    }
  }
  return report;
}

}  // namespace newcomb
