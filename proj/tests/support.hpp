#pragma once

// Test-side enumeration oracle and random-model generators. The oracle
// recomputes probabilities straight from the declared node specs with its
// own id map and row indexing, so it shares no code path with the library's
// query implementation.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "newcomb/bayes_net.hpp"
#include "newcomb/decision.hpp"
#include "newcomb/scenarios.hpp"

namespace oracle {

struct Model {
  std::vector<newcomb::NodeSpec> nodes;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::size_t> radices;

  explicit Model(const newcomb::Network& net) : nodes(net.nodes()) {
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].id] = i;
    parents.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const auto& p : nodes[i].parents) parents[i].push_back(index.at(p));
      radices.push_back(nodes[i].states.size());
    }
  }

  std::size_t total() const {
    std::size_t n = 1;
    for (std::size_t r : radices) n *= r;
    return n;
  }

  // Assignment decoding: flat index over declared node order, first node
  // most significant.
  std::vector<std::size_t> decode(std::size_t flat) const {
    std::vector<std::size_t> st(radices.size());
    for (std::size_t i = radices.size(); i-- > 0;) {
      st[i] = flat % radices[i];
      flat /= radices[i];
    }
    return st;
  }

  // P(full assignment): product of CPT entries in declared node order.
  double joint(const std::vector<std::size_t>& st) const {
    double p = 1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::size_t row = 0;
      for (std::size_t k = 0; k < parents[i].size(); ++k)
        row = row * radices[parents[i][k]] + st[parents[i][k]];
      p *= nodes[i].cpt.rows[row][st[i]];
    }
    return p;
  }

  std::size_t state_of(const std::string& id, const std::string& label) const {
    const auto& n = nodes[index.at(id)];
    for (std::size_t s = 0; s < n.states.size(); ++s)
      if (n.states[s] == label) return s;
    throw std::runtime_error("oracle: bad state label " + label);
  }
};

using Evidence = std::vector<std::pair<std::string, std::string>>;

// Unnormalized probability of the (possibly partial) evidence.
inline double event_prob(const newcomb::Network& net, const Evidence& evidence) {
  Model m(net);
  std::vector<std::optional<std::size_t>> want(m.nodes.size());
  for (const auto& [id, label] : evidence) want[m.index.at(id)] = m.state_of(id, label);
  double total = 0.0;
  for (std::size_t flat = 0; flat < m.total(); ++flat) {
    auto st = m.decode(flat);
    bool match = true;
    for (std::size_t i = 0; i < st.size() && match; ++i)
      if (want[i] && *want[i] != st[i]) match = false;
    if (match) total += m.joint(st);
  }
  return total;
}

// Conditional distribution over the targets' joint states (flat mixed-radix
// over target order, first target most significant), or nullopt when the
// evidence has zero probability.
inline std::optional<std::vector<double>> conditional(const newcomb::Network& net,
                                                      const std::vector<std::string>& targets,
                                                      const Evidence& evidence) {
  Model m(net);
  std::vector<std::size_t> tgt;
  std::vector<std::size_t> tgt_radix;
  for (const auto& t : targets) {
    tgt.push_back(m.index.at(t));
    tgt_radix.push_back(m.radices[m.index.at(t)]);
  }
  std::vector<std::optional<std::size_t>> want(m.nodes.size());
  for (const auto& [id, label] : evidence) want[m.index.at(id)] = m.state_of(id, label);

  std::size_t buckets = 1;
  for (std::size_t r : tgt_radix) buckets *= r;
  std::vector<double> accum(buckets, 0.0);
  for (std::size_t flat = 0; flat < m.total(); ++flat) {
    auto st = m.decode(flat);
    bool match = true;
    for (std::size_t i = 0; i < st.size() && match; ++i)
      if (want[i] && *want[i] != st[i]) match = false;
    if (!match) continue;
    std::size_t b = 0;
    for (std::size_t k = 0; k < tgt.size(); ++k) b = b * tgt_radix[k] + st[tgt[k]];
    accum[b] += m.joint(st);
  }
  double total = 0.0;
  for (double v : accum) total += v;
  if (total == 0.0) return std::nullopt;
  for (double& v : accum) v /= total;
  return accum;
}

}  // namespace oracle

namespace gen {

struct NetOptions {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 8;
  std::size_t min_states = 2;
  std::size_t max_states = 3;
  std::size_t max_parents = 3;
  double edge_prob = 0.4;
  double min_entry = 0.05;  // strictly positive rows keep all evidence possible
};

inline std::vector<double> random_row(std::mt19937& rng, std::size_t n, double min_entry) {
  std::uniform_real_distribution<double> u(min_entry, 1.0);
  std::vector<double> row(n);
  double sum = 0.0;
  for (double& v : row) {
    v = u(rng);
    sum += v;
  }
  for (double& v : row) v /= sum;
  return row;
}

inline newcomb::Network random_net(std::mt19937& rng, const NetOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> n_nodes(opt.min_nodes, opt.max_nodes);
  std::uniform_int_distribution<std::size_t> n_states(opt.min_states, opt.max_states);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t n = n_nodes(rng);

  std::vector<newcomb::NodeSpec> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    newcomb::NodeSpec spec;
    spec.id = "n" + std::to_string(i);
    const std::size_t k = n_states(rng);
    for (std::size_t s = 0; s < k; ++s) spec.states.push_back("s" + std::to_string(s));

    std::size_t rows = 1;
    for (std::size_t j = 0; j < i && spec.parents.size() < opt.max_parents; ++j) {
      if (coin(rng) < opt.edge_prob) {
        spec.parents.push_back(nodes[j].id);
        rows *= nodes[j].states.size();
      }
    }
    for (std::size_t r = 0; r < rows; ++r)
      spec.cpt.rows.push_back(random_row(rng, k, opt.min_entry));
    nodes.push_back(std::move(spec));
  }
  return newcomb::Network::validate(std::move(nodes));
}

// The five-node example topology: x2 depends on x1, x4 on x2, x5 on
// x1, x2 and x3. All nodes binary, rows strictly positive.
inline newcomb::Network example_topology(std::mt19937& rng) {
  auto rows = [&](std::size_t n_rows) {
    newcomb::Cpt c;
    for (std::size_t r = 0; r < n_rows; ++r) c.rows.push_back(random_row(rng, 2, 0.05));
    return c;
  };
  std::vector<std::string> b{"0", "1"};
  return newcomb::Network::validate({
      {"x1", b, {}, rows(1)},
      {"x2", b, {"x1"}, rows(2)},
      {"x3", b, {}, rows(1)},
      {"x4", b, {"x2"}, rows(2)},
      {"x5", b, {"x1", "x2", "x3"}, rows(8)},
  });
}

// A decision problem over a random network: random decision node, random
// utility scope including the decision node, finite utilities. When
// with_self_annotation is set, a pass-through self logical node is attached
// (no other rewires), which is the conservativity setting.
inline newcomb::DecisionProblem random_problem(std::mt19937& rng, bool with_self_annotation) {
  newcomb::Network net = random_net(rng, {3, 6, 2, 3, 2, 0.5, 0.05});
  std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
  const std::size_t di = pick(rng);
  const std::string decision = net.nodes()[di].id;

  std::vector<std::string> scope{decision};
  for (int tries = 0; tries < 2; ++tries) {
    const std::string extra = net.nodes()[pick(rng)].id;
    bool dup = false;
    for (const auto& s : scope) dup |= s == extra;
    if (!dup) scope.push_back(extra);
  }
  std::vector<std::size_t> radices;
  for (const auto& id : scope) radices.push_back(net.node(id).states.size());
  std::uniform_real_distribution<double> uval(-10.0, 10.0);
  std::vector<double> values(newcomb::radix_product(radices));
  for (double& v : values) v = uval(rng);

  newcomb::DecisionProblem p{std::move(net), decision,
                             newcomb::UtilityTable{scope, std::move(values)}, {}};
  if (with_self_annotation) {
    newcomb::LogicalAnnotation self;
    self.logical_id = "self_logic";
    self.states = p.net.node(decision).states;
    self.prior = std::vector<double>(self.states.size(), 1.0 / self.states.size());
    self.is_self_decision = true;
    p.annotations.push_back(std::move(self));
  }
  return p;
}

}  // namespace gen

namespace hand {

// Toxoplasmosis conditionals computed by direct arithmetic over the three
// CPTs (no network machinery).
struct Toxo {
  double p_c;
  double p_n_given_c;
  double p_n_given_not_c;
  double p_n;
};

inline Toxo toxo(const newcomb::ToxoplasmosisParams& p) {
  Toxo h{};
  h.p_c = p.p_t * p.p_c_given_t + (1.0 - p.p_t) * p.p_c_given_not_t;
  h.p_n_given_c = (p.p_t * p.p_c_given_t * p.p_n_given_t +
                   (1.0 - p.p_t) * p.p_c_given_not_t * p.p_n_given_not_t) /
                  h.p_c;
  h.p_n_given_not_c = (p.p_t * (1.0 - p.p_c_given_t) * p.p_n_given_t +
                       (1.0 - p.p_t) * (1.0 - p.p_c_given_not_t) * p.p_n_given_not_t) /
                      (1.0 - h.p_c);
  h.p_n = p.p_t * p.p_n_given_t + (1.0 - p.p_t) * p.p_n_given_not_t;
  return h;
}

inline double pd_opponent_cooperates(const newcomb::CommonCauseSpec& cc) {
  double p = 0.0;
  for (std::size_t k = 0; k < cc.prior.size(); ++k) p += cc.prior[k] * cc.p_opp_cooperate[k];
  return p;
}

// Expected utilities of the mixture-opponent dilemma, expanded by hand:
// the opponent cooperates with probability w when the shared algorithm
// outputs C, plus (1 - w) times the other algorithm's own chance of C.
struct MixtureEu {
  double cooperate;
  double defect;
};

inline MixtureEu tdt_pd(const newcomb::PdUtilities& u, double w, double p_other_cooperates) {
  const double pn = p_other_cooperates;
  auto p_coop_given = [&](bool you_cooperate, bool other_cooperates) {
    return w * (you_cooperate ? 1.0 : 0.0) + (1.0 - w) * (other_cooperates ? 1.0 : 0.0);
  };
  MixtureEu eu{};
  const double pc_c = p_coop_given(true, true) * pn + p_coop_given(true, false) * (1.0 - pn);
  const double pc_d = p_coop_given(false, true) * pn + p_coop_given(false, false) * (1.0 - pn);
  eu.cooperate = pc_c * u.u3 + (1.0 - pc_c) * u.u1;
  eu.defect = pc_d * u.u4 + (1.0 - pc_d) * u.u2;
  return eu;
}

}  // namespace hand
