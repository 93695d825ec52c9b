#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "newcomb/bayes_net.hpp"
#include "newcomb/decision.hpp"
#include "newcomb/error.hpp"
#include "newcomb/tdt.hpp"

namespace newcomb {

// A scenario document: the parsed form of the JSON interchange format, and
// the value every built-in constructor returns. `decision` and `utility`
// are only present for decision problems; bare networks (the calculators)
// leave them empty.
struct ScenarioDoc {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::optional<std::string> decision;
  std::optional<UtilityTable> utility;
  std::vector<LogicalAnnotation> logical;

  bool operator==(const ScenarioDoc&) const = default;
};

inline Network to_network(const ScenarioDoc& doc) { return Network::validate(doc.nodes); }

// The network with the document's logical annotations materialized. This is
// the belief network a reader of the document actually holds, so queries run
// against it by default.
inline Network to_network_with_logical(const ScenarioDoc& doc) {
  return insert_logical_nodes(to_network(doc), doc.logical);
}

inline DecisionProblem to_problem(const ScenarioDoc& doc) {
  if (!doc.decision || !doc.utility)
    fail(ErrorCode::SchemaError,
         "scenario '" + doc.name + "' has no decision node / utility table");
  return DecisionProblem{to_network(doc), *doc.decision, *doc.utility, doc.logical};
}

// ---------------------------------------------------------------------------
// Built-in scenario constructors
// ---------------------------------------------------------------------------

namespace detail {

inline void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0))
    fail(ErrorCode::InvalidProbability, what + " = " + std::to_string(p) + " outside [0, 1]");
}

inline void check_prob_vector(const std::vector<double>& v, const std::string& what) {
  if (v.empty()) fail(ErrorCode::InvalidProbability, what + " is empty");
  for (double p : v) check_prob(p, what + " entry");
}

inline void check_prior(const std::vector<double>& v, const std::string& what) {
  check_prob_vector(v, what);
  double sum = 0.0;
  for (double p : v) sum += p;
  if (std::abs(sum - 1.0) > kRowTolerance)
    fail(ErrorCode::InvalidProbability, what + " sums to " + std::to_string(sum));
}

inline Cpt binary_rows(const std::vector<double>& p_first) {
  Cpt c;
  for (double p : p_first) c.rows.push_back({p, 1.0 - p});
  return c;
}

}  // namespace detail

// Medical-Newcomb problem: an unobserved infection raises both the chance of
// adoring cats and the chance of the bad symptoms. Adoring cats is worth a
// small perk s; the symptoms cost the big harm B.
struct ToxoplasmosisParams {
  double p_t = 0.3;              // P(infected)
  double p_c_given_t = 0.6;      // P(adore | infected)
  double p_c_given_not_t = 0.2;  // P(adore | healthy)
  double p_n_given_t = 0.4;      // P(symptoms | infected)
  double p_n_given_not_t = 0.05; // P(symptoms | healthy)
  double harm = 100.0;           // B
  double perk = 1.0;             // s
};

inline ScenarioDoc make_toxoplasmosis(const ToxoplasmosisParams& p = {}) {
  detail::check_prob(p.p_t, "p_t");
  detail::check_prob(p.p_c_given_t, "p_c_given_t");
  detail::check_prob(p.p_c_given_not_t, "p_c_given_not_t");
  detail::check_prob(p.p_n_given_t, "p_n_given_t");
  detail::check_prob(p.p_n_given_not_t, "p_n_given_not_t");
  if (!std::isfinite(p.harm) || !std::isfinite(p.perk))
    fail(ErrorCode::InvalidProbability, "harm/perk must be finite");

  ScenarioDoc doc;
  doc.name = "toxoplasmosis";
  doc.nodes = {
      {"toxoplasmosis", {"infected", "healthy"}, {}, detail::binary_rows({p.p_t})},
      {"adore_cats", {"adore", "ignore"}, {"toxoplasmosis"},
       detail::binary_rows({p.p_c_given_t, p.p_c_given_not_t})},
      {"neg_effects", {"present", "absent"}, {"toxoplasmosis"},
       detail::binary_rows({p.p_n_given_t, p.p_n_given_not_t})},
  };
  doc.decision = "adore_cats";
  const double B = p.harm, s = p.perk;
  // scope order (neg_effects, adore_cats): present|adore, present|ignore,
  // absent|adore, absent|ignore.
  doc.utility = UtilityTable{{"neg_effects", "adore_cats"}, {-B + s, -B, s, 0.0}};
  return doc;
}

// Payoffs for the row player of the prisoner's dilemma; a valid instance
// needs u4 > u3 > u2 > u1.
struct PdUtilities {
  double u1 = 1.0;  // you cooperate, opponent defects
  double u2 = 2.0;  // both defect
  double u3 = 3.0;  // both cooperate
  double u4 = 4.0;  // you defect, opponent cooperates
};

// The shared ancestor of both players' decisions. Arity is the prior's
// length; a 1-state node expresses "no common cause".
struct CommonCauseSpec {
  std::vector<double> prior{0.5, 0.5};
  std::vector<double> p_you_cooperate{0.9, 0.1};
  std::vector<double> p_opp_cooperate{0.9, 0.1};
};

namespace detail {

inline void check_pd_ordering(const PdUtilities& u) {
  if (!(u.u4 > u.u3 && u.u3 > u.u2 && u.u2 > u.u1))
    fail(ErrorCode::OrderingViolated,
         "need u4 > u3 > u2 > u1, got u1=" + std::to_string(u.u1) +
             " u2=" + std::to_string(u.u2) + " u3=" + std::to_string(u.u3) +
             " u4=" + std::to_string(u.u4));
}

inline void check_common_cause(const CommonCauseSpec& cc) {
  check_prior(cc.prior, "common-cause prior");
  check_prob_vector(cc.p_you_cooperate, "p_you_cooperate");
  check_prob_vector(cc.p_opp_cooperate, "p_opp_cooperate");
  if (cc.p_you_cooperate.size() != cc.prior.size() ||
      cc.p_opp_cooperate.size() != cc.prior.size())
    fail(ErrorCode::InvalidProbability,
         "common-cause vectors must all have the prior's length");
}

inline std::vector<std::string> cause_state_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("cc" + std::to_string(i));
  return names;
}

inline UtilityTable pd_utility(const PdUtilities& u) {
  // scope order (your_decision, opponent_decision): C|C, C|D, D|C, D|D.
  return UtilityTable{{"your_decision", "opponent_decision"}, {u.u3, u.u1, u.u4, u.u2}};
}

}  // namespace detail

inline ScenarioDoc make_prisoners_dilemma(const PdUtilities& u = {},
                                          const CommonCauseSpec& cc = {}) {
  detail::check_pd_ordering(u);
  detail::check_common_cause(cc);

  ScenarioDoc doc;
  doc.name = "pd";
  Cpt cause;
  cause.rows.assign(1, cc.prior);
  doc.nodes = {
      {"common_causes", detail::cause_state_names(cc.prior.size()), {}, cause},
      {"your_decision", {"C", "D"}, {"common_causes"},
       detail::binary_rows(cc.p_you_cooperate)},
      {"opponent_decision", {"C", "D"}, {"common_causes"},
       detail::binary_rows(cc.p_opp_cooperate)},
  };
  doc.decision = "your_decision";
  doc.utility = detail::pd_utility(u);
  return doc;
}

enum class CalculatorVariant { Naive, Physical, Logical };

inline CalculatorVariant parse_calculator_variant(const std::string& s) {
  if (s == "naive") return CalculatorVariant::Naive;
  if (s == "physical") return CalculatorVariant::Physical;
  if (s == "logical") return CalculatorVariant::Logical;
  throw std::invalid_argument("unknown variant '" + s + "' (expected naive, physical or logical)");
}

// Two causally isolated machines set up to compute the same product; the
// modeled quantity is the parity of one digit of their outputs.
struct CalculatorParams {
  std::vector<double> correlation_prior{0.5, 0.5};
  std::vector<double> p_maya_mult{0.9, 0.6};   // P(state = mult | correlation)
  std::vector<double> p_china_mult{0.8, 0.55};
  double p_even_given_mult = 0.5;    // belief about the digit, physical variant
  double p_even_given_broken = 0.5;  // belief about a malfunctioning machine's digit
  std::vector<double> digit_prior{0.5, 0.5};  // logical node prior over even/odd
};

inline ScenarioDoc make_calculators(CalculatorVariant variant,
                                    const CalculatorParams& p = {}) {
  ScenarioDoc doc;
  if (variant == CalculatorVariant::Naive) {
    doc.name = "calculators-naive";
    detail::check_prior(p.digit_prior, "digit prior");
    if (p.digit_prior.size() != 2)
      fail(ErrorCode::InvalidProbability, "digit prior must cover even/odd");
    Cpt out;
    out.rows.assign(1, p.digit_prior);
    doc.nodes = {
        {"maya_out", {"even", "odd"}, {}, out},
        {"china_out", {"even", "odd"}, {}, out},
    };
    return doc;
  }

  detail::check_prior(p.correlation_prior, "correlation prior");
  detail::check_prob_vector(p.p_maya_mult, "p_maya_mult");
  detail::check_prob_vector(p.p_china_mult, "p_china_mult");
  detail::check_prob(p.p_even_given_mult, "p_even_given_mult");
  detail::check_prob(p.p_even_given_broken, "p_even_given_broken");
  detail::check_prior(p.digit_prior, "digit prior");
  if (p.p_maya_mult.size() != p.correlation_prior.size() ||
      p.p_china_mult.size() != p.correlation_prior.size())
    fail(ErrorCode::InvalidProbability,
         "per-correlation vectors must match the correlation prior's length");
  if (p.digit_prior.size() != 2)
    fail(ErrorCode::InvalidProbability, "digit prior must cover even/odd");

  Cpt corr;
  corr.rows.assign(1, p.correlation_prior);
  Cpt out_given_state;
  out_given_state.rows = {{p.p_even_given_mult, 1.0 - p.p_even_given_mult},
                          {p.p_even_given_broken, 1.0 - p.p_even_given_broken}};
  doc.nodes = {
      {"correlation", detail::cause_state_names(p.correlation_prior.size()), {}, corr},
      {"maya_state", {"mult", "broken"}, {"correlation"},
       detail::binary_rows(p.p_maya_mult)},
      {"china_state", {"mult", "broken"}, {"correlation"},
       detail::binary_rows(p.p_china_mult)},
      {"maya_out", {"even", "odd"}, {"maya_state"}, out_given_state},
      {"china_out", {"even", "odd"}, {"china_state"}, out_given_state},
  };

  if (variant == CalculatorVariant::Physical) {
    doc.name = "calculators-physical";
    return doc;
  }

  doc.name = "calculators-logical";
  // A working machine copies the abstract digit; a broken one keeps the
  // physical-variant belief. Parent order: (own state, product_parity).
  Cpt copy_when_mult;
  copy_when_mult.rows = {{1.0, 0.0},
                         {0.0, 1.0},
                         {p.p_even_given_broken, 1.0 - p.p_even_given_broken},
                         {p.p_even_given_broken, 1.0 - p.p_even_given_broken}};
  LogicalAnnotation digit;
  digit.logical_id = "product_parity";
  digit.states = {"even", "odd"};
  digit.prior = p.digit_prior;
  digit.rewires = {{"maya_out", copy_when_mult}, {"china_out", copy_when_mult}};
  doc.logical = {digit};
  return doc;
}

// Prisoner's dilemma against an opponent that runs this same decision
// algorithm with probability p_opponent_uses_tdt, and some other fixed
// algorithm otherwise. The annotations declare both algorithm-output nodes;
// evidential and causal evaluation ignore them and see the plain network.
struct TdtPdParams {
  PdUtilities u{};
  double p_opponent_uses_tdt = 1.0;
  std::vector<double> not_tdt_prior{0.5, 0.5};  // over (C_n, D_n)
  CommonCauseSpec cc{{1.0}, {0.5}, {0.5}};
};

inline ScenarioDoc make_tdt_prisoners_dilemma(const TdtPdParams& p = {}) {
  detail::check_pd_ordering(p.u);
  detail::check_common_cause(p.cc);
  detail::check_prob(p.p_opponent_uses_tdt, "p_opponent_uses_tdt");
  detail::check_prior(p.not_tdt_prior, "not_tdt prior");
  if (p.not_tdt_prior.size() != 2)
    fail(ErrorCode::InvalidProbability, "not_tdt prior must cover (C_n, D_n)");

  ScenarioDoc doc = make_prisoners_dilemma(p.u, p.cc);
  doc.name = "tdt-pd";

  // Opponent's decision becomes the declared mixture over which algorithm
  // they run. Augmented parent order: (common_causes, tdt, not_tdt).
  const double w = p.p_opponent_uses_tdt;
  Cpt mixture;
  for (std::size_t c = 0; c < p.cc.prior.size(); ++c)
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t n = 0; n < 2; ++n) {
        const double p_coop = w * (t == 0 ? 1.0 : 0.0) + (1.0 - w) * (n == 0 ? 1.0 : 0.0);
        mixture.rows.push_back({p_coop, 1.0 - p_coop});
      }

  LogicalAnnotation self;
  self.logical_id = "tdt";
  self.states = {"C", "D"};
  self.prior = {0.5, 0.5};
  self.is_self_decision = true;
  self.rewires = {{"opponent_decision", std::nullopt}};

  LogicalAnnotation other;
  other.logical_id = "not_tdt";
  other.states = {"C_n", "D_n"};
  other.prior = p.not_tdt_prior;
  other.rewires = {{"opponent_decision", mixture}};

  doc.logical = {self, other};
  return doc;
}

// ---------------------------------------------------------------------------
// JSON interchange format.
//
// {
//   "name": "...",
//   "nodes": [{"id", "states", "parents", "cpt"}...],   cpt row-major flat
//   "decision": "node",                                 optional
//   "utility": {"scope": [...], "table": {"a|b": u}},   optional
//   "logical": [{"id", "states", "prior", "self",
//                "rewires": [{"target", "cpt"?}]}]      optional
// }
//
// Parsing is strict: unknown fields anywhere are a SchemaError.
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::ordered_json;

[[noreturn]] inline void schema_fail(const std::string& where, const std::string& what) {
  fail(ErrorCode::SchemaError, where + ": " + what);
}

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) schema_fail(where, "unexpected field '" + item.key() + "'");
  }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(where, "missing field '" + std::string(key) + "'");
  return *it;
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_fail(where, "expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> as_string_array(const json& v, const std::string& where) {
  if (!v.is_array()) schema_fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) schema_fail(where, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::vector<double> as_number_array(const json& v, const std::string& where) {
  if (!v.is_array()) schema_fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) schema_fail(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::string join_key(const std::vector<std::string>& labels) {
  std::string key;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) key += '|';
    key += labels[i];
  }
  return key;
}

}  // namespace detail

inline ScenarioDoc parse_scenario(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorCode::SyntaxError,
         "line " + std::to_string(line) + ": " + std::string(e.what()));
  }
  if (!j.is_object()) fail(ErrorCode::SchemaError, "document: expected a JSON object");
  detail::check_keys(j, "document", {"name", "nodes", "decision", "utility", "logical"});

  ScenarioDoc doc;
  doc.name = detail::as_string(detail::require(j, "name", "document"), "name");

  const json& jnodes = detail::require(j, "nodes", "document");
  if (!jnodes.is_array()) detail::schema_fail("nodes", "expected an array");
  std::map<std::string, std::vector<std::string>> states_of;
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& jn = jnodes[i];
    if (!jn.is_object()) detail::schema_fail(where, "expected an object");
    detail::check_keys(jn, where, {"id", "states", "parents", "cpt"});
    NodeSpec n;
    n.id = detail::as_string(detail::require(jn, "id", where), where + ".id");
    n.states = detail::as_string_array(detail::require(jn, "states", where), where + ".states");
    if (n.states.empty()) detail::schema_fail(where + ".states", "must not be empty");
    if (jn.contains("parents"))
      n.parents = detail::as_string_array(jn["parents"], where + ".parents");
    std::vector<double> flat =
        detail::as_number_array(detail::require(jn, "cpt", where), where + ".cpt");
    if (states_of.count(n.id))
      fail(ErrorCode::DuplicateId, "node id '" + n.id + "' declared twice");
    states_of[n.id] = n.states;
    // Shape pre-check so the diagnostic names the node; validate() re-checks.
    n.cpt = Cpt::from_flat(flat, n.states.size());
    doc.nodes.push_back(std::move(n));
  }
  for (const auto& n : doc.nodes) {
    std::size_t want = n.states.size();
    bool known = true;
    for (const auto& p : n.parents) {
      auto it = states_of.find(p);
      if (it == states_of.end()) { known = false; break; }  // validate reports UnknownParent
      want *= it->second.size();
    }
    const std::size_t got = n.cpt.rows.size() * n.states.size();
    if (known && got != want)
      detail::schema_fail("node '" + n.id + "'", "cpt has " + std::to_string(got) +
                                                     " entries, expected " +
                                                     std::to_string(want));
  }

  if (j.contains("decision")) {
    doc.decision = detail::as_string(j["decision"], "decision");
    if (!states_of.count(*doc.decision))
      detail::schema_fail("decision", "unknown node '" + *doc.decision + "'");
    if (!j.contains("utility"))
      detail::schema_fail("document", "decision requires a utility table");
  }

  if (j.contains("utility")) {
    const json& ju = j["utility"];
    if (!ju.is_object()) detail::schema_fail("utility", "expected an object");
    detail::check_keys(ju, "utility", {"scope", "table"});
    UtilityTable u;
    u.scope = detail::as_string_array(detail::require(ju, "scope", "utility"), "utility.scope");
    if (u.scope.empty()) detail::schema_fail("utility.scope", "must not be empty");
    std::vector<std::vector<std::string>> scope_states;
    std::vector<std::size_t> radices;
    for (const auto& id : u.scope) {
      auto it = states_of.find(id);
      if (it == states_of.end())
        detail::schema_fail("utility.scope", "unknown node '" + id + "'");
      scope_states.push_back(it->second);
      radices.push_back(it->second.size());
    }
    const json& jt = detail::require(ju, "table", "utility");
    if (!jt.is_object()) detail::schema_fail("utility.table", "expected an object");
    const std::size_t total = radix_product(radices);
    u.values.resize(total);
    std::size_t seen = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      auto digits = radix_digits(flat, radices);
      std::vector<std::string> labels(digits.size());
      for (std::size_t k = 0; k < digits.size(); ++k) labels[k] = scope_states[k][digits[k]];
      const std::string key = detail::join_key(labels);
      auto it = jt.find(key);
      if (it == jt.end()) detail::schema_fail("utility.table", "missing entry '" + key + "'");
      if (!it->is_number()) detail::schema_fail("utility.table", "entry '" + key + "' must be a number");
      const double v = it->get<double>();
      if (!std::isfinite(v)) detail::schema_fail("utility.table", "entry '" + key + "' must be finite");
      u.values[flat] = v;
      ++seen;
    }
    if (jt.size() != seen)
      detail::schema_fail("utility.table", "has " + std::to_string(jt.size()) +
                                               " entries, expected " + std::to_string(seen));
    doc.utility = std::move(u);
  }

  if (j.contains("logical")) {
    const json& jl = j["logical"];
    if (!jl.is_array()) detail::schema_fail("logical", "expected an array");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const std::string where = "logical[" + std::to_string(i) + "]";
      const json& ja = jl[i];
      if (!ja.is_object()) detail::schema_fail(where, "expected an object");
      detail::check_keys(ja, where, {"id", "states", "prior", "self", "rewires"});
      LogicalAnnotation a;
      a.logical_id = detail::as_string(detail::require(ja, "id", where), where + ".id");
      a.states = detail::as_string_array(detail::require(ja, "states", where), where + ".states");
      a.prior = detail::as_number_array(detail::require(ja, "prior", where), where + ".prior");
      if (a.prior.size() != a.states.size())
        detail::schema_fail(where, "prior length must match states");
      if (ja.contains("self")) {
        if (!ja["self"].is_boolean()) detail::schema_fail(where + ".self", "expected a boolean");
        a.is_self_decision = ja["self"].get<bool>();
      }
      if (ja.contains("rewires")) {
        const json& jr = ja["rewires"];
        if (!jr.is_array()) detail::schema_fail(where + ".rewires", "expected an array");
        for (std::size_t r = 0; r < jr.size(); ++r) {
          const std::string rwhere = where + ".rewires[" + std::to_string(r) + "]";
          const json& je = jr[r];
          if (!je.is_object()) detail::schema_fail(rwhere, "expected an object");
          detail::check_keys(je, rwhere, {"target", "cpt"});
          LogicalRewire rw;
          rw.target = detail::as_string(detail::require(je, "target", rwhere), rwhere + ".target");
          auto it = states_of.find(rw.target);
          if (it == states_of.end())
            detail::schema_fail(rwhere, "unknown target '" + rw.target + "'");
          if (je.contains("cpt")) {
            std::vector<double> flat = detail::as_number_array(je["cpt"], rwhere + ".cpt");
            rw.cpt = Cpt::from_flat(flat, it->second.size());
          }
          a.rewires.push_back(std::move(rw));
        }
      }
      doc.logical.push_back(std::move(a));
    }
  }

  to_network(doc);  // propagate validation errors (cycles, bad rows, ...)
  return doc;
}

inline std::string serialize_scenario(const ScenarioDoc& doc) {
  using detail::json;
  json j;
  j["name"] = doc.name;
  j["nodes"] = json::array();
  for (const auto& n : doc.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["states"] = n.states;
    jn["parents"] = n.parents;
    jn["cpt"] = n.cpt.to_flat();
    j["nodes"].push_back(std::move(jn));
  }
  if (doc.decision) j["decision"] = *doc.decision;
  if (doc.utility) {
    json ju;
    ju["scope"] = doc.utility->scope;
    std::vector<std::vector<std::string>> scope_states;
    std::vector<std::size_t> radices;
    for (const auto& id : doc.utility->scope) {
      // Serialization presumes the scope resolves; parse/validate enforce it.
      for (const auto& n : doc.nodes)
        if (n.id == id) {
          scope_states.push_back(n.states);
          radices.push_back(n.states.size());
        }
    }
    json table = json::object();
    for (std::size_t flat = 0; flat < doc.utility->values.size(); ++flat) {
      auto digits = radix_digits(flat, radices);
      std::vector<std::string> labels(digits.size());
      for (std::size_t k = 0; k < digits.size(); ++k) labels[k] = scope_states[k][digits[k]];
      table[detail::join_key(labels)] = doc.utility->values[flat];
    }
    ju["table"] = std::move(table);
    j["utility"] = std::move(ju);
  }
  if (!doc.logical.empty()) {
    j["logical"] = json::array();
    for (const auto& a : doc.logical) {
      json ja;
      ja["id"] = a.logical_id;
      ja["states"] = a.states;
      ja["prior"] = a.prior;
      ja["self"] = a.is_self_decision;
      ja["rewires"] = json::array();
      for (const auto& rw : a.rewires) {
        json je;
        je["target"] = rw.target;
        if (rw.cpt) je["cpt"] = rw.cpt->to_flat();
        ja["rewires"].push_back(std::move(je));
      }
      j["logical"].push_back(std::move(ja));
    }
  }
  return j.dump(2) + "\n";
}

}  // namespace newcomb
