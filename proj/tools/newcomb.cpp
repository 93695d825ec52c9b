// newcomb: run decision theories over causal Bayesian networks, issue raw
// queries, and explain the network transformation each theory applies.
//
// Exit codes: 0 success, 2 scenario/validation error, 3 impossible
// evidence or action, 4 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "newcomb/bayes_net.hpp"
#include "newcomb/decision.hpp"
#include "newcomb/dot.hpp"
#include "newcomb/error.hpp"
#include "newcomb/scenarios.hpp"
#include "newcomb/tdt.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace newcomb;

bool color_enabled() {
  return isatty(fileno(stdout)) && std::getenv("NEWCOMB_NO_COLOR") == nullptr;
}

std::string bold_green(const std::string& s) {
  if (!color_enabled()) return s;
  return "\x1b[1;32m" + s + "\x1b[0m";
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("");
    } catch (...) {
      throw std::invalid_argument(flag + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty list");
  return out;
}

std::vector<std::string> parse_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Assignment parse_evidence(const std::string& s) {
  Assignment a;
  if (s.empty()) return a;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw std::invalid_argument("--evidence: expected id=state, got '" + item + "'");
    a.set(item.substr(0, eq), item.substr(eq + 1));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Scenario source: a file or a named built-in with flat parameter flags.
// ---------------------------------------------------------------------------

struct ScenarioOptions {
  std::string file;
  std::string builtin;

  // toxoplasmosis
  ToxoplasmosisParams toxo;

  // pd / tdt-pd
  std::string u = "1,2,3,4";
  std::string cc_prior;
  std::string cc_you;
  std::string cc_opp;
  double p_tdt = 1.0;
  std::string not_tdt_prior = "0.5,0.5";

  // calculators
  std::string variant = "naive";
  std::string corr_prior = "0.5,0.5";
  std::string maya_mult = "0.9,0.6";
  std::string china_mult = "0.8,0.55";
  double p_even_mult = 0.5;
  double p_even_broken = 0.5;
  std::string digit_prior = "0.5,0.5";
};

void add_scenario_options(CLI::App* cmd, ScenarioOptions& o) {
  auto* file = cmd->add_option("--file", o.file, "scenario JSON file");
  auto* builtin =
      cmd->add_option("--builtin", o.builtin,
                      "built-in scenario: toxoplasmosis, pd, tdt-pd, calculators");
  file->excludes(builtin);
  builtin->excludes(file);

  cmd->add_option("--p-t", o.toxo.p_t, "P(infected)")->capture_default_str();
  cmd->add_option("--p-c-given-t", o.toxo.p_c_given_t, "P(adore | infected)")
      ->capture_default_str();
  cmd->add_option("--p-c-given-not-t", o.toxo.p_c_given_not_t, "P(adore | healthy)")
      ->capture_default_str();
  cmd->add_option("--p-n-given-t", o.toxo.p_n_given_t, "P(symptoms | infected)")
      ->capture_default_str();
  cmd->add_option("--p-n-given-not-t", o.toxo.p_n_given_not_t, "P(symptoms | healthy)")
      ->capture_default_str();
  cmd->add_option("--B,--harm", o.toxo.harm, "symptom disutility B")->capture_default_str();
  cmd->add_option("--s,--perk", o.toxo.perk, "cat-adoring utility s")->capture_default_str();

  cmd->add_option("--u", o.u, "payoffs u1,u2,u3,u4")->capture_default_str();
  cmd->add_option("--cc-prior", o.cc_prior, "common-cause prior (comma list)");
  cmd->add_option("--cc-you", o.cc_you, "P(you cooperate | cause), per cause state");
  cmd->add_option("--cc-opp", o.cc_opp, "P(opponent cooperates | cause), per cause state");
  cmd->add_option("--p-tdt", o.p_tdt, "P(opponent runs tdt)")->capture_default_str();
  cmd->add_option("--not-tdt-prior", o.not_tdt_prior, "prior over the other algorithm's output")
      ->capture_default_str();

  cmd->add_option("--variant", o.variant, "calculators variant: naive, physical, logical")
      ->capture_default_str();
  cmd->add_option("--corr-prior", o.corr_prior, "correlation prior")->capture_default_str();
  cmd->add_option("--maya-mult", o.maya_mult, "P(maya_state = mult | correlation)")
      ->capture_default_str();
  cmd->add_option("--china-mult", o.china_mult, "P(china_state = mult | correlation)")
      ->capture_default_str();
  cmd->add_option("--p-even-mult", o.p_even_mult, "P(even | mult), physical variant")
      ->capture_default_str();
  cmd->add_option("--p-even-broken", o.p_even_broken, "P(even | broken)")
      ->capture_default_str();
  cmd->add_option("--digit-prior", o.digit_prior, "prior over even,odd")
      ->capture_default_str();
}

ScenarioDoc load_scenario(const ScenarioOptions& o) {
  if (!o.file.empty()) {
    std::ifstream in(o.file);
    if (!in) throw std::runtime_error("cannot read scenario file '" + o.file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
  }
  if (o.builtin.empty())
    throw std::invalid_argument("one of --file or --builtin is required");

  if (o.builtin == "toxoplasmosis") return make_toxoplasmosis(o.toxo);

  if (o.builtin == "pd" || o.builtin == "tdt-pd") {
    auto uv = parse_doubles(o.u, "--u");
    if (uv.size() != 4) throw std::invalid_argument("--u: expected u1,u2,u3,u4");
    PdUtilities u{uv[0], uv[1], uv[2], uv[3]};
    if (o.builtin == "pd") {
      CommonCauseSpec cc;
      if (!o.cc_prior.empty()) cc.prior = parse_doubles(o.cc_prior, "--cc-prior");
      if (!o.cc_you.empty()) cc.p_you_cooperate = parse_doubles(o.cc_you, "--cc-you");
      if (!o.cc_opp.empty()) cc.p_opp_cooperate = parse_doubles(o.cc_opp, "--cc-opp");
      return make_prisoners_dilemma(u, cc);
    }
    TdtPdParams t;
    t.u = u;
    t.p_opponent_uses_tdt = o.p_tdt;
    t.not_tdt_prior = parse_doubles(o.not_tdt_prior, "--not-tdt-prior");
    if (!o.cc_prior.empty()) t.cc.prior = parse_doubles(o.cc_prior, "--cc-prior");
    if (!o.cc_you.empty()) t.cc.p_you_cooperate = parse_doubles(o.cc_you, "--cc-you");
    if (!o.cc_opp.empty()) t.cc.p_opp_cooperate = parse_doubles(o.cc_opp, "--cc-opp");
    return make_tdt_prisoners_dilemma(t);
  }

  if (o.builtin == "calculators") {
    CalculatorParams c;
    c.correlation_prior = parse_doubles(o.corr_prior, "--corr-prior");
    c.p_maya_mult = parse_doubles(o.maya_mult, "--maya-mult");
    c.p_china_mult = parse_doubles(o.china_mult, "--china-mult");
    c.p_even_given_mult = o.p_even_mult;
    c.p_even_given_broken = o.p_even_broken;
    c.digit_prior = parse_doubles(o.digit_prior, "--digit-prior");
    return make_calculators(parse_calculator_variant(o.variant), c);
  }

  throw std::invalid_argument("unknown builtin '" + o.builtin +
                              "' (expected toxoplasmosis, pd, tdt-pd or calculators)");
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

json summary_json(const TransformSummary& s) {
  json j;
  j["queried_decision"] = s.queried_decision;
  j["severed_parents"] = s.severed_parents;
  j["logical_nodes"] = s.logical_nodes;
  j["rewired_targets"] = s.rewired_targets;
  return j;
}

json structure_json(const Network& net) {
  json nodes = json::array();
  for (const auto& n : net.nodes()) {
    json jn;
    jn["id"] = n.id;
    jn["states"] = n.states;
    jn["parents"] = n.parents;
    nodes.push_back(std::move(jn));
  }
  json j;
  j["nodes"] = std::move(nodes);
  return j;
}

void print_structure(std::ostream& os, const Network& net) {
  for (const auto& n : net.nodes()) {
    os << "  " << n.id << " [";
    for (std::size_t i = 0; i < n.states.size(); ++i) os << (i ? " " : "") << n.states[i];
    os << "]";
    if (!n.parents.empty()) {
      os << " <- ";
      for (std::size_t i = 0; i < n.parents.size(); ++i)
        os << (i ? ", " : "") << n.parents[i];
    }
    os << "\n";
  }
}

int run_decide(const ScenarioOptions& so, const std::string& theory_name, bool as_json) {
  ScenarioDoc doc = load_scenario(so);
  Theory theory = parse_theory(theory_name);
  DecisionReport report = decide(to_problem(doc), theory);

  if (as_json) {
    json j;
    j["theory"] = to_string(report.theory);
    j["chosen"] = report.chosen;
    json eus = json::object();
    for (const auto& [action, eu] : report.eus) eus[action] = eu;
    j["eus"] = std::move(eus);
    j["transform_summary"] = summary_json(report.transformed);
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << "scenario: " << doc.name << "\n";
  std::cout << "theory:   " << to_string(report.theory) << "\n";
  std::size_t width = 6;
  for (const auto& [action, _] : report.eus) width = std::max(width, action.size());
  std::cout << "  " << std::string(width + 2, ' ') << "expected utility\n";
  for (const auto& [action, eu] : report.eus) {
    const bool is_chosen = action == report.chosen;
    std::cout << (is_chosen ? "> " : "  ") << action
              << std::string(width + 2 - action.size(), ' ') << fmt6(eu) << "\n";
  }
  std::cout << "chosen: " << bold_green(report.chosen) << "\n";
  return 0;
}

int run_query(const ScenarioOptions& so, const std::string& targets_csv,
              const std::string& evidence_csv, bool base_only, bool as_json) {
  ScenarioDoc doc = load_scenario(so);
  Network net = base_only ? to_network(doc) : to_network_with_logical(doc);
  std::vector<std::string> targets = parse_names(targets_csv);
  Assignment evidence = parse_evidence(evidence_csv);
  Distribution dist = query(net, targets, evidence);

  if (as_json) {
    json j;
    j["targets"] = dist.targets();
    json probs = json::object();
    for (std::size_t i = 0; i < dist.size(); ++i) probs[dist.key_of(i)] = dist.at(i);
    j["probabilities"] = std::move(probs);
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << "P(";
  for (std::size_t i = 0; i < dist.targets().size(); ++i)
    std::cout << (i ? ", " : "") << dist.targets()[i];
  if (!evidence.bindings.empty()) {
    std::cout << " | ";
    bool first = true;
    for (const auto& [id, state] : evidence.bindings) {
      std::cout << (first ? "" : ", ") << id << "=" << state;
      first = false;
    }
  }
  std::cout << ")\n";
  std::size_t width = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) width = std::max(width, dist.key_of(i).size());
  for (std::size_t i = 0; i < dist.size(); ++i)
    std::cout << "  " << dist.key_of(i) << std::string(width + 2 - dist.key_of(i).size(), ' ')
              << fmt6(dist.at(i)) << "\n";
  return 0;
}

// The structural stages of cmd_explain. The transformed stage is a real
// network: for CDT the decision node is shown clamped (value chosen per
// action at evaluation time), for TDT the logical rewrite is applied in
// full when the scenario designates a decision, or the logical insertion
// alone when it does not (bare networks like the calculators).
struct ExplainStages {
  Network original;
  Network transformed;
  TransformSummary summary;
};

ExplainStages build_stages(const ScenarioDoc& doc, Theory theory) {
  ExplainStages st{to_network(doc), to_network(doc), {}};
  st.summary.theory = theory;
  if (doc.decision) st.summary.queried_decision = *doc.decision;

  switch (theory) {
    case Theory::Edt:
      break;
    case Theory::Cdt: {
      if (!doc.decision)
        fail(ErrorCode::SchemaError, "scenario '" + doc.name + "' has no decision node");
      const NodeSpec& d = st.original.node(*doc.decision);
      st.summary.severed_parents = d.parents;
      st.transformed = intervene(st.original, *doc.decision, d.states.front());
      break;
    }
    case Theory::Tdt: {
      for (const auto& ann : doc.logical) st.summary.logical_nodes.push_back(ann.logical_id);
      for (const auto& ann : doc.logical)
        for (const auto& rw : ann.rewires) {
          auto& rt = st.summary.rewired_targets;
          if (std::find(rt.begin(), rt.end(), rw.target) == rt.end())
            rt.push_back(rw.target);
        }
      bool has_self = false;
      for (const auto& ann : doc.logical) has_self |= ann.is_self_decision;
      if (doc.decision && has_self) {
        TransformedProblem t = apply_tdt(st.original, *doc.decision, doc.logical);
        st.summary.queried_decision = t.logical_decision;
        st.summary.severed_parents = st.original.node(*doc.decision).parents;
        auto& rt = st.summary.rewired_targets;
        if (std::find(rt.begin(), rt.end(), *doc.decision) == rt.end())
          rt.push_back(*doc.decision);
        st.transformed = t.net;
      } else {
        st.transformed = insert_logical_nodes(st.original, doc.logical);
      }
      break;
    }
  }
  return st;
}

void write_dot_file(const std::string& path, const Network& net, const DotOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write DOT file '" + path + "'");
  write_dot(out, net, opt);
  if (!out.good()) throw std::runtime_error("cannot write DOT file '" + path + "'");
}

int run_explain(const ScenarioOptions& so, const std::string& theory_name, bool as_json,
                const std::string& dot_prefix) {
  ScenarioDoc doc = load_scenario(so);
  Theory theory = parse_theory(theory_name);
  ExplainStages st = build_stages(doc, theory);

  if (!dot_prefix.empty()) {
    DotOptions orig;
    orig.graph_name = doc.name + "_original";
    if (doc.decision) orig.decision_node = *doc.decision;
    write_dot_file(dot_prefix + "-original.dot", st.original, orig);

    DotOptions trans;
    trans.graph_name = doc.name + "_transformed";
    trans.decision_node = st.summary.queried_decision;
    trans.logical_nodes = st.summary.logical_nodes;
    for (const auto& p : st.summary.severed_parents)
      trans.severed_edges.emplace_back(p, doc.decision ? *doc.decision : "");
    write_dot_file(dot_prefix + "-transformed.dot", st.transformed, trans);
  }

  if (as_json) {
    json j;
    j["theory"] = to_string(theory);
    j["original"] = structure_json(st.original);
    j["transformed"] = structure_json(st.transformed);
    j["summary"] = summary_json(st.summary);
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << "scenario: " << doc.name << "\n";
  std::cout << "theory:   " << to_string(theory) << "\n\n";
  std::cout << "original network:\n";
  print_structure(std::cout, st.original);
  std::cout << "\ntransform:\n";
  if (theory == Theory::Edt) {
    std::cout << "  none: conditioning runs on the network as given\n";
  } else {
    for (const auto& id : st.summary.logical_nodes)
      std::cout << "  logical node " << id << " inserted as a root\n";
    for (const auto& t : st.summary.rewired_targets) {
      const NodeSpec& n = st.transformed.node(t);
      std::cout << "  rewired " << t << ": cpt replaced, parents now (";
      for (std::size_t i = 0; i < n.parents.size(); ++i)
        std::cout << (i ? ", " : "") << n.parents[i];
      std::cout << ")\n";
    }
    for (const auto& p : st.summary.severed_parents)
      std::cout << "  severed " << p << " -> "
                << (doc.decision ? *doc.decision : std::string()) << "\n";
    if (!st.summary.queried_decision.empty())
      std::cout << "  decision surgery clamps " << st.summary.queried_decision
                << " to each action in turn\n";
  }
  std::cout << "\ntransformed network:\n";
  print_structure(std::cout, st.transformed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision theories over causal Bayesian networks"};
  app.require_subcommand(1);

  ScenarioOptions decide_so, query_so, explain_so;
  std::string decide_theory, explain_theory;
  std::string query_targets, query_evidence, dot_prefix;
  bool decide_json = false, query_json = false, explain_json = false, query_base = false;

  CLI::App* cmd_decide = app.add_subcommand("decide", "pick the best action");
  add_scenario_options(cmd_decide, decide_so);
  cmd_decide->add_option("--theory", decide_theory, "edt, cdt or tdt")->required();
  cmd_decide->add_flag("--json", decide_json, "machine-readable output");

  CLI::App* cmd_query = app.add_subcommand("query", "conditional probability query");
  add_scenario_options(cmd_query, query_so);
  cmd_query->add_option("--target", query_targets, "target node ids (comma list)")->required();
  cmd_query->add_option("--evidence", query_evidence, "evidence id=state (comma list)");
  cmd_query->add_flag("--base", query_base,
                      "query the declared network without materializing logical nodes");
  cmd_query->add_flag("--json", query_json, "machine-readable output");

  CLI::App* cmd_explain = app.add_subcommand("explain", "show the theory's network transform");
  add_scenario_options(cmd_explain, explain_so);
  cmd_explain->add_option("--theory", explain_theory, "edt, cdt or tdt")->required();
  cmd_explain->add_option("--dot", dot_prefix, "write <prefix>-{original,transformed}.dot");
  cmd_explain->add_flag("--json", explain_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  try {
    if (cmd_decide->parsed()) return run_decide(decide_so, decide_theory, decide_json);
    if (cmd_query->parsed())
      return run_query(query_so, query_targets, query_evidence, query_base, query_json);
    if (cmd_explain->parsed())
      return run_explain(explain_so, explain_theory, explain_json, dot_prefix);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == ErrorCode::ImpossibleEvidence ||
            e.code() == ErrorCode::ImpossibleAction)
               ? 3
               : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 4;
}
