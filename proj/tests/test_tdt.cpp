#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "newcomb/decision.hpp"
#include "newcomb/scenarios.hpp"
#include "newcomb/tdt.hpp"
#include "support.hpp"

using namespace newcomb;

namespace {

bool code_is(const Error& e, ErrorCode c) { return e.code() == c; }

LogicalAnnotation pass_through_self(const Network& net, const std::string& decision) {
  LogicalAnnotation self;
  self.logical_id = "self_logic";
  self.states = net.node(decision).states;
  self.prior = std::vector<double>(self.states.size(), 1.0 / self.states.size());
  self.is_self_decision = true;
  return self;
}

}  // namespace

TEST_CASE("an empty annotation list is the identity transform") {
  auto net = to_network(make_toxoplasmosis());
  auto out = insert_logical_nodes(net, {});
  REQUIRE(out.nodes() == net.nodes());
}

TEST_CASE("the abstract digit ties the calculator outputs together") {
  auto doc = make_calculators(CalculatorVariant::Logical);
  auto net = to_network_with_logical(doc);
  REQUIRE(net.has_node("product_parity"));
  REQUIRE(net.node("product_parity").parents.empty());
  REQUIRE(net.node("maya_out").parents ==
          std::vector<std::string>{"maya_state", "product_parity"});

  Assignment working{{"china_out", "odd"}, {"maya_state", "mult"}, {"china_state", "mult"}};
  auto d = query(net, {"maya_out"}, working);
  REQUIRE(d.at(std::vector<std::string>{"even"}) == 0.0);
  REQUIRE(d.at(std::vector<std::string>{"odd"}) == 1.0);

  // without the state observations the outputs are merely correlated
  auto d2 = query(net, {"maya_out"}, {{"china_out", "odd"}});
  REQUIRE(d2.at(std::vector<std::string>{"odd"}) > 0.5);

  // the bare declared network still treats them as independent given states
  auto base = to_network(doc);
  auto d3 = query(base, {"maya_out"}, working);
  REQUIRE_THAT(d3.at(std::vector<std::string>{"even"}),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("insertion failures carry the offending ids") {
  auto net = to_network(make_toxoplasmosis());

  SECTION("logical id collides with a network node") {
    LogicalAnnotation a;
    a.logical_id = "adore_cats";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::DuplicateLogicalId);
                           }));
  }
  SECTION("logical id declared twice") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a, a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::DuplicateLogicalId);
                           }));
  }
  SECTION("unknown rewire target") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    a.rewires = {{"nonesuch", Cpt{{{0.5, 0.5}}}}};
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::UnknownRewireTarget);
                           }));
  }
  SECTION("replacement cpt of the wrong shape") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    a.rewires = {{"neg_effects", Cpt{{{0.5, 0.5}}}}};  // needs 2 (T) * 2 (L) rows
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::CptShapeMismatch);
                           }));
  }
  SECTION("rewire without any replacement cpt") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    a.rewires = {{"neg_effects", std::nullopt}};
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::CptShapeMismatch);
                           }));
  }
  SECTION("unnormalized logical prior") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.7, 0.7};
    REQUIRE_THROWS_MATCHES(insert_logical_nodes(net, {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::RowNotNormalized);
                           }));
  }
}

TEST_CASE("apply_tdt rejects bad self annotations") {
  auto net = to_network(make_toxoplasmosis());

  SECTION("no self annotation") {
    LogicalAnnotation a;
    a.logical_id = "L";
    a.states = {"x", "y"};
    a.prior = {0.5, 0.5};
    REQUIRE_THROWS_MATCHES(apply_tdt(net, "adore_cats", {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::MissingSelfAnnotation);
                           }));
  }
  SECTION("two self annotations") {
    auto a = pass_through_self(net, "adore_cats");
    auto b = a;
    b.logical_id = "other_self";
    REQUIRE_THROWS_MATCHES(apply_tdt(net, "adore_cats", {a, b}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::MultipleSelfAnnotations);
                           }));
  }
  SECTION("self states must match the decision node's") {
    auto a = pass_through_self(net, "adore_cats");
    a.states = {"ignore", "adore"};  // wrong order
    REQUIRE_THROWS_MATCHES(apply_tdt(net, "adore_cats", {a}), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return code_is(e, ErrorCode::StateMismatch);
                           }));
  }
}

TEST_CASE("apply_tdt re-roots the decision under the self node") {
  auto net = to_network(make_toxoplasmosis());
  auto t = apply_tdt(net, "adore_cats", {pass_through_self(net, "adore_cats")});
  REQUIRE(t.logical_decision == "self_logic");
  REQUIRE(t.original_decision == "adore_cats");
  REQUIRE(t.net.node("self_logic").parents.empty());
  const auto& cpt = t.net.node("adore_cats").cpt;
  REQUIRE(t.net.node("adore_cats").parents == std::vector<std::string>{"self_logic"});
  REQUIRE(cpt.rows == std::vector<std::vector<double>>{{1.0, 0.0}, {0.0, 1.0}});
}

TEST_CASE("self-aware dilemma against a known twin cooperates") {
  auto p = to_problem(make_tdt_prisoners_dilemma());
  auto r = decide(p, Theory::Tdt);
  REQUIRE(r.chosen == "C");
  REQUIRE(r.eus[0].second == 3.0);  // u3, exactly
  REQUIRE(r.eus[1].second == 2.0);  // u2, exactly
}

TEST_CASE("an opponent detached from the shared algorithm restores dominance") {
  TdtPdParams always_c;
  always_c.p_opponent_uses_tdt = 0.0;
  always_c.not_tdt_prior = {1.0, 0.0};
  auto r = decide(to_problem(make_tdt_prisoners_dilemma(always_c)), Theory::Tdt);
  REQUIRE(r.chosen == "D");
  REQUIRE(r.eus[1].second == 4.0);  // u4: defect against a sure cooperator

  TdtPdParams coinflip;
  coinflip.p_opponent_uses_tdt = 0.0;
  coinflip.not_tdt_prior = {0.5, 0.5};
  auto r2 = decide(to_problem(make_tdt_prisoners_dilemma(coinflip)), Theory::Tdt);
  REQUIRE(r2.chosen == "D");
  REQUIRE_THAT(r2.eus[1].second - r2.eus[0].second,
               Catch::Matchers::WithinAbs(0.5 * (4.0 - 3.0) + 0.5 * (2.0 - 1.0), 1e-12));
}

TEST_CASE("engine expected utilities equal the hand-expanded mixture") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    TdtPdParams params;
    params.u = PdUtilities{u01(rng), 1.0 + u01(rng), 2.0 + u01(rng), 3.0 + u01(rng)};
    params.p_opponent_uses_tdt = u01(rng);
    const double pn = u01(rng);
    params.not_tdt_prior = {pn, 1.0 - pn};
    auto p = to_problem(make_tdt_prisoners_dilemma(params));
    auto eu = hand::tdt_pd(params.u, params.p_opponent_uses_tdt, pn);
    REQUIRE_THAT(expected_utility(p, Theory::Tdt, "C"),
                 Catch::Matchers::WithinAbs(eu.cooperate, 1e-9));
    REQUIRE_THAT(expected_utility(p, Theory::Tdt, "D"),
                 Catch::Matchers::WithinAbs(eu.defect, 1e-9));
  }
}

TEST_CASE("a pass-through self node reproduces the causal answer") {
  std::mt19937 rng(67);
  for (int draw = 0; draw < 25; ++draw) {
    auto p = gen::random_problem(rng, true);
    for (const auto& action : p.net.node(p.decision_node).states) {
      const double tdt = expected_utility(p, Theory::Tdt, action);
      const double cdt = expected_utility(p, Theory::Cdt, action);
      REQUIRE_THAT(tdt, Catch::Matchers::WithinAbs(cdt, 1e-12));
    }
    REQUIRE(decide(p, Theory::Tdt).chosen == decide(p, Theory::Cdt).chosen);
  }
}

TEST_CASE("near-perfect correlation favors cooperation whenever the gaps dominate") {
  std::mt19937 rng(71);
  const double eps = 1e-6;
  for (int draw = 0; draw < 50; ++draw) {
    std::uniform_real_distribution<double> step(0.5, 5.0);
    PdUtilities u;
    u.u1 = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    u.u2 = u.u1 + step(rng);
    u.u3 = u.u2 + step(rng);
    u.u4 = u.u3 + step(rng);
    TdtPdParams params;
    params.u = u;
    params.p_opponent_uses_tdt = 1.0 - eps;
    params.not_tdt_prior = {0.5, 0.5};
    auto p = to_problem(make_tdt_prisoners_dilemma(params));
    const double e_c = expected_utility(p, Theory::Tdt, "C");
    const double e_d = expected_utility(p, Theory::Tdt, "D");
    REQUIRE(e_c > e_d);
    // transformed-network conditionals really are within eps of the corners
    auto t = apply_tdt(p);
    auto coop = query(intervene(t.net, "tdt", "C"), {"opponent_decision"}, {});
    REQUIRE(coop.at(std::vector<std::string>{"C"}) >= 1.0 - eps);
    auto defect = query(intervene(t.net, "tdt", "D"), {"opponent_decision"}, {});
    REQUIRE(defect.at(std::vector<std::string>{"C"}) <= eps);
  }
}

TEST_CASE("deterministic copy tables never trip the impossible-evidence guard") {
  // surgery clamps the logical node; nothing ever conditions on it
  auto p = to_problem(make_tdt_prisoners_dilemma());  // mixture rows are all 0/1
  REQUIRE_NOTHROW(decide(p, Theory::Tdt));

  TdtPdParams sure;
  sure.p_opponent_uses_tdt = 0.0;
  sure.not_tdt_prior = {1.0, 0.0};  // deterministic prior as well
  REQUIRE_NOTHROW(decide(to_problem(make_tdt_prisoners_dilemma(sure)), Theory::Tdt));
}

TEST_CASE("late rewires may reference earlier logical parents") {
  // L1 and L2 both feed "out"; L2's annotation owns the replacement table.
  auto net = Network::validate({
      {"out", {"0", "1"}, {}, Cpt{{{0.5, 0.5}}}},
  });
  LogicalAnnotation l1;
  l1.logical_id = "L1";
  l1.states = {"a", "b"};
  l1.prior = {0.3, 0.7};
  l1.rewires = {{"out", std::nullopt}};
  LogicalAnnotation l2;
  l2.logical_id = "L2";
  l2.states = {"c", "d"};
  l2.prior = {0.6, 0.4};
  Cpt table;  // parents (L1, L2): out copies L1 when L2=c, else uniform
  table.rows = {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}, {0.5, 0.5}};
  l2.rewires = {{"out", table}};

  auto out = insert_logical_nodes(net, {l1, l2});
  REQUIRE(out.node("out").parents == std::vector<std::string>{"L1", "L2"});
  auto d = query(out, {"out"}, {{"L1", "a"}, {"L2", "c"}});
  REQUIRE(d.at(std::vector<std::string>{"0"}) == 1.0);
}
