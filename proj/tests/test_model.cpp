#include <doctest.h>

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <random>
#include <set>

#include "common.hpp"
#include "sbcheck/model.hpp"

using namespace sbcheck;
using testing::bundled;

namespace {

using Obs3 = std::array<Value, 3>;  // (Oc, Ob, Oy)

struct BoneRule {
  std::function<bool(const Obs3&)> guard;
  std::function<Obs3(Obs3)> apply;
};

// The seven bone rules written out by hand, independent of the DSL.
std::vector<BoneRule> bone_rules() {
  return {
      {[](const Obs3& s) { return s[0] == 0 && s[1] == 0 && s[2] == 0; }, [](Obs3 s) { ++s[2]; return s; }},
      {[](const Obs3& s) { return s[2] == 0; }, [](Obs3 s) { s[2] = 2; return s; }},
      {[](const Obs3& s) { return s[2] <= s[0] && s[2] > 0; }, [](Obs3 s) { --s[2]; return s; }},
      {[](const Obs3& s) { return s[1] <= 1 && s[0] < s[2] && s[0] < 2; }, [](Obs3 s) { ++s[0]; return s; }},
      {[](const Obs3& s) { return s[0] > s[2] && s[0] > 0; }, [](Obs3 s) { --s[0]; return s; }},
      {[](const Obs3& s) { return s[1] < 2 * s[0] && s[2] == 0 && s[1] < 4; }, [](Obs3 s) { ++s[1]; return s; }},
      {[](const Obs3& s) { return s[1] > s[0] && s[1] > 0; }, [](Obs3 s) { --s[1]; return s; }},
  };
}

bool in_grid(const Obs3& s) { return s[0] >= 0 && s[0] <= 2 && s[1] >= 0 && s[1] <= 4 && s[2] >= 0 && s[2] <= 2; }

struct Expansion {
  std::set<Obs3> states;
  std::set<std::pair<Obs3, Obs3>> edges;
};

Expansion bone_oracle(Obs3 init) {
  Expansion out;
  std::deque<Obs3> queue{init};
  out.states.insert(init);
  const auto rules = bone_rules();
  while (!queue.empty()) {
    const Obs3 s = queue.front();
    queue.pop_front();
    for (const auto& r : rules) {
      if (!r.guard(s)) continue;
      const Obs3 t = r.apply(s);
      if (!in_grid(t)) continue;
      out.edges.insert({s, t});
      if (out.states.insert(t).second) queue.push_back(t);
    }
  }
  return out;
}

Obs3 obs3(const BState& b) { return {b.obs.values[0], b.obs.values[1], b.obs.values[2]}; }

Expansion of(const BLevel& b) {
  Expansion out;
  for (const auto& s : b.states) out.states.insert(obs3(s));
  for (const auto& [from, to] : b.transitions) out.edges.insert({obs3(b.states[from]), obs3(b.states[to])});
  return out;
}

std::set<Obs3> successors(const BLevel& b, const Obs3& s) {
  std::set<Obs3> out;
  for (const auto& [from, to] : b.transitions) {
    if (obs3(b.states[from]) == s) out.insert(obs3(b.states[to]));
  }
  return out;
}

std::string expect_model_error(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ModelError& e) {
    return e.what();
  } catch (const FormulaError& e) {
    return e.what();
  }
  FAIL("model parsed without error");
  return {};
}

const char* kTiny = R"(system tiny
observables
  x : int 0..2
behaviour explicit
  state a { x=0 }
  state b { x=1 }
  init a
  trans a -> b
structure
  state r0 : x == 0
  state r1 : x == 1
  init r0
  trans r0 -> r1 inv true
)";

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("bundled models load and validate") {
    for (const char* name : testing::kBundled) {
      const SBSystem& sys = bundled(name);
      CHECK(sys.name == name);
      CHECK_MESSAGE(validate(sys).empty(), name);
    }
    CHECK(bundled("bone_s0").s.states.size() == 3);
    CHECK(bundled("bone_s0").s.states[1].id == "r1");
    CHECK(bundled("bone_s1").s.states.size() == 6);
    CHECK(bundled("atv_s0").b.states.size() == 9);
  }

  TEST_CASE("atv_s1 has one S state with a guarded self-loop") {
    const SBSystem& sys = bundled("atv_s1");
    REQUIRE(sys.s.states.size() == 1);
    REQUIRE(sys.s.transitions.size() == 1);
    const auto& t = sys.s.transitions[0];
    CHECK(t.source == 0);
    CHECK(t.target == 0);
    CHECK(to_string(t.invariant) == "v == V0 || v == V1");
  }

  TEST_CASE("bone expansion matches a brute-force oracle") {
    const SBSystem& sys = bundled("bone_s0");
    const Expansion expected = bone_oracle({0, 0, 1});
    const Expansion got = of(sys.b);
    CHECK(got.states == expected.states);
    CHECK(got.edges == expected.edges);
    CHECK(sys.b.states.size() == expected.states.size());
    CHECK(obs3(sys.b.states[sys.b.initial]) == Obs3{0, 0, 1});
    // Both bone models share the behaviour level.
    CHECK(of(bundled("bone_s1").b).edges == expected.edges);
  }

  TEST_CASE("expansion examples") {
    const SBSystem& sys = bundled("bone_s0");
    const BLevel from_zero = expand_rules(sys.rules, sys.sig, {{0, 0, 0}});
    CHECK(successors(from_zero, {0, 0, 0}) == std::set<Obs3>{{0, 0, 1}, {0, 0, 2}});
    CHECK(successors(sys.b, {0, 0, 1}) == std::set<Obs3>{{1, 0, 1}});
    for (const auto& s : sys.b.states) CHECK(check_observation(sys.sig, s.obs).empty());
    // (2,0,2) is outside the reachable set; expand from it directly.
    const BLevel from_top = expand_rules(sys.rules, sys.sig, {{2, 0, 2}});
    for (const Obs3& t : successors(from_top, {2, 0, 2})) CHECK(t[0] <= 2);
    CHECK(of(sys.b).states.size() == sys.b.states.size());
    for (const auto& s : sys.b.states) CHECK(s.id == render_tuple(s.obs));
  }

  TEST_CASE("expansion is independent of rule order") {
    const SBSystem& sys = bundled("bone_s1");
    const Observation init = sys.b.states[sys.b.initial].obs;
    const BLevel base = expand_rules(sys.rules, sys.sig, init);
    std::mt19937 rng(5);
    for (int i = 0; i < 20; ++i) {
      auto rules = sys.rules;
      std::shuffle(rules.begin(), rules.end(), rng);
      const BLevel b = expand_rules(rules, sys.sig, init);
      CHECK(b.states.size() == base.states.size());
      for (std::size_t k = 0; k < b.states.size(); ++k) CHECK(b.states[k].id == base.states[k].id);
      auto e1 = b.transitions, e2 = base.transitions;
      std::sort(e1.begin(), e1.end());
      std::sort(e2.begin(), e2.end());
      CHECK(e1 == e2);
    }
  }

  TEST_CASE("out-of-range updates are pruned with a lint") {
    const SBSystem sys = parse_model(R"(system clip
observables
  n : int 0..2
behaviour rules
  init n=0
  rule up: true -> n := n + 1
structure
  state r0 : true
  init r0
)");
    CHECK(sys.b.states.size() == 3);
    CHECK(sys.b.transitions.size() == 2);
    CHECK_FALSE(sys.lints.empty());
    CHECK(sys.lints[0].severity == Diagnostic::Severity::Warning);
  }

  TEST_CASE("simultaneous updates read the pre-state") {
    const SBSystem sys = parse_model(R"(system swap
observables
  a : int 0..1
  b : int 0..1
behaviour rules
  init a=0, b=1
  rule swap: true -> a := b, b := a
structure
  state r0 : true
  init r0
)");
    CHECK(sys.b.states.size() == 2);
    CHECK(sys.b.find("(1,0)").has_value());
  }

  TEST_CASE("initial B state must satisfy the initial S label") {
    const std::string text = R"(system bad
observables
  Oc : int 0..2
  Ob : int 0..4
  Oy : int 0..2
behaviour explicit
  state q { Oc=1, Ob=0, Oy=1 }
  init q
structure
  state r0 : Oy > 0 && Oc == 0 && Ob == 0
  init r0
)";
    const SBSystem sys = parse_model(text);
    const auto diags = validate(sys);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].severity == Diagnostic::Severity::Error);
    CHECK(to_string(diags[0]).find("r0") != std::string::npos);
  }

  TEST_CASE("a B level without transitions is valid") {
    const SBSystem sys = parse_model(R"(system still
observables
  x : bool
behaviour explicit
  state q { x=true }
  init q
structure
  state r0 : x
  init r0
)");
    CHECK(validate(sys).empty());
  }

  TEST_CASE("distinct ids may share observations") {
    const SBSystem& sys = bundled("atv_s0");
    CHECK(sys.b.states[sys.b_index("2")].obs == sys.b.states[sys.b_index("3")].obs);
  }

  TEST_CASE("parse errors") {
    std::string dup = kTiny;
    dup.replace(dup.find("state b"), 7, "state a");
    CHECK(expect_model_error(dup).find("duplicate") != std::string::npos);

    std::string dangling = kTiny;
    dangling.replace(dangling.find("trans a -> b"), 12, "trans a -> c");
    const std::string msg = expect_model_error(dangling);
    CHECK(msg.find("'c'") != std::string::npos);
    CHECK(msg.find("8:") == 0);

    std::string bad_formula = kTiny;
    bad_formula.replace(bad_formula.find("x == 1"), 6, "x == ");
    CHECK(expect_model_error(bad_formula).find("11:") == 0);

    std::string ill_sorted = kTiny;
    ill_sorted.replace(ill_sorted.find("inv true"), 8, "inv x");
    CHECK(expect_model_error(ill_sorted).find("13:") == 0);

    std::string bad_value = kTiny;
    bad_value.replace(bad_value.find("x=1"), 3, "x=3");
    CHECK_FALSE(expect_model_error(bad_value).empty());

    CHECK_FALSE(expect_model_error("observables\n").empty());
  }

  TEST_CASE("print_model round trip") {
    for (const char* name : testing::kBundled) {
      const SBSystem& sys = bundled(name);
      const SBSystem again = parse_model(print_model(sys));
      CHECK(print_model(again) == print_model(sys));
      REQUIRE(again.b.states.size() == sys.b.states.size());
      for (std::size_t i = 0; i < sys.b.states.size(); ++i) {
        CHECK(again.b.states[i].id == sys.b.states[i].id);
        CHECK(again.b.states[i].obs == sys.b.states[i].obs);
      }
      CHECK(again.b.transitions == sys.b.transitions);
      REQUIRE(again.s.transitions.size() == sys.s.transitions.size());
      for (std::size_t i = 0; i < sys.s.transitions.size(); ++i) {
        CHECK(again.s.transitions[i].invariant == sys.s.transitions[i].invariant);
      }
    }
  }

  TEST_CASE("generated systems are valid and deterministic") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      const SBSystem sys = testing::random_system(seed);
      REQUIRE_MESSAGE(validate(sys).empty(), "seed " << seed);
      CHECK(print_model(sys) == print_model(testing::random_system(seed)));
      CHECK(print_model(parse_model(print_model(sys))) == print_model(sys));
    }
    GenParams p;
    p.seed = 1;
    p.b_states = 6;
    p.s_states = 2;
    CHECK(validate(gen_random(p)).empty());
  }

  TEST_CASE("density 1 gives a total B relation") {
    GenParams p;
    p.seed = 9;
    p.b_states = 7;
    p.s_states = 3;
    p.density = 1.0;
    const SBSystem sys = gen_random(p);
    CHECK(sys.b.transitions.size() == 49);
  }

  TEST_CASE("too many S states is a contract error") {
    GenParams p;
    p.s_states = 13;
    CHECK_THROWS_AS(gen_random(p), ContractError);
  }
}
