#include "sbcheck/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sbcheck/adapt.hpp"
#include "sbcheck/ctl.hpp"
#include "sbcheck/error.hpp"
#include "sbcheck/flatten.hpp"
#include "sbcheck/generate.hpp"
#include "sbcheck/kripke.hpp"
#include "sbcheck/model.hpp"

namespace sbcheck::cli {

namespace {

using nlohmann::ordered_json;

// Errors raised while reading a named file get the path prepended.
class FileError : public Error {
 public:
  FileError(const std::string& path, const std::string& what) : Error(path + ": " + what) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SBSystem load(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const Error& e) {
    throw FileError(path, e.what());
  }
}

Mode parse_mode(const std::string& m) { return m == "strong" ? Mode::Strong : Mode::Weak; }

std::string paint(const std::string& s, bool good, bool color) {
  if (!color) return s;
  return (good ? "\x1b[32m" : "\x1b[31m") + s + "\x1b[0m";
}

// Colours the first occurrence of `word` in the first line of `text`.
std::string paint_first(std::string text, const std::string& word, bool good, bool color) {
  const auto eol = text.find('\n');
  const auto at = text.find(word);
  if (!color || at == std::string::npos || at > eol) return text;
  return text.substr(0, at) + paint(word, good, true) + text.substr(at + word.size());
}

ordered_json pair_json(const SBSystem& sys, const StatePair& p) {
  return ordered_json::array({sys.b.states[p.q].id, sys.s.states[p.r].id});
}

ordered_json relation_json(const SBSystem& sys, const AdaptRelation& rel) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : rel) arr.push_back(pair_json(sys, p));
  return arr;
}

StatePair parse_at(const SBSystem& sys, const std::string& at) {
  // B ids may contain commas, e.g. "(0,1,0),r4".
  const auto comma = at.rfind(',');
  if (comma == std::string::npos) throw Error("--at expects <q>,<r>, got '" + at + "'");
  const StatePair p{sys.b_index(at.substr(0, comma)), sys.s_index(at.substr(comma + 1))};
  if (!evaluate(sys.s.states[p.r].label, sys.b.states[p.q].obs)) {
    throw ContractError("B state '" + sys.b.states[p.q].id + "' does not satisfy the constraints of S state '" +
                        sys.s.states[p.r].id + "'");
  }
  return p;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  auto diags = sys.lints;
  auto more = validate(sys);
  diags.insert(diags.end(), more.begin(), more.end());
  const bool ok = std::none_of(diags.begin(), diags.end(),
                               [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
  if (c.format == "json") {
    ordered_json j;
    j["system"] = sys.name;
    j["valid"] = ok;
    j["b_states"] = sys.b.states.size();
    j["b_transitions"] = sys.b.transitions.size();
    j["s_states"] = sys.s.states.size();
    j["s_transitions"] = sys.s.transitions.size();
    j["diagnostics"] = ordered_json::array();
    for (const auto& d : diags) {
      j["diagnostics"].push_back(
          {{"severity", d.severity == Diagnostic::Severity::Error ? "error" : "warning"}, {"message", d.message}});
    }
    out << j.dump(2) << "\n";
  } else {
    for (const auto& d : diags) out << to_string(d) << "\n";
    out << sys.name << ": " << paint(ok ? "valid" : "invalid", ok, c.color) << " (" << sys.b.states.size()
        << " B states, " << sys.b.transitions.size() << " B transitions, " << sys.s.states.size() << " S states, "
        << sys.s.transitions.size() << " S transitions)\n";
  }
  return ok ? kHolds : kFails;
}

int cmd_flatten(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const FlatLts flat = build_flat(sys);
  if (c.format == "json") {
    out << flat_to_json(sys, flat);
  } else if (c.format == "dot") {
    out << flat_to_dot(sys, flat);
  } else {
    std::size_t steady = 0;
    for (const auto& f : flat.states) steady += f.steady();
    out << sys.name << ": " << flat.size() << " flat states (" << steady << " steady), " << flat.edge_count()
        << " transitions\n";
    for (StateIndex i = 0; i < flat.size(); ++i) {
      out << (i == flat.initial ? "> " : "  ") << render(sys, flat.states[i]) << "\n";
      const auto succ = flat.successors(i);
      if (succ.empty()) out << "      (no successors)\n";
      for (const auto& e : succ) {
        out << "      --" << to_string(e.rule) << " " << render(sys, e.label) << "--> "
            << render(sys, flat.states[e.target]) << "\n";
      }
    }
  }
  return kHolds;
}

int cmd_check(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const Mode mode = parse_mode(c.mode);
  const Analysis a(sys);
  Verdict v = check(a, mode);
  if (v.holds) {
    if (mode == Mode::Strong) {
      v.relation = strong_relation(sys);
    } else {
      AdaptRelation rel = weak_relation(sys);
      if (rel.count({sys.b.initial, sys.s.initial})) v.relation = std::move(rel);
    }
  }
  if (c.format == "json") {
    out << verdict_to_json(sys, v);
  } else {
    out << paint_first(verdict_to_text(sys, v), v.holds ? "holds" : "fails", v.holds, c.color);
  }
  return v.holds ? kHolds : kFails;
}

int cmd_relation(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const Mode mode = parse_mode(c.mode);
  const StatePair init{sys.b.initial, sys.s.initial};
  std::optional<AdaptRelation> rel;
  if (mode == Mode::Strong) {
    rel = strong_relation(sys);
  } else {
    rel = weak_relation(sys);
  }
  const bool holds = rel && rel->count(init);
  if (c.format == "json") {
    ordered_json j;
    j["system"] = sys.name;
    j["mode"] = to_string(mode);
    j["holds"] = holds;
    j["relation"] = rel ? relation_json(sys, *rel) : ordered_json(nullptr);
    out << j.dump(2) << "\n";
  } else {
    out << sys.name << ": " << to_string(mode) << " adaptation relation "
        << paint(holds ? "found" : "not found", holds, c.color) << "\n";
    if (rel) {
      out << "relation (" << rel->size() << " pairs):\n";
      for (const auto& p : *rel) out << "  " << render(sys, p) << "\n";
    } else {
      out << "reachable steady pairs do not form a strong adaptation relation\n";
      const auto report = is_strong_adaptation(sys, reachable_steady_pairs(build_flat(sys)));
      for (const auto& v : report.violations) {
        out << "  " << render(sys, v.pair) << " clause " << v.clause << ": " << v.message << "\n";
      }
    }
  }
  return holds ? kHolds : kFails;
}

int cmd_verify_relation(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const Mode mode = parse_mode(c.mode);
  const std::string& path = *c.relation_file;
  AdaptRelation rel;
  try {
    rel = relation_from_json(sys, read_file(path));
  } catch (const FileError&) {
    throw;
  } catch (const Error& e) {
    throw FileError(path, e.what());
  }
  const RelationReport report = mode == Mode::Strong ? is_strong_adaptation(sys, rel) : is_weak_adaptation(sys, rel);
  const bool initial = rel.count({sys.b.initial, sys.s.initial}) != 0;
  if (c.format == "json") {
    ordered_json j;
    j["system"] = sys.name;
    j["mode"] = to_string(mode);
    j["valid"] = report.ok;
    j["contains_initial"] = initial;
    j["violations"] = ordered_json::array();
    for (const auto& v : report.violations) {
      j["violations"].push_back({{"pair", pair_json(sys, v.pair)}, {"clause", v.clause}, {"message", v.message}});
    }
    out << j.dump(2) << "\n";
  } else {
    out << sys.name << ": " << rel.size() << " pairs " << paint(report.ok ? "form" : "do not form", report.ok, c.color)
        << " a " << to_string(mode) << " adaptation relation\n";
    for (const auto& v : report.violations) {
      out << "  " << render(sys, v.pair) << " clause " << v.clause << ": " << v.message << "\n";
    }
    out << "initial pair " << (initial ? "included" : "not included") << "\n";
  }
  return report.ok ? kHolds : kFails;
}

int cmd_ctl(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const Ctl phi = parse_ctl(*c.ctl);
  std::optional<StatePair> at;
  if (c.at) at = parse_at(sys, *c.at);
  const Analysis a = at ? Analysis(sys, FlatState{at->q, at->r, kSteady}) : Analysis(sys);
  const SatSet sat = sat_set(a.kripke, phi);
  const StateIndex t = a.kripke.initial();
  const bool holds = sat.contains(t);
  const FlatState& f = a.flat.states[t];
  if (c.format == "json") {
    ordered_json j;
    j["system"] = sys.name;
    j["formula"] = *c.ctl;
    j["at"] = pair_json(sys, {f.q, f.r});
    j["holds"] = holds;
    j["states"] = a.kripke.size();
    j["satisfying"] = sat.count();
    out << j.dump(2) << "\n";
  } else {
    out << sys.name << ": " << *c.ctl << " " << paint(holds ? "holds" : "fails", holds, c.color) << " at "
        << render(sys, f) << " (" << sat.count() << " of " << a.kripke.size() << " states satisfy it)\n";
  }
  return holds ? kHolds : kFails;
}

int cmd_export(const RunConfig& c, std::ostream& out) {
  const SBSystem sys = load(c.input);
  const FlatLts flat = build_flat(sys);
  if (c.stage == "kripke") {
    const Kripke k = to_kripke(flat);
    out << (c.format == "dot" ? kripke_to_dot(sys, flat, k) : kripke_to_json(sys, flat, k));
  } else {
    out << (c.format == "dot" ? flat_to_dot(sys, flat) : flat_to_json(sys, flat));
  }
  return kHolds;
}

int cmd_gen(const RunConfig& c, std::ostream& out) {
  GenParams p;
  p.seed = *c.seed;
  p.b_states = c.b_states;
  p.s_states = c.s_states;
  p.density = c.density;
  p.s_density = c.s_density;
  const std::string text = print_model(gen_random(p));
  if (c.output && *c.output != "-") {
    std::ofstream f(*c.output, std::ios::binary);
    if (!f) throw FileError(*c.output, "cannot write file");
    f << text;
  } else {
    out << text;
  }
  return kHolds;
}

bool color_from_env() {
  const char* v = std::getenv("SBCHECK_COLOR");
  return v != nullptr && std::string(v) == "1";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  c.color = color_from_env();

  CLI::App app{"Explicit-state verifier for weak and strong adaptability of S[B] systems", "sbcheck"};
  app.require_subcommand(1, 1);
  app.footer("Exit status: 0 property holds or success, 1 property fails, 2 usage or input error.");

  const auto text_json = CLI::IsMember({"text", "json"});
  const auto modes = CLI::IsMember({"weak", "strong"});
  auto add_file = [&](CLI::App* sub) { sub->add_option("file", c.input, "Model file")->required(); };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", c.mode, "weak or strong")->check(modes)->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a model for well-formedness");
  add_file(validate_cmd);
  validate_cmd->add_option("--format", c.format)->check(text_json);

  auto* flatten_cmd = app.add_subcommand("flatten", "Print the reachable flat transition system");
  add_file(flatten_cmd);
  flatten_cmd->add_option("--format", c.format)->check(CLI::IsMember({"text", "json", "dot"}));

  auto* check_cmd = app.add_subcommand("check", "Model check weak or strong adaptability");
  add_file(check_cmd);
  add_mode(check_cmd);
  check_cmd->add_option("--format", c.format)->check(text_json);

  auto* relation_cmd = app.add_subcommand("relation", "Compute an adaptation relation");
  add_file(relation_cmd);
  add_mode(relation_cmd);
  relation_cmd->add_option("--format", c.format)->check(text_json);

  auto* verify_cmd = app.add_subcommand("verify-relation", "Check a user-supplied relation");
  add_file(verify_cmd);
  verify_cmd->add_option("--relation", c.relation_file, "JSON file of [q, r] pairs")->required();
  add_mode(verify_cmd);
  verify_cmd->add_option("--format", c.format)->check(text_json);

  auto* ctl_cmd = app.add_subcommand("ctl", "Evaluate a CTL formula over the Kripke structure");
  add_file(ctl_cmd);
  ctl_cmd->add_option("--ctl", c.ctl, "Formula over adapting, steady, progress")->required();
  ctl_cmd->add_option("--at", c.at, "Start from steady state <q>,<r> instead of the initial state");
  ctl_cmd->add_option("--format", c.format)->check(text_json);

  auto* export_cmd = app.add_subcommand("export", "Export the flat LTS or Kripke structure");
  add_file(export_cmd);
  export_cmd->add_option("--format", c.format)->check(CLI::IsMember({"dot", "json"}))->required();
  export_cmd->add_option("--stage", c.stage)->check(CLI::IsMember({"flat", "kripke"}))->capture_default_str();

  auto* gen_cmd = app.add_subcommand("gen", "Generate a random explicit model");
  gen_cmd->add_option("--seed", c.seed)->required();
  gen_cmd->add_option("--b-states", c.b_states)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
  gen_cmd->add_option("--s-states", c.s_states)->check(CLI::Range(std::size_t{1}, std::size_t{12}));
  gen_cmd->add_option("--density", c.density)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--s-density", c.s_density)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("-o,--output", c.output, "Output file, '-' for stdout");

  std::vector<const char*> argv{"sbcheck"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kHolds : kUsage;
  }
  if (c.density <= 0.0 && gen_cmd->parsed()) {
    err << "sbcheck: --density must be positive\n";
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.subcommand = sub->get_name();
  try {
    if (c.subcommand == "validate") return cmd_validate(c, out);
    if (c.subcommand == "flatten") return cmd_flatten(c, out);
    if (c.subcommand == "check") return cmd_check(c, out);
    if (c.subcommand == "relation") return cmd_relation(c, out);
    if (c.subcommand == "verify-relation") return cmd_verify_relation(c, out);
    if (c.subcommand == "ctl") return cmd_ctl(c, out);
    if (c.subcommand == "export") return cmd_export(c, out);
    return cmd_gen(c, out);
  } catch (const Error& e) {
    err << "sbcheck: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "sbcheck: " << e.what() << "\n";
    return kUsage;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sbcheck::cli
