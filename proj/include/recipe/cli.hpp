#pragma once

// Command-line driver. Exit codes: 0 holds / sat / valid, 1 fails / unsat /
// violations, 2 usage or input errors, 3 resource limits, deadlocks and
// truncated spaces.

#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recipe/automata.hpp"
#include "recipe/checker.hpp"
#include "recipe/export.hpp"
#include "recipe/parser.hpp"
#include "recipe/printer.hpp"

namespace recipe {

namespace detail {

inline Engine parse_engine(const std::string& s) {
  return s == "reference" ? Engine::Reference : Engine::Symbolic;
}

inline bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  f << text;
  return true;
}

inline void print_violations(const ValidationReport& r, std::ostream& out) {
  for (const auto& v : r) out << v.agent << ": " << v.condition << ": " << v.witness << "\n";
}

}  // namespace detail

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"explicit-state modelling and verification of reconfigurable communicating agents",
               "recipe"};
  app.require_subcommand(1);

  std::string file, engine_s = "symbolic";
  std::size_t max_states = 1'000'000;

  auto* validate = app.add_subcommand("validate", "check well-formedness of a model");
  validate->add_option("FILE", file, "model file")->required();

  auto* explore_cmd = app.add_subcommand("explore", "compute the reachable state space");
  bool dot = false, json = false;
  explore_cmd->add_option("FILE", file, "model file")->required();
  auto* dot_flag = explore_cmd->add_flag("--dot", dot, "print the space as DOT");
  explore_cmd->add_flag("--json", json, "print the space as JSON")->excludes(dot_flag);
  explore_cmd->add_option("--max-states", max_states, "state limit");
  explore_cmd->add_option("--engine", engine_s, "successor engine")
      ->check(CLI::IsMember({"reference", "symbolic"}));

  auto* simulate = app.add_subcommand("simulate", "print one random run");
  std::size_t steps = 20;
  std::uint64_t seed = 0;
  simulate->add_option("FILE", file, "model file")->required();
  simulate->add_option("--steps", steps, "number of steps")->required();
  simulate->add_option("--seed", seed, "random seed")->required();
  simulate->add_option("--engine", engine_s, "successor engine")
      ->check(CLI::IsMember({"reference", "symbolic"}));

  auto* check = app.add_subcommand("check", "model-check a property");
  std::string formula_name, inline_formula, abw_dot, nbw_dot;
  bool check_json = false, no_timing = false, deadlock_as_error = true;
  std::size_t max_nbw = std::size_t{1} << 20;
  check->add_option("FILE", file, "model file")->required();
  auto* fopt = check->add_option("--formula", formula_name, "name of a property in the model");
  auto* iopt = check->add_option("--inline", inline_formula, "formula text");
  fopt->excludes(iopt);
  check->add_option("--engine", engine_s, "successor engine")
      ->check(CLI::IsMember({"reference", "symbolic"}));
  check->add_flag("--json", check_json, "print the verdict as JSON");
  check->add_option("--max-states", max_states, "system state limit");
  check->add_option("--max-nbw-states", max_nbw, "automaton state limit");
  check->add_option("--deadlock-as-error", deadlock_as_error,
                    "abort on deadlocks (false: warn and check infinite runs only)");
  check->add_flag("--no-timing", no_timing, "omit timing from reports");
  check->add_option("--abw-dot", abw_dot, "write the alternating automaton as DOT");
  check->add_option("--nbw-dot", nbw_dot, "write the explored part of the Buchi automaton as DOT");

  auto* sat = app.add_subcommand("sat", "decide satisfiability of a formula");
  std::string sat_formula, vocab_file;
  std::uint64_t max_letters = 1'000'000;
  bool sat_json = false;
  sat->add_option("--formula", sat_formula, "formula text")->required();
  sat->add_option("--vocab", vocab_file, "model file supplying the vocabulary")->required();
  sat->add_option("--max-letters", max_letters, "alphabet size limit");
  sat->add_flag("--json", sat_json, "print the verdict as JSON");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const Engine engine = detail::parse_engine(engine_s);
  std::string current = file;
  try {
    if (*validate) {
      SourceModel m = load_model(file);
      auto report = validate_system(m.system);
      if (report.empty()) {
        out << "valid: " << m.system.agent_count() << " agents, 0 violations\n";
        return 0;
      }
      detail::print_violations(report, out);
      out << report.size() << " violations\n";
      return 1;
    }

    if (*explore_cmd) {
      SourceModel m = load_model(file);
      auto report = validate_system(m.system);
      if (!report.empty()) {
        detail::print_violations(report, err);
        return 1;
      }
      SystemSpace space = explore(m.system, {max_states, engine});
      if (dot) {
        out << space_to_dot(m.system, space);
      } else if (json) {
        out << space_to_json(m.system, space).dump(2) << "\n";
      } else {
        out << "states: " << space.states.size() << "\n"
            << "transitions: " << space.transition_count() << "\n"
            << "initial: " << space.initials.size() << "\n"
            << "observations: " << space.observations.size() << "\n"
            << "deadlocks: " << space.deadlocks.size() << "\n";
        if (space.truncated) out << "truncated at " << max_states << " states\n";
        for (auto id : space.deadlocks)
          out << "deadlock: " << format_state(m.system, space.states[id]) << "\n";
      }
      return space.truncated || !space.deadlocks.empty() ? 3 : 0;
    }

    if (*simulate) {
      SourceModel m = load_model(file);
      auto report = validate_system(m.system);
      if (!report.empty()) {
        detail::print_violations(report, err);
        return 1;
      }
      std::mt19937_64 rng(seed);
      auto inits = initial_states(m.system);
      GlobalState s = inits[rng() % inits.size()];
      TransitionEngine te(m.system, engine);
      out << "init: " << format_state(m.system, s) << "\n";
      for (std::size_t i = 0; i < steps; ++i) {
        auto succ = te.successors(s);
        if (succ.empty()) {
          out << "deadlock after " << i << " steps\n";
          return 3;
        }
        const SysTransition& t = succ[rng() % succ.size()];
        out << i + 1 << ": " << format_observation(m.system, t.obs) << "\n";
        s = t.to;
        out << "   " << format_state(m.system, s) << "\n";
      }
      return 0;
    }

    if (*check) {
      SourceModel m = load_model(file);
      auto report = validate_system(m.system);
      if (!report.empty()) {
        detail::print_violations(report, err);
        err << "model has " << report.size() << " violations; not checking\n";
        return 1;
      }
      Formula phi;
      std::string label;
      if (!formula_name.empty()) {
        const NamedFormula* p = m.property(formula_name);
        if (!p) {
          err << "error: no property named '" << formula_name << "'\n";
          return 2;
        }
        phi = p->formula;
        label = formula_name;
      } else if (!inline_formula.empty()) {
        current = "<inline>";
        phi = parse_formula(inline_formula, m.system);
        current = file;
        label = inline_formula;
      } else {
        err << "error: one of --formula or --inline is required\n";
        return 2;
      }
      CheckLimits lim;
      lim.max_states = max_states;
      lim.engine = engine;
      lim.deadlock_as_error = deadlock_as_error;
      lim.max_nbw_states = max_nbw;
      const Vocabulary vocab = Vocabulary::of(m.system);
      if (!abw_dot.empty()) {
        Abw abw(dual(phi), m.system.cv_space());
        if (!detail::write_file(abw_dot, abw.to_dot(vocab), err)) return 2;
      }
      Verdict v = model_check(m.system, phi, lim);
      if (!nbw_dot.empty()) {
        // rebuild to render the explored part; the check above owns its copy
        Abw abw(dual(phi), m.system.cv_space());
        Nbw nbw(abw, max_nbw);
        SystemSpace space = explore(m.system, {max_states, engine});
        detail::SpaceProduct g{space, nbw};
        if (!space.truncated) (void)find_accepting_cycle(g);
        if (!detail::write_file(nbw_dot, nbw.to_dot(), err)) return 2;
      }
      if (check_json) {
        out << verdict_json(vocab, label, v, engine, !no_timing).dump(2) << "\n";
      } else {
        out << label << ": " << outcome_name(v.outcome) << "\n";
        for (const auto& w : v.warnings) out << "warning: " << w << "\n";
        if (v.witness) out << format_lasso(m.system, *v.witness);
        for (const auto& s : v.deadlocks)
          if (v.outcome == Outcome::Deadlock) out << "deadlock: " << format_state(m.system, s) << "\n";
        out << "states: " << v.stats.states << ", transitions: " << v.stats.transitions
            << ", abw: " << v.stats.abw_states << ", nbw: " << v.stats.nbw_states
            << ", product: " << v.stats.product_states;
        if (!no_timing) out << ", ms: " << v.stats.millis;
        out << "\n";
      }
      switch (v.outcome) {
        case Outcome::Holds: return 0;
        case Outcome::Fails: return 1;
        default: return 3;
      }
    }

    if (*sat) {
      current = vocab_file;
      SourceModel m = load_model(vocab_file);
      const Vocabulary vocab = Vocabulary::of(m.system);
      current = "<formula>";
      Formula phi = parse_formula(sat_formula, vocab);
      SatLimits lim;
      lim.max_letters = max_letters;
      SatVerdict r = check_satisfiable(phi, vocab, lim);
      if (sat_json) {
        Json j;
        j["schema"] = 1;
        j["formula"] = sat_formula;
        j["outcome"] = r.sat ? "sat" : "unsat";
        if (r.witness) j["witness"] = lasso_json(vocab, *r.witness);
        j["stats"] = Json{{"state_letters", r.state_letters},
                          {"obs_letters", r.obs_letters},
                          {"abw_states", r.abw_states},
                          {"nbw_states", r.nbw_states}};
        out << j.dump(2) << "\n";
      } else {
        out << (r.sat ? "sat" : "unsat") << "\n";
        if (r.witness) {
          auto emit = [&](const std::vector<LassoStep>& xs, const char* tag) {
            for (const auto& s : xs)
              out << tag << " " << observation_json(vocab, s.obs).dump() << " "
                  << state_json(vocab, s.state).dump() << "\n";
          };
          emit(r.witness->prefix, "prefix");
          emit(r.witness->cycle, " cycle");
        }
      }
      return r.sat ? 0 : 1;
    }
  } catch (const ParseError& e) {
    err << current << ":" << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    err << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    err << current << ": model error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

inline int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, out, err);
}

}  // namespace recipe
