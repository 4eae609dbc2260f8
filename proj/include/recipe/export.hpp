#pragma once

// DOT and JSON renderings of an explored state space.

#include <string>

#include <nlohmann/json.hpp>

#include "recipe/checker.hpp"
#include "recipe/semantics.hpp"

namespace recipe {

inline std::string space_to_dot(const SystemDef& sys, const SystemSpace& space) {
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '"' || c == '\\') o += '\\';
      o += c;
    }
    return o;
  };
  std::string out = "digraph space {\n  node [shape=box, fontsize=10];\n";
  std::vector<char> is_init(space.states.size(), 0), is_dead(space.states.size(), 0);
  for (auto i : space.initials) is_init[i] = 1;
  for (auto i : space.deadlocks) is_dead[i] = 1;
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    out += "  s" + std::to_string(i) + " [label=\"" + std::to_string(i) + ": " +
           esc(format_state(sys, space.states[i])) + "\"";
    if (is_init[i]) out += ", penwidth=2";
    if (is_dead[i]) out += ", color=red";
    out += "];\n";
  }
  for (std::size_t i = 0; i < space.states.size(); ++i)
    for (const auto& e : space.edges[i])
      out += "  s" + std::to_string(i) + " -> s" + std::to_string(e.to) + " [label=\"" +
             esc(format_observation(sys, space.observations[e.obs])) + "\"];\n";
  out += "}\n";
  return out;
}

inline Json space_to_json(const SystemDef& sys, const SystemSpace& space) {
  const Vocabulary v = Vocabulary::of(sys);
  Json j;
  j["schema"] = 1;
  Json states = Json::array();
  for (std::size_t i = 0; i < space.states.size(); ++i)
    states.push_back(Json{{"id", i}, {"values", state_json(v, space.states[i].values)}});
  j["states"] = states;
  j["initials"] = space.initials;
  Json obs = Json::array();
  for (std::size_t i = 0; i < space.observations.size(); ++i) {
    Json o = observation_json(v, space.observations[i]);
    o["id"] = i;
    obs.push_back(o);
  }
  j["observations"] = obs;
  Json edges = Json::array();
  for (std::size_t i = 0; i < space.states.size(); ++i)
    for (const auto& e : space.edges[i])
      edges.push_back(Json{{"from", i}, {"observation", e.obs}, {"to", e.to}});
  j["transitions"] = edges;
  j["deadlocks"] = space.deadlocks;
  j["truncated"] = space.truncated;
  return j;
}

}  // namespace recipe
