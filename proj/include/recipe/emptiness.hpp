#pragma once

// Accepting-cycle detection on implicitly given Büchi graphs by two-colour
// nested depth-first search, with lasso extraction.
//
// A graph type G provides:
//   using Node, Label, Hash;
//   std::vector<Node> initial();
//   void successors(const Node&, std::vector<std::pair<Label, Node>>&);
//   bool accepting(const Node&);

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "recipe/core.hpp"

namespace recipe {

template <class Node, class Label>
struct CyclePath {
  struct Step {
    Node node;
    Label label;  // label of the edge leaving `node`
  };
  std::vector<Step> prefix;  // initial node up to (excluding) the cycle start
  std::vector<Step> cycle;   // cycle.front().node is reached again after the last step
};

template <class G>
class NestedDfs {
 public:
  using Node = typename G::Node;
  using Label = typename G::Label;
  using Path = CyclePath<Node, Label>;

  explicit NestedDfs(G& graph, std::size_t max_nodes = std::size_t{1} << 24)
      : g_(graph), max_nodes_(max_nodes) {}

  std::optional<Path> run() {
    for (const Node& init : g_.initial()) {
      if (blue_.count(init)) continue;
      mark_blue(init);
      std::vector<Frame> stack;
      stack.push_back(make_frame(init));
      while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next < top.succ.size()) {
          const Node m = top.succ[top.next++].second;
          if (!blue_.count(m)) {
            mark_blue(m);
            stack.push_back(make_frame(m));
          }
          continue;
        }
        if (g_.accepting(top.node)) {
          if (auto cycle = red_search(top.node)) {
            Path p;
            for (std::size_t i = 0; i + 1 < stack.size(); ++i)
              p.prefix.push_back({stack[i].node, stack[i].succ[stack[i].next - 1].first});
            p.cycle = std::move(*cycle);
            return p;
          }
        }
        stack.pop_back();
      }
    }
    return std::nullopt;
  }

  std::size_t visited() const { return blue_.size(); }

 private:
  struct Frame {
    Node node;
    std::vector<std::pair<Label, Node>> succ;
    std::size_t next = 0;
  };

  Frame make_frame(const Node& n) {
    Frame f{n, {}, 0};
    g_.successors(n, f.succ);
    return f;
  }

  void mark_blue(const Node& n) {
    blue_.insert(n);
    if (blue_.size() > max_nodes_)
      throw ResourceError("product exceeds " + std::to_string(max_nodes_) + " states");
  }

  // Searches for a path from `seed` back to itself through unflagged nodes.
  std::optional<std::vector<typename Path::Step>> red_search(const Node& seed) {
    std::vector<Frame> stack;
    stack.push_back(make_frame(seed));
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.succ.size()) {
        const auto& [label, m] = top.succ[top.next++];
        if (m == seed) {
          std::vector<typename Path::Step> cycle;
          for (const auto& f : stack) cycle.push_back({f.node, f.succ[f.next - 1].first});
          return cycle;
        }
        if (!red_.count(m)) {
          red_.insert(m);
          stack.push_back(make_frame(m));
        }
        continue;
      }
      stack.pop_back();
    }
    return std::nullopt;
  }

  G& g_;
  std::size_t max_nodes_;
  std::unordered_set<Node, typename G::Hash> blue_;
  std::unordered_set<Node, typename G::Hash> red_;
};

template <class G>
auto find_accepting_cycle(G& graph, std::size_t max_nodes = std::size_t{1} << 24) {
  return NestedDfs<G>(graph, max_nodes).run();
}

}  // namespace recipe
