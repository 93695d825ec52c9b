#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "newcomb/bayes_net.hpp"

namespace newcomb {

// Rendering hints for one stage of a transformation trace. Severed edges are
// ghosts of removed arrows: they are drawn dashed grey and do not exist in
// the network itself.
struct DotOptions {
  std::string graph_name = "network";
  std::string decision_node;                                       // double boundary
  std::vector<std::string> logical_nodes;                          // double octagons
  std::vector<std::pair<std::string, std::string>> severed_edges;  // (from, to)
};

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline void write_dot(std::ostream& os, const Network& net, const DotOptions& opt = {}) {
  os << "digraph " << detail::dot_quote(opt.graph_name) << " {\n";
  os << "  rankdir=TB;\n";
  for (const auto& n : net.nodes()) {
    os << "  " << detail::dot_quote(n.id) << " [shape=";
    bool logical = false;
    for (const auto& id : opt.logical_nodes)
      if (id == n.id) logical = true;
    if (logical)
      os << "doubleoctagon";
    else if (n.id == opt.decision_node)
      os << "ellipse, peripheries=2";
    else
      os << "ellipse";
    os << "];\n";
  }
  for (const auto& n : net.nodes())
    for (const auto& p : n.parents)
      os << "  " << detail::dot_quote(p) << " -> " << detail::dot_quote(n.id) << ";\n";
  for (const auto& [from, to] : opt.severed_edges)
    os << "  " << detail::dot_quote(from) << " -> " << detail::dot_quote(to)
       << " [style=dashed, color=grey];\n";
  os << "}\n";
}

}  // namespace newcomb
