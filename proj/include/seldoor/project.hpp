#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "seldoor/error.hpp"
#include "seldoor/graph.hpp"

namespace seldoor {

// A vertex whose mechanism is an arbitrary function of earlier vertices
// rather than a linear equation. In the projected diagram it keeps no
// incoming directed edges: the function value is folded into its error term.
struct NonlinearVertex {
  int vertex = 0;
  std::vector<int> args;
};

// Rewrites a system with nonlinear vertices as a diagram the linear
// machinery can analyse. Each nonlinear vertex loses its incoming directed
// edges and gains bidirected edges to every vertex whose error term can be
// correlated with the folded function value: any vertex contributing an
// error term to the function's arguments (the arguments and their ancestors,
// expanded through nested nonlinear vertices), plus anything tied to those
// by an existing bidirected edge. Pairs listed in `declared_independent` are
// exempted; everything else stays, which errs on the side of extra
// confounding.
inline Admg project_nonlinear(const Admg& g, const std::vector<NonlinearVertex>& nonlinear,
                              const std::vector<std::pair<int, int>>& declared_independent = {}) {
  const int n = g.vertex_count();
  VertexMask nl_mask = 0;
  for (const auto& h : nonlinear) {
    detail::check_vertex(g, h.vertex, "nonlinear vertex");
    if (nl_mask & detail::bit(h.vertex)) {
      throw Error(Errc::duplicate_edge, "vertex " + g.name(h.vertex) + " declared nonlinear twice");
    }
    nl_mask |= detail::bit(h.vertex);
    for (int a : h.args) {
      detail::check_vertex(g, a, "nonlinear argument");
      if (a >= h.vertex) {
        throw Error(Errc::order_violation, "argument " + g.name(a) + " does not precede " + g.name(h.vertex));
      }
    }
  }
  VertexMask indep_seen = 0;
  (void)indep_seen;
  for (const auto& pr : declared_independent) {
    detail::check_vertex(g, pr.first, "independence declaration");
    detail::check_vertex(g, pr.second, "independence declaration");
  }

  const auto anc = detail::ancestor_masks(g);

  // err_support[v]: vertices whose error terms the error of v depends on.
  // Linear vertices own exactly their own error; a nonlinear vertex absorbs
  // the errors of its arguments' ancestral closures.
  std::vector<VertexMask> err_support(static_cast<std::size_t>(n));
  std::vector<const NonlinearVertex*> decl(static_cast<std::size_t>(n), nullptr);
  for (const auto& h : nonlinear) decl[static_cast<std::size_t>(h.vertex)] = &h;
  for (int v = 0; v < n; ++v) {
    if (decl[static_cast<std::size_t>(v)] == nullptr) {
      err_support[static_cast<std::size_t>(v)] = detail::bit(v);
      continue;
    }
    VertexMask closure = 0;
    for (int a : decl[static_cast<std::size_t>(v)]->args) {
      closure |= detail::bit(a) | anc[static_cast<std::size_t>(a)];
    }
    VertexMask support = 0;
    for (int w = 0; w < n; ++w) {
      if (closure & detail::bit(w)) support |= err_support[static_cast<std::size_t>(w)];
    }
    err_support[static_cast<std::size_t>(v)] = support;
  }

  const auto correlated = [&](int x, int y) {
    const VertexMask sx = err_support[static_cast<std::size_t>(x)];
    const VertexMask sy = err_support[static_cast<std::size_t>(y)];
    if (sx & sy) return true;
    for (const auto& e : g.bidirected()) {
      const VertexMask ea = detail::bit(e.a);
      const VertexMask eb = detail::bit(e.b);
      if (((sx & ea) && (sy & eb)) || ((sx & eb) && (sy & ea))) return true;
    }
    return false;
  };
  const auto declared = [&](int x, int y) {
    for (const auto& pr : declared_independent) {
      if ((pr.first == x && pr.second == y) || (pr.first == y && pr.second == x)) return true;
    }
    return false;
  };

  std::vector<DirectedEdge> directed;
  for (const auto& e : g.directed()) {
    if (nl_mask & detail::bit(e.to)) continue;
    directed.push_back(e);
  }
  std::vector<BidirectedEdge> bidirected = g.bidirected();
  const auto have = [&](int a, int b) {
    for (const auto& e : bidirected) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return true;
    }
    return false;
  };
  for (const auto& h : nonlinear) {
    for (int w = 0; w < n; ++w) {
      if (w == h.vertex) continue;
      if (declared(h.vertex, w)) continue;
      if (!correlated(h.vertex, w)) continue;
      const int a = std::min(h.vertex, w);
      const int b = std::max(h.vertex, w);
      if (!have(a, b)) bidirected.push_back({a, b});
    }
  }
  return Admg(g.names(), std::move(directed), std::move(bidirected));
}

}  // namespace seldoor
