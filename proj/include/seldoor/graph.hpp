#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seldoor/error.hpp"

namespace seldoor {

// Vertex indices refer to positions in the vertex-name list. The list order
// is the causal ordering: every directed edge must run from a lower index to
// a higher one, which is what makes the graph acyclic and the coefficient
// matrix of any model over it strictly lower triangular.
struct DirectedEdge {
  int from = 0;
  int to = 0;
};

// Bidirected edges are unordered; they mark correlated error terms.
struct BidirectedEdge {
  int a = 0;
  int b = 0;
};

inline bool operator==(DirectedEdge l, DirectedEdge r) { return l.from == r.from && l.to == r.to; }
inline bool operator==(BidirectedEdge l, BidirectedEdge r) {
  return (l.a == r.a && l.b == r.b) || (l.a == r.b && l.b == r.a);
}

// Path-enumeration based operations refuse graphs above this vertex count
// unless the caller raises the cap explicitly.
inline constexpr int kDefaultVertexCap = 16;
// Hard limit of the internal vertex-set representation.
inline constexpr int kMaxVertices = 64;

using VertexMask = std::uint64_t;

class Admg {
 public:
  Admg() = default;
  Admg(std::vector<std::string> names, std::vector<DirectedEdge> directed,
       std::vector<BidirectedEdge> bidirected)
      : names_(std::move(names)),
        directed_(std::move(directed)),
        bidirected_(std::move(bidirected)) {}

  int vertex_count() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
  const std::vector<DirectedEdge>& directed() const { return directed_; }
  const std::vector<BidirectedEdge>& bidirected() const { return bidirected_; }

  int index_of(const std::string& name) const {
    for (int i = 0; i < vertex_count(); ++i) {
      if (names_[static_cast<std::size_t>(i)] == name) return i;
    }
    throw Error(Errc::unknown_vertex, "no vertex named '" + name + "'");
  }

  bool has_directed(int from, int to) const {
    for (const auto& e : directed_) {
      if (e.from == from && e.to == to) return true;
    }
    return false;
  }

  bool has_bidirected(int a, int b) const {
    for (const auto& e : bidirected_) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return true;
    }
    return false;
  }

 private:
  std::vector<std::string> names_;
  std::vector<DirectedEdge> directed_;
  std::vector<BidirectedEdge> bidirected_;
};

// Structural soundness: vertex names unique and nonempty, edge endpoints in
// range, no self loops, directed edges respect the causal ordering, no
// duplicate edges in either edge set.
inline ValidationResult validate(const Admg& g) {
  const int n = g.vertex_count();
  if (n == 0) return invalid(Errc::unknown_vertex, "graph has no vertices");
  if (n > kMaxVertices) {
    return invalid(Errc::graph_too_large,
                   "graph has " + std::to_string(n) + " vertices; the representation limit is " +
                       std::to_string(kMaxVertices));
  }
  for (int i = 0; i < n; ++i) {
    if (g.name(i).empty()) return invalid(Errc::unknown_vertex, "vertex " + std::to_string(i) + " has an empty name");
    for (int j = i + 1; j < n; ++j) {
      if (g.name(i) == g.name(j)) {
        return invalid(Errc::duplicate_edge, "duplicate vertex name '" + g.name(i) + "'");
      }
    }
  }
  const auto edge_str = [&](int a, const char* arrow, int b) {
    return g.name(a) + arrow + g.name(b);
  };
  for (std::size_t k = 0; k < g.directed().size(); ++k) {
    const auto e = g.directed()[k];
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      return invalid(Errc::unknown_vertex, "directed edge " + std::to_string(k) + " has an out-of-range endpoint");
    }
    if (e.from == e.to) return invalid(Errc::self_loop, "self loop on " + g.name(e.from));
    if (e.from > e.to) {
      return invalid(Errc::cycle_or_order_violation,
                     "directed edge " + edge_str(e.from, " -> ", e.to) + " runs against the causal ordering");
    }
    for (std::size_t l = k + 1; l < g.directed().size(); ++l) {
      if (g.directed()[l] == e) {
        return invalid(Errc::duplicate_edge, "duplicate directed edge " + edge_str(e.from, " -> ", e.to));
      }
    }
  }
  for (std::size_t k = 0; k < g.bidirected().size(); ++k) {
    const auto e = g.bidirected()[k];
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) {
      return invalid(Errc::unknown_vertex, "bidirected edge " + std::to_string(k) + " has an out-of-range endpoint");
    }
    if (e.a == e.b) return invalid(Errc::self_loop, "bidirected self loop on " + g.name(e.a));
    for (std::size_t l = k + 1; l < g.bidirected().size(); ++l) {
      if (g.bidirected()[l] == e) {
        return invalid(Errc::duplicate_edge, "duplicate bidirected edge " + edge_str(e.a, " <-> ", e.b));
      }
    }
  }
  return valid();
}

namespace detail {

inline VertexMask bit(int v) { return VertexMask{1} << v; }

inline void check_vertex(const Admg& g, int v, const char* what) {
  if (v < 0 || v >= g.vertex_count()) {
    throw Error(Errc::unknown_vertex, std::string(what) + " index " + std::to_string(v) + " is out of range");
  }
}

inline VertexMask mask_of(const std::vector<int>& vs, const Admg& g, const char* what) {
  VertexMask m = 0;
  for (int v : vs) {
    check_vertex(g, v, what);
    m |= bit(v);
  }
  return m;
}

// Strict descendant masks for every vertex, by reverse topological sweep.
inline std::vector<VertexMask> descendant_masks(const Admg& g) {
  const int n = g.vertex_count();
  std::vector<VertexMask> de(static_cast<std::size_t>(n), 0);
  for (int v = n - 1; v >= 0; --v) {
    for (const auto& e : g.directed()) {
      if (e.from == v) de[static_cast<std::size_t>(v)] |= bit(e.to) | de[static_cast<std::size_t>(e.to)];
    }
  }
  return de;
}

// Strict ancestor masks, by forward topological sweep.
inline std::vector<VertexMask> ancestor_masks(const Admg& g) {
  const int n = g.vertex_count();
  std::vector<VertexMask> an(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v) {
    for (const auto& e : g.directed()) {
      if (e.to == v) an[static_cast<std::size_t>(v)] |= bit(e.from) | an[static_cast<std::size_t>(e.from)];
    }
  }
  return an;
}

inline std::vector<int> mask_to_vector(VertexMask m, int n) {
  std::vector<int> out;
  for (int v = 0; v < n; ++v) {
    if (m & bit(v)) out.push_back(v);
  }
  return out;
}

}  // namespace detail

// Strict ancestors of i: vertices with a directed path into i. Excludes i.
inline std::vector<int> ancestors(const Admg& g, int i) {
  detail::check_vertex(g, i, "vertex");
  return detail::mask_to_vector(detail::ancestor_masks(g)[static_cast<std::size_t>(i)], g.vertex_count());
}

// Strict descendants of i: vertices reachable from i by a directed path.
inline std::vector<int> descendants(const Admg& g, int i) {
  detail::check_vertex(g, i, "vertex");
  return detail::mask_to_vector(detail::descendant_masks(g)[static_cast<std::size_t>(i)], g.vertex_count());
}

}  // namespace seldoor
