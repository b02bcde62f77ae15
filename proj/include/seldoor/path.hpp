#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seldoor/error.hpp"
#include "seldoor/graph.hpp"

namespace seldoor {

// Orientation of one step of a path, relative to the walking direction.
// forward: a directed edge pointing with the walk, backward: a directed edge
// pointing against it, bidirected: a bidirected edge.
enum class EdgeMark { forward, backward, bidirected };

// A simple path: distinct vertices plus one mark per step. Two vertices can
// be joined by both a directed and a bidirected edge, so the same vertex
// sequence may appear with different mark sequences; those are distinct
// paths.
struct Path {
  std::vector<int> vertices;
  std::vector<EdgeMark> marks;
};

inline bool operator==(const Path& l, const Path& r) {
  return l.vertices == r.vertices && l.marks == r.marks;
}

// "A <- B <-> C -> D" rendering; used in reports and witnesses.
inline std::string format_path(const Admg& g, const Path& p) {
  std::string out;
  for (std::size_t k = 0; k < p.vertices.size(); ++k) {
    if (k > 0) {
      switch (p.marks[k - 1]) {
        case EdgeMark::forward: out += " -> "; break;
        case EdgeMark::backward: out += " <- "; break;
        case EdgeMark::bidirected: out += " <-> "; break;
      }
    }
    out += g.name(p.vertices[k]);
  }
  return out;
}

inline bool is_directed_path(const Path& p) {
  for (EdgeMark m : p.marks) {
    if (m != EdgeMark::forward) return false;
  }
  return p.vertices.size() >= 2;
}

// Back-door path: the first step either points into the first vertex or is
// bidirected.
inline bool is_backdoor_path(const Path& p) {
  if (p.vertices.size() < 2) return false;
  return p.marks[0] == EdgeMark::backward || p.marks[0] == EdgeMark::bidirected;
}

namespace detail {

inline int mark_rank(EdgeMark m) { return static_cast<int>(m); }

// Both neighbouring steps point into the interior vertex at position k:
// the collider patterns -> v <-, -> v <->, <-> v <-, <-> v <->.
inline bool is_collider_at(const Path& p, std::size_t k) {
  const EdgeMark before = p.marks[k - 1];
  const EdgeMark after = p.marks[k];
  const bool into_from_left = before == EdgeMark::forward || before == EdgeMark::bidirected;
  const bool into_from_right = after == EdgeMark::backward || after == EdgeMark::bidirected;
  return into_from_left && into_from_right;
}

inline bool has_collider(const Path& p) {
  for (std::size_t k = 1; k + 1 < p.vertices.size(); ++k) {
    if (is_collider_at(p, k)) return true;
  }
  return false;
}

// Blocking over interior vertices only. A set member that happens to be a
// path endpoint neither blocks nor unblocks anything here; public callers
// rule that case out, criterion internals rely on it being vacuous.
inline bool blocked_by(const Path& p, VertexMask z, const std::vector<VertexMask>& desc) {
  for (std::size_t k = 1; k + 1 < p.vertices.size(); ++k) {
    const int v = p.vertices[k];
    if (is_collider_at(p, k)) {
      // v-structure clause: neither the collider nor any descendant is in z.
      if (((bit(v) | desc[static_cast<std::size_t>(v)]) & z) == 0) return true;
    } else {
      if (bit(v) & z) return true;
    }
  }
  return false;
}

struct Step {
  int next;
  EdgeMark mark;
};

// Adjacency as ordered step lists, so the DFS below emits paths in
// lexicographic order of the interleaved (vertex, mark) sequence with
// forward < backward < bidirected.
inline std::vector<std::vector<Step>> step_lists(const Admg& g) {
  const int n = g.vertex_count();
  std::vector<std::vector<Step>> steps(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    auto& row = steps[static_cast<std::size_t>(v)];
    for (int w = 0; w < n; ++w) {
      if (g.has_directed(v, w)) row.push_back({w, EdgeMark::forward});
      if (g.has_directed(w, v)) row.push_back({w, EdgeMark::backward});
      if (g.has_bidirected(v, w)) row.push_back({w, EdgeMark::bidirected});
    }
  }
  return steps;
}

inline void check_cap(const Admg& g, int vertex_cap) {
  if (g.vertex_count() > vertex_cap) {
    throw Error(Errc::graph_too_large,
                "graph has " + std::to_string(g.vertex_count()) +
                    " vertices; path enumeration is capped at " + std::to_string(vertex_cap));
  }
}

template <class Fn>
void for_each_path(const std::vector<std::vector<Step>>& steps, int from, int to, Fn&& fn) {
  Path p;
  p.vertices.push_back(from);
  VertexMask used = bit(from);
  // Explicit stack of step indices per depth.
  std::vector<std::size_t> cursor{0};
  while (!cursor.empty()) {
    const int v = p.vertices.back();
    auto& idx = cursor.back();
    const auto& row = steps[static_cast<std::size_t>(v)];
    if (idx >= row.size()) {
      cursor.pop_back();
      p.vertices.pop_back();
      if (!p.marks.empty()) p.marks.pop_back();
      used &= ~bit(v);
      continue;
    }
    const Step s = row[idx++];
    if (used & bit(s.next)) continue;
    p.vertices.push_back(s.next);
    p.marks.push_back(s.mark);
    if (s.next == to) {
      fn(p);
      p.vertices.pop_back();
      p.marks.pop_back();
    } else {
      used |= bit(s.next);
      cursor.push_back(0);
    }
  }
}

}  // namespace detail

// Every simple path between `from` and `to`, in deterministic lexicographic
// order (vertex sequence first, marks as tie-break). Paths have at least one
// edge. Throws graph_too_large above the vertex cap.
inline std::vector<Path> enumerate_paths(const Admg& g, int from, int to,
                                         int vertex_cap = kDefaultVertexCap) {
  detail::check_vertex(g, from, "path endpoint");
  detail::check_vertex(g, to, "path endpoint");
  detail::check_cap(g, vertex_cap);
  if (from == to) return {};
  std::vector<Path> out;
  const auto steps = detail::step_lists(g);
  detail::for_each_path(steps, from, to, [&](const Path& p) { out.push_back(p); });
  return out;
}

// Definition of blocking. z blocks p iff z contains an interior non-collider
// of p, or some v-structure on p has neither its collider nor any descendant
// of the collider in z. Single-edge paths are never blocked. z must not
// contain either endpoint of p.
inline bool blocks(const Admg& g, const std::vector<int>& z, const Path& p) {
  if (p.vertices.size() < 2 || p.marks.size() + 1 != p.vertices.size()) {
    throw Error(Errc::unknown_vertex, "malformed path");
  }
  for (int v : p.vertices) detail::check_vertex(g, v, "path vertex");
  const VertexMask zm = detail::mask_of(z, g, "conditioning vertex");
  const VertexMask ends = detail::bit(p.vertices.front()) | detail::bit(p.vertices.back());
  if (zm & ends) {
    throw Error(Errc::endpoint_in_conditioning_set,
                "conditioning set contains a path endpoint");
  }
  return detail::blocked_by(p, zm, detail::descendant_masks(g));
}

}  // namespace seldoor
