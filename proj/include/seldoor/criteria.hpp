#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seldoor/error.hpp"
#include "seldoor/graph.hpp"
#include "seldoor/path.hpp"

namespace seldoor {

// Verdict of a graphical criterion. On failure, `clause` names the violated
// requirement and the witness fields carry the offending vertex and/or the
// lexicographically first violating path(s).
struct CriterionResult {
  bool satisfied = true;
  std::string clause;
  std::optional<int> witness_vertex;
  std::optional<Path> witness_path;
  // Only for the conditioned-descendant clause: the unblocked directed path
  // that makes the descendant's back-door paths relevant.
  std::optional<Path> witness_directed;
};

struct S1S2 {
  std::vector<int> s1;
  std::vector<int> s2;
};

namespace detail {

inline void check_query(const Admg& g, const std::vector<int>& z, int treatment, int outcome) {
  check_vertex(g, treatment, "treatment");
  check_vertex(g, outcome, "outcome");
  if (treatment == outcome) {
    throw Error(Errc::outcome_in_set, "treatment and outcome coincide: " + g.name(outcome));
  }
  VertexMask seen = 0;
  for (int v : z) {
    check_vertex(g, v, "adjustment vertex");
    if (v == outcome) throw Error(Errc::outcome_in_set, "adjustment set contains the outcome " + g.name(v));
    if (v == treatment) throw Error(Errc::query_vertex_in_z, "adjustment set contains the treatment " + g.name(v));
    if (seen & bit(v)) throw Error(Errc::duplicate_edge, "duplicate adjustment vertex " + g.name(v));
    seen |= bit(v);
  }
}

// First back-door path from `from` to `to` unblocked by zm, in enumeration
// order; nullopt when zm blocks them all.
inline std::optional<Path> first_open_backdoor(const Admg& g, int from, int to, VertexMask zm,
                                               const std::vector<VertexMask>& desc, int cap) {
  check_cap(g, cap);
  std::optional<Path> hit;
  const auto steps = step_lists(g);
  for_each_path(steps, from, to, [&](const Path& p) {
    if (hit) return;
    if (is_backdoor_path(p) && !blocked_by(p, zm, desc)) hit = p;
  });
  return hit;
}

inline std::optional<Path> first_open_directed(const Admg& g, int from, int to, VertexMask zm,
                                               const std::vector<VertexMask>& desc, int cap) {
  check_cap(g, cap);
  std::optional<Path> hit;
  const auto steps = step_lists(g);
  for_each_path(steps, from, to, [&](const Path& p) {
    if (hit) return;
    if (is_directed_path(p) && !blocked_by(p, zm, desc)) hit = p;
  });
  return hit;
}

}  // namespace detail

// Back-door criterion for z relative to (treatment, outcome): z contains no
// descendant of the treatment, and z blocks every back-door path from the
// treatment to the outcome.
inline CriterionResult backdoor_criterion(const Admg& g, const std::vector<int>& z, int treatment,
                                          int outcome, int vertex_cap = kDefaultVertexCap) {
  detail::check_query(g, z, treatment, outcome);
  detail::check_cap(g, vertex_cap);
  const auto desc = detail::descendant_masks(g);
  const VertexMask zm = detail::mask_of(z, g, "adjustment vertex");
  const VertexMask bad = zm & desc[static_cast<std::size_t>(treatment)];
  if (bad) {
    CriterionResult r;
    r.satisfied = false;
    r.clause = "descendant-in-adjustment";
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (bad & detail::bit(v)) {
        r.witness_vertex = v;
        break;
      }
    }
    return r;
  }
  if (auto open = detail::first_open_backdoor(g, treatment, outcome, zm, desc, vertex_cap)) {
    CriterionResult r;
    r.satisfied = false;
    r.clause = "unblocked-backdoor";
    r.witness_path = std::move(*open);
    return r;
  }
  return CriterionResult{};
}

// Relaxation of the back-door criterion that tolerates conditioned
// descendants of the treatment. Requirements, checked in this order:
//  (a) z blocks every back-door path from the treatment to the outcome;
//  (b) for every member k of z that is a descendant of the treatment and is
//      reached from it by some directed path unblocked by
//      (z + treatment) - k, every back-door path from k to the outcome is
//      blocked by (z + treatment) - k.
// With `strict_literal_set` the blocking set of (b)'s back-door clause drops
// the treatment, i.e. z - k alone must do the blocking.
inline CriterionResult selective_door_criterion(const Admg& g, const std::vector<int>& z,
                                                int treatment, int outcome,
                                                bool strict_literal_set = false,
                                                int vertex_cap = kDefaultVertexCap) {
  detail::check_query(g, z, treatment, outcome);
  detail::check_cap(g, vertex_cap);
  const auto desc = detail::descendant_masks(g);
  const VertexMask zm = detail::mask_of(z, g, "adjustment vertex");
  if (auto open = detail::first_open_backdoor(g, treatment, outcome, zm, desc, vertex_cap)) {
    CriterionResult r;
    r.satisfied = false;
    r.clause = "unblocked-backdoor";
    r.witness_path = std::move(*open);
    return r;
  }
  const VertexMask conditioned_desc = zm & desc[static_cast<std::size_t>(treatment)];
  for (int k = 0; k < g.vertex_count(); ++k) {
    if (!(conditioned_desc & detail::bit(k))) continue;
    // Blocking happens at interior vertices only, so including the treatment
    // endpoint in the directed-path check is vacuous; the mask below serves
    // both clauses.
    const VertexMask augmented = (zm | detail::bit(treatment)) & ~detail::bit(k);
    auto trigger = detail::first_open_directed(g, treatment, k, augmented, desc, vertex_cap);
    if (!trigger) continue;
    const VertexMask block_set = strict_literal_set ? (zm & ~detail::bit(k)) : augmented;
    if (auto open = detail::first_open_backdoor(g, k, outcome, block_set, desc, vertex_cap)) {
      CriterionResult r;
      r.satisfied = false;
      r.clause = "conditioned-descendant";
      r.witness_vertex = k;
      r.witness_directed = std::move(*trigger);
      r.witness_path = std::move(*open);
      return r;
    }
  }
  return CriterionResult{};
}

// Precondition under which the coefficient on the treatment equals the
// direct-edge coefficient: z avoids the outcome's descendants and blocks
// every path between treatment and outcome other than the single directed
// edge treatment -> outcome.
inline CriterionResult single_door_precondition(const Admg& g, const std::vector<int>& z,
                                                int treatment, int outcome,
                                                int vertex_cap = kDefaultVertexCap) {
  detail::check_query(g, z, treatment, outcome);
  detail::check_cap(g, vertex_cap);
  const auto desc = detail::descendant_masks(g);
  const VertexMask zm = detail::mask_of(z, g, "adjustment vertex");
  const VertexMask bad = zm & desc[static_cast<std::size_t>(outcome)];
  if (bad) {
    CriterionResult r;
    r.satisfied = false;
    r.clause = "descendant-of-outcome-in-adjustment";
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (bad & detail::bit(v)) {
        r.witness_vertex = v;
        break;
      }
    }
    return r;
  }
  CriterionResult r;
  const auto steps = detail::step_lists(g);
  detail::for_each_path(steps, treatment, outcome, [&](const Path& p) {
    if (!r.satisfied) return;
    const bool is_the_edge = p.vertices.size() == 2 && p.marks[0] == EdgeMark::forward;
    if (is_the_edge) return;
    if (!detail::blocked_by(p, zm, desc)) {
      r.satisfied = false;
      r.clause = "unblocked-path";
      r.witness_path = p;
    }
  });
  return r;
}

// Split of an explanatory set s (relative to outcome i): a member k lands in
// s1 when s - k leaves some back-door path from k to i unblocked, in s2
// otherwise.
inline S1S2 partition_s1_s2(const Admg& g, const std::vector<int>& s, int i,
                            int vertex_cap = kDefaultVertexCap) {
  detail::check_vertex(g, i, "outcome");
  detail::check_cap(g, vertex_cap);
  VertexMask seen = 0;
  for (int v : s) {
    detail::check_vertex(g, v, "explanatory vertex");
    if (v == i) throw Error(Errc::outcome_in_set, "explanatory set contains the outcome " + g.name(v));
    if (seen & detail::bit(v)) throw Error(Errc::duplicate_edge, "duplicate explanatory vertex " + g.name(v));
    seen |= detail::bit(v);
  }
  const auto desc = detail::descendant_masks(g);
  const VertexMask sm = seen;
  S1S2 out;
  for (int k = 0; k < g.vertex_count(); ++k) {
    if (!(sm & detail::bit(k))) continue;
    const VertexMask rest = sm & ~detail::bit(k);
    if (detail::first_open_backdoor(g, k, i, rest, desc, vertex_cap)) {
      out.s1.push_back(k);
    } else {
      out.s2.push_back(k);
    }
  }
  return out;
}

// Three equivalent statements of "no residual confounding" for the set s
// relative to outcome i, evaluated independently so they can cross-check
// each other:
//  (i)   for each j in s, s - j passes the selective-door criterion for (j, i);
//  (ii)  for each j in s, s - j blocks every back-door path from j to i;
//  (iii) for each j in s, s - j blocks every back-door path from j to i that
//        contains no v-structure.
struct NoConfoundingResult {
  bool selective_all = true;
  bool backdoor_blocked_all = true;
  bool vstructure_free_blocked_all = true;
  bool agree() const {
    return selective_all == backdoor_blocked_all && backdoor_blocked_all == vstructure_free_blocked_all;
  }
};

inline NoConfoundingResult no_confounding_equivalence(const Admg& g, const std::vector<int>& s,
                                                      int i, int vertex_cap = kDefaultVertexCap) {
  detail::check_vertex(g, i, "outcome");
  detail::check_cap(g, vertex_cap);
  NoConfoundingResult out;
  const auto desc = detail::descendant_masks(g);
  const auto steps = detail::step_lists(g);
  for (int j : s) {
    detail::check_vertex(g, j, "explanatory vertex");
    if (j == i) throw Error(Errc::outcome_in_set, "explanatory set contains the outcome " + g.name(j));
    std::vector<int> rest;
    VertexMask rest_mask = 0;
    for (int v : s) {
      if (v != j) {
        rest.push_back(v);
        rest_mask |= detail::bit(v);
      }
    }
    if (out.selective_all && !selective_door_criterion(g, rest, j, i, false, vertex_cap).satisfied) {
      out.selective_all = false;
    }
    if (out.backdoor_blocked_all || out.vstructure_free_blocked_all) {
      detail::for_each_path(steps, j, i, [&](const Path& p) {
        if (!is_backdoor_path(p)) return;
        if (detail::blocked_by(p, rest_mask, desc)) return;
        out.backdoor_blocked_all = false;
        if (!detail::has_collider(p)) out.vstructure_free_blocked_all = false;
      });
    }
  }
  return out;
}

}  // namespace seldoor
