#pragma once

#include <algorithm>

#include "cure/causal/graph.hpp"
#include "cure/causal/skeleton.hpp"

namespace cure::causal {

/// Orients a skeleton into a PAG: unshielded colliders first, then the
/// background knowledge (sources send tails out, arrowheads in), then chain
/// propagation (a *-> b o-* c with a, c non-adjacent gives b -> c) to a
/// fixpoint. Whatever is still unknown stays a circle.
inline Pag orient_pag(const Skeleton& skeleton, const StructuralConstraints& constraints) {
    Pag pag(skeleton);
    const auto n = pag.size();
    const auto& names = pag.vertices();

    // colliders i *-> k <-* j
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || !pag.adjacent(i, k)) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (j == k || !pag.adjacent(j, k) || pag.adjacent(i, j)) continue;
                if (auto v = skeleton.triple_votes.find({i, k, j}); v != skeleton.triple_votes.end() && v->second.first > 0) {
                    // majority rule: collider only when k sits in fewer than half of the separating sets
                    if (2 * v->second.second >= v->second.first) continue;
                } else {
                    const auto* sep = skeleton.sepset(i, j);
                    if (sep && std::find(sep->begin(), sep->end(), k) != sep->end()) continue;
                }
                if (constraints.forbids_direction(names[i], names[k]) || constraints.forbids_direction(names[j], names[k])) continue;
                pag.set_mark(i, k, Mark::arrow);
                pag.set_mark(j, k, Mark::arrow);
            }
        }
    }

    // background knowledge
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b || !pag.adjacent(a, b)) continue;
            if (constraints.is_source(names[a])) {
                pag.set_mark(b, a, Mark::tail);
                if (!constraints.is_source(names[b])) pag.set_mark(a, b, Mark::arrow);
            } else if (constraints.forbids_direction(names[b], names[a])) {
                // b -> a is ruled out, so no arrowhead may sit at a together with a tail at b
                if (pag.mark(a, b) == Mark::circle) pag.set_mark(a, b, Mark::arrow);
                if (pag.mark(b, a) == Mark::arrow && pag.mark(a, b) != Mark::arrow) pag.set_mark(b, a, Mark::circle);
            }
        }
    }

    // chain propagation
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t a = 0; a < n; ++a) {
                if (a == b || !pag.adjacent(a, b) || pag.mark(a, b) != Mark::arrow) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    if (c == a || c == b || !pag.adjacent(b, c) || pag.adjacent(a, c)) continue;
                    if (pag.mark(c, b) != Mark::circle) continue;
                    if (constraints.forbids_direction(names[b], names[c])) continue;
                    pag.set_mark(c, b, Mark::tail);
                    pag.set_mark(b, c, Mark::arrow);
                    changed = true;
                }
            }
        }
    }
    return pag;
}

} // namespace cure::causal
