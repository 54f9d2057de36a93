// ε-bisimulation and its relatives on a single labeled Markov chain:
// pairwise flow checks, the greatest ε-bisimilarity, weight-function
// extraction, ε-APB, the up-to-(n, ε) hierarchy, transitive ε-bisimulations,
// and exact (ε = 0) bisimilarity by partition refinement.
#pragma once

#include "abst/lmc.hpp"
#include "abst/rat.hpp"
#include "abst/relations.hpp"
#include "abst/solvers.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace abst {

// A violated set witness: P-mass of `set` under s exceeds the allowed mass
// under t. `set` is ascending; lhs > rhs certifies the violation. For the
// flow check, set ⊆ Succ(s) and rhs = P(t)(R(set)) + ε.
struct Witness {
  std::size_t s = 0, t = 0;
  std::vector<std::size_t> set;
  Rat lhs, rhs;
};

struct PairCheck {
  bool ok = true;
  std::optional<Witness> witness;
};

// One direction of the ε-bisimulation transfer condition for (s, t):
// ∀A ⊆ Succ(s): P(s)(A) ≤ P(t)(R(A)) + ε, decided by max-flow feasibility.
// On failure the witness is the lexicographically least violating A among
// minimum cuts (least by sorted-sequence comparison, prefixes first).
PairCheck pair_check_eps(const Lmc& m, const Relation& r, std::size_t s,
                         std::size_t t, const Rat& eps);

struct CheckReport {
  bool ok = true;
  std::string reason;  // empty when ok
  std::optional<Witness> witness;
};

// Reflexive-symmetric r is an ε-bisimulation: related states equally labeled
// and the flow condition holds in both directions for every pair.
CheckReport is_eps_bisimulation(const Lmc& m, const Relation& r, const Rat& eps);

// Greatest ε-bisimulation: start from all equally-labeled pairs, delete any
// pair that fails against the current relation, restart the scan after every
// deletion, stop at the fixpoint.
Relation greatest_eps_bisimilarity(const Lmc& m, const Rat& eps);

// Weight function for a passing pair: w[s'][t'] is the conditional
// distribution Δ(s')(t') over Succ(t), satisfying
//   (1) P(t)(t') = Σ_{s'} P(s)(s') · Δ(s')(t')            exactly, and
//   (2) Σ_{s'} P(s)(s') · Δ(s')(R(s') ∩ Succ(t)) ≥ 1 − ε.
// Extracted from a maximum flow, with residual and deficit mass completed in
// canonical (ascending index) order; re-verified before returning.
struct WeightFunction {
  std::map<std::size_t, std::map<std::size_t, Rat>> w;
};
std::optional<WeightFunction> extract_weight_function(const Lmc& m, const Relation& r,
                                                      std::size_t s, std::size_t t,
                                                      const Rat& eps);
// Exact re-check of conditions (1) and (2); empty string when valid.
std::string weight_function_error(const Lmc& m, const Relation& r, std::size_t s,
                                  std::size_t t, const Rat& eps,
                                  const WeightFunction& wf);

// ε-approximate probabilistic bisimulation: |P(s)(A) − P(t)(A)| ≤ ε for
// R-closed A only. Per pair, each one-sided deviation is the sum over
// R-components of the positive part of the difference.
CheckReport is_eps_apb(const Lmc& m, const Relation& r, const Rat& eps);

// The up-to hierarchy: ~⁰ = all pairs (labels ignored); ~ᵏ⁺¹ keeps the
// equally-labeled pairs whose both flow directions pass against ~ᵏ.
Relation up_to_bisimilarity(const Lmc& m, const Rat& eps, unsigned n);

// Equivalence (given as covering partition) whose same-block pairs satisfy
// Σ_C max(P(u)(C) − P(v)(C), 0) ≤ ε over blocks C, in both directions.
CheckReport is_transitive_eps_bisimulation(const Lmc& m, const Partition& p,
                                           const Rat& eps);

// Exact probabilistic bisimilarity (ε = 0) as a partition, by refinement of
// the label partition under block-probability signatures.
Partition exact_bisimilarity(const Lmc& m);

}  // namespace abst
