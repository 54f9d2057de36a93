// Branching and weak ε-bisimulation, via the stutter-collapsing model
// transformations M_R (per equivalence class) and M^w (per label).
#pragma once

#include "abst/approx_bisim.hpp"
#include "abst/lmc.hpp"
#include "abst/rat.hpp"
#include "abst/relations.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace abst {

// The class-collapsed model M_R for a covering label-homogeneous partition.
// Original states keep their indices; one absorbing divergence state
// "__div_<least member name>" is appended per divergent block, in block
// order. P_R(s)(t) = Pr_s([s] U t) for t outside [s], and P_R(s)(s_[s]) =
// Pr_s(□[s]) when [s] is divergent. Row sums are asserted to be exactly 1.
struct MrModel {
  Lmc model;
  Partition base;                                // input partition (original states)
  std::vector<char> divergent;                   // per block of base
  std::vector<std::optional<std::size_t>> div_state;  // block -> index in model
  Partition classes;                             // R^b: blocks plus their div states
};

struct MrResult {
  bool ok = false;
  std::string reason;  // e.g. the divergence dichotomy rejection
  std::optional<MrModel> mr;
  // On dichotomy rejection: the offending non-divergent block and its first
  // member with positive stay-forever probability.
  std::optional<std::size_t> bad_block;
  std::optional<std::size_t> bad_state;
};

// A block is divergent when every member has Pr(□block) ≥ 1 − ε. Rejects
// with "divergence dichotomy violated" when some non-divergent block has a
// member with positive stay-forever probability.
MrResult build_mr(const Lmc& m, const Partition& p, const Rat& eps);

// p is a branching ε-bisimulation iff M_R exists and R^b is a transitive
// ε-bisimulation on M_R.
CheckReport is_branching_eps_bisimulation(const Lmc& m, const Partition& p,
                                          const Rat& eps);

// Independent oracle straight from the definition: for every same-block pair
// and every union A of blocks, |Pr_s([s] U A) − Pr_t([t] U A)| ≤ ε.
// Brute force; throws CapExceeded beyond `cap` states.
CheckReport is_branching_direct_oracle(const Lmc& m, const Partition& p, const Rat& eps,
                                       std::size_t cap = 12);

// First (canonical order) branching ε-bisimulation partition merging {s, t},
// if any. Requires l(s) = l(t).
std::optional<Partition> decide_branching_bisimilar(const Lmc& m, std::size_t s,
                                                    std::size_t t, const Rat& eps,
                                                    const DecideOptions& opts = {});

// The label-collapsed model M^w. 𝓛 = labels b with Pr_s(□ L_b) > 0 for some
// b-labeled s; one absorbing state "__div_<label>" per b ∈ 𝓛. P^w(s)(t) =
// Pr_s(L(s) U t) for differently-labeled t, P^w(s)(s_b) = Pr_s(□ L(s)) for
// b = l(s) ∈ 𝓛. Row sums are asserted to be exactly 1.
struct MwModel {
  Lmc model;
  std::size_t orig_states = 0;
  // Divergence state index per label key (canonical "{a,b}" form), ordered.
  std::map<std::string, std::size_t> div_of_label;
};

MwModel build_mw(const Lmc& m);

// Canonical "{a,b}" form of a label set (used in divergence state names).
std::string label_key(const std::set<std::string>& label);

// Reflexive-symmetric r is a weak ε-bisimulation:
// ∀(s,t) ∈ r, ∀A ⊆ S: Pr_s(L(s) U A) ≤ Pr_t(L(t) U R(A)) + ε, both
// directions, equal labels required. Brute force over all A; throws
// CapExceeded beyond `cap` states. Witness: first violating (pair, A) in
// canonical order (pairs ascending, A by ascending bitmask).
CheckReport is_weak_eps_bisimulation(const Lmc& m, const Relation& r, const Rat& eps,
                                     std::size_t cap = 12);

// Greatest-fixpoint computation starting from all equally-labeled pairs with
// restart-on-deletion, then a full verification pass; throws logic_error
// "fixpoint is not a weak eps-bisimulation" if verification fails (not
// expected for any input; kept as an explicit honest check).
Relation greatest_weak_eps_bisimilarity(const Lmc& m, const Rat& eps,
                                        std::size_t cap = 12);

// Lift of r to M^w: r's pairs plus (s, s_b) for b = l(s) ∈ 𝓛 with
// Pr_s(□ L(s)) ≥ 1 − ε. Verified to be an ε-bisimulation on M^w before
// returning; ValidationError otherwise (r was not a weak ε-bisimulation).
Relation lift_rw(const Lmc& m, const MwModel& mw, const Relation& r, const Rat& eps);

}  // namespace abst
