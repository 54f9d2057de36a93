// Parameterized example families: witness models for tightness, separation
// and hardness claims. Every generator validates its parameter range (the
// error cites the range) and returns models that pass Lmc::validate().
#pragma once

#include "abst/lmc.hpp"
#include "abst/rat.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace abst {

// Chain with leak arcs; at ε = 1/n consecutive chain states are ε-bisimilar
// and the relation breaks at any smaller tolerance.
Lmc gen_chain(long n);

// ε-APB-but-not-ε-bisimilar pair (s, t) over a ladder of leak states; ε = 1/n.
Lmc gen_apb(long n);

// Deterministic chain vs. ε-leaky chain of length n: trace-probability gap
// exactly 1 − (1−ε)^{n+1} at horizon n+1.
Lmc gen_tight_bounded(long n, const Rat& eps);

// Reach probabilities 1/2, 0, 1 on three pairwise ε-bisimilar states; the
// unbounded bound is vacuous (infinite expectation without goal/fail traps).
Lmc gen_unbounded_cex(const Rat& eps);

// Self-loop pair with goal/fail exits: |Pr_s(◊g) − Pr_t(◊g)| = ε/p equals
// ε · E(N) = ε/p exactly. Requires 0 < ε < p/2.
Lmc gen_tight_unbounded(const Rat& p, const Rat& eps);

// Three ±ε-shifted coins: both neighbors of t are ε-bisimilar to it, so
// weight functions and deciding partitions are non-unique. Requires 0 < ε < 1/2.
Lmc gen_nonunique(const Rat& eps);

// Branching cells (M) vs. two-way split (N): ε-perturbed bisimilar, quotient
// of M is smaller than N. Returns (M, N). Requires 0 < ε < 1/4.
std::pair<Lmc, Lmc> gen_ms_mt(const Rat& eps);

// Transitive-ε-bisimilar but not ε-perturbed-bisimilar initial pair.
Lmc gen_strictly_finer(const Rat& eps);

// Graph-isomorphic pair, ε-bisimilar, yet not δ-perturbed-bisimilar for any
// δ < nε. Requires 0 < ε ≤ 1/(n(n+1)²). Returns (M_n, N_n).
std::pair<Lmc, Lmc> gen_graph_iso_family(long n, const Rat& eps);

// gen_graph_iso_family at n = 2 (largest valid ε is 1/18).
std::pair<Lmc, Lmc> gen_mn_nn_2(const Rat& eps);

// Uniform-entry self-loop ladders: ε-bisimilar, not δ-perturbed-bisimilar
// for δ < 2nε. Requires 0 < ε ≤ 1/(4n). Returns (M_n, N_n).
std::pair<Lmc, Lmc> gen_perturbation_gap_family(long n, const Rat& eps);

// SubsetSum reduction: (values, target) solvable iff M ≃_ε N, ε = 1/(2T).
struct SubsetSumInstance {
  std::vector<long> values;  // positive integers
  long target = 0;           // 0 ≤ target ≤ ΣT
  long total() const;
  Rat eps() const;  // 1/(2T)
};
std::pair<Lmc, Lmc> gen_subsetsum(const SubsetSumInstance& inst);

// Branching-but-not-weak (left) and weak-but-not-branching (right) pairs.
// Requires 0 < ε < 1/4. Returns (left, right).
std::pair<Lmc, Lmc> gen_weak_branching_incomparable(const Rat& eps);

// ε-bisimilar and ε-APB initial pair that is neither branching- nor
// weak-ε-bisimilar, at ε = |ε1 − ε2| (left model built from ε1, ε2; right
// model built at ε). Requires ε1, ε2 ∈ (0,1), ε1 ≠ ε2, ε1 + ε2 < 1.
std::pair<Lmc, Lmc> gen_eps_vs_weak_branching(const Rat& eps1, const Rat& eps2);

// Worked class-collapse example: chain with divergence, lazy copy, and two
// probe states. Requires 0 < ε < 1 − 2δ.
Lmc gen_mr_example(const Rat& eps, const Rat& delta);

// Rejection-free fast-dice-roller gadget: inner coin states (two probability
// 1/2 arcs each) reaching n exits uniformly. n = 6 yields the classic
// 7-inner-state dice. For n = 1 the entry is the exit itself.
struct UniformGadget {
  struct Ref {
    bool is_exit = false;
    std::size_t idx = 0;  // inner index or exit number (0-based)
  };
  // inner[i] -> two successors, entry is inner 0; empty iff n == 1.
  std::vector<std::pair<Ref, Ref>> inner;
};
UniformGadget knuth_yao_uniform(std::size_t n);
// Standalone model form: inner states d0, d1, ... plus absorbing exits
// exit1..exitn labeled {x1}..{xn}.
Lmc gen_knuth_yao_uniform(long n);

// --- CLI-facing registry ----------------------------------------------------

struct GenParams {
  std::optional<long> n;
  std::optional<Rat> eps, eps2, p, delta;
  std::optional<std::vector<long>> set;
  std::optional<long> target;
};

struct GenOutput {
  // (suffix, model): one entry with suffix "" for single models, or two with
  // suffixes "_M" / "_N" for paired families.
  std::vector<std::pair<std::string, Lmc>> models;
  std::map<std::string, std::string> notes;  // e.g. derived ε for subsetsum
};

GenOutput generate(const std::string& family, const GenParams& params);
std::vector<std::string> gen_family_names();

}  // namespace abst
