// Exact solvers: rational Gaussian elimination, phase-1 simplex feasibility,
// augmenting-path max-flow, and the reachability / trace / expectation
// queries they support. Everything is exact; nothing here rounds.
#pragma once

#include "abst/lmc.hpp"
#include "abst/rat.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace abst {

// --- linear systems -------------------------------------------------------

struct LinearSystem {
  std::size_t n = 0;                // number of variables
  std::vector<std::vector<Rat>> a;  // coefficient rows, each of length n
  std::vector<Rat> b;               // right-hand sides
};

// Unique solution of a square nonsingular system; nullopt when singular.
// Pivoting picks the first (smallest-index) row with a nonzero entry, which
// is always safe in exact arithmetic.
std::optional<std::vector<Rat>> solve_linear(const LinearSystem& sys);

// --- linear programs (feasibility only) ------------------------------------

enum class CmpOp { le, eq, ge };

struct LinearConstraint {
  std::vector<Rat> coeffs;
  CmpOp op = CmpOp::le;
  Rat rhs;
};

// Is {x ≥ 0 : constraints} nonempty? Returns a feasible point if so.
// Phase-1 simplex with Bland's rule (deterministic, terminating).
std::optional<std::vector<Rat>> lp_feasible(std::size_t nvars,
                                            const std::vector<LinearConstraint>& cons);

// --- max flow ---------------------------------------------------------------

struct FlowArc {
  std::size_t from = 0, to = 0;
  Rat cap;
};

struct FlowResult {
  Rat value;
  std::vector<Rat> flow;          // per input arc
  std::vector<char> source_side;  // residual-reachable nodes (a minimum cut)
};

// Edmonds-Karp with exact residuals; adjacency in arc insertion order.
FlowResult max_flow(std::size_t nodes, std::size_t source, std::size_t sink,
                    std::vector<FlowArc> arcs);

// --- probabilistic reachability ---------------------------------------------

// Pr(allowed U target) for every state, with target-wins semantics: a state
// in target scores 1 even if outside allowed. States outside allowed ∪ target
// score 0. Zero-probability states are removed before solving the linear
// system, which is then nonsingular.
std::vector<Rat> until_vector(const Lmc& m, const std::vector<char>& allowed,
                              const std::vector<char>& target);
Rat until_probability(const Lmc& m, std::size_t s, const std::vector<char>& allowed,
                      const std::vector<char>& target);

// Pr(□ inside) = 1 − Pr(inside U (S ∖ inside)); 0 when s ∉ inside.
std::vector<Rat> always_vector(const Lmc& m, const std::vector<char>& inside);
Rat always_probability(const Lmc& m, std::size_t s, const std::vector<char>& inside);

// Pr(◊^{≤ steps} target) by exact value iteration.
Rat bounded_reach(const Lmc& m, std::size_t s, const std::vector<char>& target,
                  unsigned steps);

// Probability that the label trace of length k+1 (including the start label)
// is in `traces`. All traces must have equal positive length.
Rat trace_set_probability(const Lmc& m, std::size_t s,
                          const std::vector<std::vector<std::set<std::string>>>& traces);

// Expected number of steps to reach `absorb` (0 if already there);
// nullopt = infinite (absorption probability < 1).
std::vector<std::optional<Rat>> expected_steps_vector(const Lmc& m,
                                                      const std::vector<char>& absorb);
std::optional<Rat> expected_steps(const Lmc& m, std::size_t s,
                                  const std::vector<char>& absorb);

// Convenience: membership mask from an index set.
std::vector<char> mask_of(std::size_t n, const std::set<std::size_t>& a);

}  // namespace abst
