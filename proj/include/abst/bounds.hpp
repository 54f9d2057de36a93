// Reachability-difference bounds certified by approximate bisimulations:
// the finite-horizon trace bound 1 − (1 − ε)^k and the unbounded bounds
// ε · E(N) for step / class-change / label-change counts.
#pragma once

#include "abst/lmc.hpp"
#include "abst/rat.hpp"
#include "abst/relations.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace abst {

enum class BoundFlavor { finite_horizon, step, class_change, label_change };

std::string bound_flavor_name(BoundFlavor f);

struct BoundPremise {
  bool relation_holds = false;   // the flavor's bisimulation premise
  bool f_discipline_ok = false;  // f labels exactly the non-reaching states
  std::string note;              // which relation was checked / what failed
};

struct BoundReport {
  std::size_t s = 0, t = 0;
  BoundFlavor flavor = BoundFlavor::step;
  Rat eps;
  Rat lhs;                  // |Pr_s − Pr_t| (traces or unconstrained goal reach)
  std::optional<Rat> rhs;   // nullopt = infinite
  bool tight = false;       // lhs == rhs (finite)
  bool vacuous = false;     // rhs infinite
  BoundPremise premise;
  unsigned horizon = 0;                    // finite_horizon: k (trace length − 1)
  std::optional<Rat> expected_s, expected_t;  // unbounded: E from s and from t
};

// Adds f_ap to exactly the states that cannot reach any goal_ap-labeled
// state. Errors when f_ap is already used on a different set of states
// (inconsistent) — already-exact usage is accepted unchanged.
Lmc label_f_closure(const Lmc& m, const std::string& goal_ap, const std::string& f_ap);

// |Pr_s(T) − Pr_t(T)| ≤ 1 − (1−ε)^k for trace sets T of length k+1.
// Premise: s ~_ε t via the greatest ε-bisimilarity. Never vacuous.
BoundReport finite_horizon_report(const Lmc& m, std::size_t s, std::size_t t,
                                  const std::vector<std::vector<std::set<std::string>>>& traces,
                                  const Rat& eps);

// |Pr_s(◊ goal) − Pr_t(◊ goal)| ≤ ε · E_s(N) where N counts steps (in m),
// class changes (steps in M_R of `partition`), or label changes (steps in
// M^w), each to absorption in goal- or f-labeled states. Premises checked:
// the flavor's relation (greatest ε-bisimilarity / branching partition /
// greatest weak) and the f-discipline; violations are flagged in the report,
// never silently assumed. Infinite expectation makes the bound vacuous.
BoundReport unbounded_report(const Lmc& m, std::size_t s, std::size_t t, const Rat& eps,
                             BoundFlavor flavor, const std::string& goal_ap,
                             const std::string& f_ap,
                             const std::optional<Partition>& partition = std::nullopt);

}  // namespace abst
