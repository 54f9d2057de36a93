// ε-perturbed bisimulation: centroid certificates, constructive perturbation
// synthesis, and the NP decision procedures for both the perturbed and the
// transitive flavors.
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

// A distribution x (over the given coordinate space) with ‖x − row‖₁ ≤ eps
// for every input row; nullopt when none exists. Decided exactly by LP
// feasibility; the returned point is the solver's canonical vertex.
std::optional<std::vector<Rat>> centroid(const std::vector<std::vector<Rat>>& rows,
                                         const Rat& eps);

// Per-block centroid data for a partition that passes the perturbed check.
struct CentroidCertificate {
  Partition partition;
  // centroid[b][c] = mass the block-b centroid puts on block c (lifted space).
  std::vector<std::map<std::size_t, Rat>> centroids;
  // member_l1[b][k] = ‖lifted row of k-th member of block b − centroid‖₁.
  std::vector<std::vector<Rat>> member_l1;
};

struct PerturbedReport {
  bool ok = true;
  std::string reason;
  std::optional<Witness> witness;           // transitive-stage failure
  std::optional<std::size_t> bad_block;     // centroid-stage failure
  std::optional<CentroidCertificate> cert;  // present when ok
};

// Partition p is an ε-perturbed bisimulation: it passes the transitive check
// and every block admits a centroid within ε of each member's lifted row.
PerturbedReport is_eps_perturbed_bisimulation(const Lmc& m, const Partition& p,
                                              const Rat& eps);

// Constructive direction: replacement rows moving each state's surplus mass
// (vs. its block centroid, lifted over blocks) onto deficit blocks, shifting
// within blocks in canonical member order. Postconditions, all re-verified
// exactly before returning (logic_error on violation, which would indicate a
// bug, not bad input): every perturbed row is a distribution; per-state L1
// change ≤ eps of the certificate; p is an exact bisimulation on the result.
Perturbation synthesize_perturbation(const Lmc& m, const Partition& p,
                                     const CentroidCertificate& cert, const Rat& eps);

struct PerturbedDecision {
  bool yes = false;
  Lmc model;  // the searched model (direct sum for the two-model form)
  std::optional<CentroidCertificate> cert;
  std::optional<Perturbation> perturbation;
};

// Are the initial states ε-perturbed bisimilar? Enumerates label-homogeneous
// partitions of the direct sum that merge the two initial states; the first
// passing partition (canonical order) yields certificate and synthesized
// perturbation. Throws CapExceeded per opts.cap.
PerturbedDecision decide_perturbed_bisimilar(const Lmc& a, const Lmc& b, const Rat& eps,
                                             const DecideOptions& opts = {});
// Within-model variant: partitions of m merging {s, t}.
PerturbedDecision decide_perturbed_pair(const Lmc& m, std::size_t s, std::size_t t,
                                        const Rat& eps, const DecideOptions& opts = {});

struct TransitiveDecision {
  bool yes = false;
  Lmc model;
  std::optional<Partition> partition;
};

TransitiveDecision decide_transitive_eps_bisimilar(const Lmc& a, const Lmc& b,
                                                   const Rat& eps,
                                                   const DecideOptions& opts = {});
TransitiveDecision decide_transitive_pair(const Lmc& m, std::size_t s, std::size_t t,
                                          const Rat& eps, const DecideOptions& opts = {});

}  // namespace abst
