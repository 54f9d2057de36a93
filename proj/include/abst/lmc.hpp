// Finite labeled Markov chains with exact rational transition rows.
//
// State order is declaration order and fixes every iteration order in the
// library (witness search, report text, serialization), so all outputs are
// byte-deterministic.
#pragma once

#include "abst/errors.hpp"
#include "abst/rat.hpp"
#include "abst/relations.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace abst {

struct StateRec {
  std::string name;
  std::set<std::string> label;  // set of atomic propositions
};

struct Lmc {
  std::vector<StateRec> states;
  std::size_t init = 0;
  // Sparse rows: rows[s][t] > 0, keyed by target index (ascending).
  std::vector<std::map<std::size_t, Rat>> rows;

  std::size_t size() const { return states.size(); }
  const std::set<std::string>& label(std::size_t s) const { return states[s].label; }
  bool same_label(std::size_t s, std::size_t t) const {
    return states[s].label == states[t].label;
  }

  Rat prob(std::size_t s, std::size_t t) const;
  Rat prob_set(std::size_t s, const std::set<std::size_t>& a) const;
  std::vector<std::size_t> succ(std::size_t s) const;

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::string> state_names() const;
  std::vector<std::set<std::string>> state_labels() const;

  // States whose label contains the given proposition.
  std::vector<std::size_t> states_with_ap(const std::string& ap) const;

  // Row sums exactly 1, entries in (0, 1], unique names, valid init,
  // non-empty support everywhere. Throws ValidationError otherwise.
  void validate() const;
};

// Text format, one item per line:
//   state <name> {ap1, ap2}     (label may be {})
//   init <name>
//   <from> -> <to> : <prob>     (prob as num, num/den, or finite decimal)
// '#' starts a comment. Errors carry 1-based line numbers.
Lmc parse_lmc(const std::string& text);
std::string serialize_lmc(const Lmc& m);

// Left states first, then right. If any name occurs in both operands, every
// right-half state is renamed with prefix "2:". Initial state is the left one.
Lmc direct_sum(const Lmc& a, const Lmc& b);

struct QuotientPolicy {
  enum Kind { exact, centroid } kind = exact;
  Rat eps;  // centroid tolerance, used when kind == centroid
};

// Quotient of m under a covering partition. Block states are named after the
// least-index member, ordered by block; the initial block inherits init.
//
// exact: all members of a block must have identical lifted rows, otherwise
//   ValidationError naming the block and the first disagreeing pair.
// centroid: the block row is a distribution within L1 distance eps of every
//   member's lifted row ("no centroid within epsilon" otherwise).
Lmc quotient(const Lmc& m, const Partition& p, const QuotientPolicy& policy);

// Replacement rows for a subset of states.
struct Perturbation {
  std::map<std::size_t, std::map<std::size_t, Rat>> rows;
};

// Applies the perturbation and returns the result together with the exact L1
// distance ‖P(s) − P'(s)‖₁ for every state (0 for untouched states). The
// replacement rows must themselves be distributions.
std::pair<Lmc, std::vector<Rat>> apply_perturbation(const Lmc& m, const Perturbation& pert);

}  // namespace abst
