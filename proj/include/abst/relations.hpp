// Binary relations and partitions over state indices, plus the canonical
// partition enumerator used by the NP decision procedures.
//
// Determinism contract: relations store unordered pairs (i, j) with i < j in a
// sorted set; reflexive pairs are implicit. Partitions are kept canonical:
// every block sorted ascending, blocks ordered by least member.
#pragma once

#include "abst/errors.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace abst {

class Partition;

class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t n) : n_(n) {}

  // All pairs, including differently-labeled ones.
  static Relation full(std::size_t n);
  // Pairs with equal labels.
  static Relation equal_labels(const std::vector<std::set<std::string>>& labels);
  static Relation from_pairs(std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

  std::size_t size() const { return n_; }
  bool related(std::size_t i, std::size_t j) const;
  void add(std::size_t i, std::size_t j);
  void remove(std::size_t i, std::size_t j);
  std::size_t pair_count() const { return pairs_.size(); }

  // Stored non-reflexive pairs, ascending lexicographic, i < j.
  const std::set<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

  // R(A) = A ∪ {j : some i ∈ A with (i, j) ∈ R}.
  std::set<std::size_t> image(const std::set<std::size_t>& a) const;

  bool operator==(const Relation& o) const { return n_ == o.n_ && pairs_ == o.pairs_; }

 private:
  std::size_t n_ = 0;
  std::set<std::pair<std::size_t, std::size_t>> pairs_;
};

class Partition {
 public:
  Partition() = default;
  // Canonicalizes; throws ValidationError if blocks overlap or index ≥ n.
  Partition(std::size_t n, std::vector<std::vector<std::size_t>> blocks);

  static Partition singletons(std::size_t n);

  std::size_t size() const { return n_; }  // universe size
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  // Block index of a state; throws if the state is not covered.
  std::size_t block_of(std::size_t s) const;
  bool covers_all() const;  // every index in [0, n) assigned
  bool same_block(std::size_t i, std::size_t j) const;

  // The equivalence relation induced by the blocks.
  Relation as_relation() const;

  bool operator==(const Partition& o) const {
    return n_ == o.n_ && blocks_ == o.blocks_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::optional<std::size_t>> block_of_;
};

// Connected components of the symmetric closure graph of r (reflexive states
// that appear in no pair form singleton components). These are exactly the
// minimal nonempty R-closed sets.
Partition components(const Relation& r);

// Streams every partition of `universe` whose blocks are label-homogeneous and
// merge all must_link pairs, in restricted-growth-string order over the
// must-link-collapsed atoms (atoms ordered by least member). The visitor
// returns false to stop early; the function returns false iff stopped.
//
// Throws CapExceeded when |universe| > cap and ValidationError when a
// must_link pair has mismatched labels or mentions a state outside universe.
bool enumerate_partitions(
    const std::vector<std::set<std::string>>& labels,
    const std::vector<std::pair<std::size_t, std::size_t>>& must_link,
    const std::vector<std::size_t>& universe, std::size_t cap,
    const std::function<bool(const Partition&)>& visit);

// Options shared by the decision procedures.
struct DecideOptions {
  std::size_t cap = 14;     // max universe size for partition enumeration
  unsigned jobs = 1;        // parallel partition checking (output-invariant)
  bool prune_cross = false; // skip partitions with a block inside one summand
};

// First partition in enumeration order satisfying pred. With opts.jobs > 1,
// candidates are evaluated in deterministic contiguous batches and the lowest
// passing index wins, so the result is independent of the job count. pred is
// called concurrently and must be pure.
std::optional<Partition> first_passing_partition(
    const std::vector<std::set<std::string>>& labels,
    const std::vector<std::pair<std::size_t, std::size_t>>& must_link,
    const std::vector<std::size_t>& universe, const DecideOptions& opts,
    const std::function<bool(const Partition&)>& pred);

// Text I/O. Relations are "a ~ b" lines; partitions are "{a, b}" blocks
// separated by whitespace or newlines. Serialization writes one item per
// line. Unknown names raise ValidationError.
Relation parse_relation(const std::string& text, const std::vector<std::string>& names);
std::string serialize_relation(const Relation& r, const std::vector<std::string>& names);
Partition parse_partition(const std::string& text, const std::vector<std::string>& names);
std::string serialize_partition(const Partition& p, const std::vector<std::string>& names);

}  // namespace abst
