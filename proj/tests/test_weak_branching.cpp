// Branching and weak tolerant bisimulations: the class-collapsed and
// label-collapsed model constructions (golden instance checked row by row),
// the divergence dichotomy, the direct-definition oracle, and the separating
// examples between the plain, branching, and weak flavors.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "abst/approx_bisim.hpp"
#include "abst/errors.hpp"
#include "abst/generators.hpp"
#include "abst/lmc.hpp"
#include "abst/solvers.hpp"
#include "abst/weak_branching.hpp"
#include "testutil.hpp"

#include <set>
#include <string>
#include <vector>

using namespace abst;
using testutil::pick;

namespace {

// Random model with a bias toward absorbing states and self loops, so that
// divergence (positive stay-forever mass) actually occurs.
Lmc random_divergence_lmc(std::mt19937_64& g, std::size_t n) {
  testutil::LmcOpts o;
  o.n = n;
  Lmc m = testutil::random_lmc(g, o);
  for (std::size_t s = 0; s < n; ++s)
    if (pick(g, 4) == 0) m.rows[s] = {{s, Rat(1)}};
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("class-collapsed model: golden instance, row by row") {
  Lmc m = gen_mr_example(Rat(1, 8), Rat(1, 4));
  auto ix = [&](const char* n) { return *m.index_of(n); };
  Partition p(m.size(),
              {{ix("s"), ix("t"), ix("s1"), ix("t1")}, {ix("x")}, {ix("p"), ix("q")}});
  MrResult res = build_mr(m, p, Rat(1, 8));
  REQUIRE(res.ok);
  REQUIRE(res.mr.has_value());
  const MrModel& mr = *res.mr;

  // Divergent blocks: the chain block and the absorbing probe, not {p, q}.
  REQUIRE(mr.divergent.size() == 3);
  CHECK(mr.divergent[0]);
  CHECK(mr.divergent[1]);
  CHECK(!mr.divergent[2]);

  // Appended divergence states, in block order, named after least members.
  REQUIRE(mr.model.size() == 9);
  CHECK(mr.model.states[7].name == "__div_s");
  CHECK(mr.model.states[8].name == "__div_x");
  CHECK(mr.div_state[0] == std::size_t{7});
  CHECK(mr.div_state[1] == std::size_t{8});
  CHECK(!mr.div_state[2].has_value());

  // Exact collapsed rows.
  const Lmc& q = mr.model;
  CHECK(q.prob(ix("s"), ix("x")) == Rat(1, 8));
  CHECK(q.prob(ix("s"), 7) == Rat(7, 8));
  CHECK(q.prob(ix("x"), 8) == Rat(1));
  CHECK(q.prob(ix("t"), ix("x")) == Rat(1, 16));
  CHECK(q.prob(ix("t"), 7) == Rat(15, 16));
  CHECK(q.prob(ix("s1"), 7) == Rat(1));
  CHECK(q.rows[ix("t1")] == q.rows[ix("t")]);
  CHECK(q.prob(ix("p"), ix("s")) == Rat(1, 2));
  CHECK(q.prob(ix("p"), ix("x")) == Rat(1, 2));
  CHECK(q.prob(ix("q"), ix("x")) == Rat(3, 8));
  CHECK(q.prob(ix("q"), ix("t")) == Rat(5, 8));
  q.validate();

  // Blocks-plus-divergence-state classes.
  CHECK(mr.classes.blocks() ==
        std::vector<std::vector<std::size_t>>{
            {ix("s"), ix("t"), ix("s1"), ix("t1"), 7}, {ix("x"), 8}, {ix("p"), ix("q")}});

  // The collapsed classes form a transitive tolerant equivalence, so the
  // original partition is a branching bisimulation; the direct oracle agrees.
  CHECK(is_transitive_eps_bisimulation(q, mr.classes, Rat(1, 8)).ok);
  CHECK(is_branching_eps_bisimulation(m, p, Rat(1, 8)).ok);
  CHECK(is_branching_direct_oracle(m, p, Rat(1, 8)).ok);
}

TEST_CASE("divergence dichotomy rejection names block and member") {
  Lmc m = parse_lmc(
      "state a {m}\nstate c {m}\nstate x {}\ninit a\n"
      "a -> a : 1\n"
      "c -> c : 1/2\nc -> a : 1/4\nc -> x : 1/4\n"
      "x -> x : 1\n");
  Partition p(3, {{0, 1}, {2}});
  MrResult res = build_mr(m, p, Rat(1, 8));
  CHECK(!res.ok);
  CHECK(res.reason.find("dichotomy") != std::string::npos);
  CHECK(res.bad_block == std::size_t{0});
  REQUIRE(res.bad_state.has_value());
  // The block is non-divergent because c only stays with probability 1/2;
  // the reported member is the first one with positive stay mass, which is a.
  CHECK(*res.bad_state == 0);
  CHECK(res.reason.find("state a") != std::string::npos);
  // The checker fails too, and so does the direct oracle (the dichotomy
  // violation forces an until-condition violation against the trapped state).
  CHECK(!is_branching_eps_bisimulation(m, p, Rat(1, 8)).ok);
  CHECK(!is_branching_direct_oracle(m, p, Rat(1, 8)).ok);
}

TEST_CASE("collapsed transition probabilities equal class-local until probabilities") {
  auto g = testutil::make_rng(701);
  int built = 0;
  for (int it = 0; it < 120 && built < 50; ++it) {
    Lmc m = random_divergence_lmc(g, 2 + pick(g, 5));
    Partition p = testutil::random_partition(g, m);
    Rat eps = Rat(1 + static_cast<long>(pick(g, 4)), 8);
    MrResult res = build_mr(m, p, eps);
    if (!res.ok) continue;
    ++built;
    const MrModel& mr = *res.mr;
    mr.model.validate();
    for (std::size_t s = 0; s < m.size(); ++s) {
      std::size_t b = p.block_of(s);
      std::set<std::size_t> blk(p.blocks()[b].begin(), p.blocks()[b].end());
      std::vector<char> allowed = mask_of(m.size(), blk);
      for (std::size_t t = 0; t < m.size(); ++t) {
        if (blk.count(t)) continue;
        CHECK(mr.model.prob(s, t) ==
              until_probability(m, s, allowed, mask_of(m.size(), {t})));
      }
      Rat stay = always_probability(m, s, allowed);
      if (mr.divergent[b])
        CHECK(mr.model.prob(s, *mr.div_state[b]) == stay);
      else
        CHECK(stay == Rat(0));
    }
  }
  CHECK(built >= 50);
}

TEST_CASE("branching check agrees with the direct-definition oracle") {
  auto g = testutil::make_rng(702);
  for (int it = 0; it < 150; ++it) {
    Lmc m = random_divergence_lmc(g, 2 + pick(g, 4));
    Partition p = testutil::random_partition(g, m);
    Rat eps = Rat(1 + static_cast<long>(pick(g, 5)), 8);
    CHECK(is_branching_eps_bisimulation(m, p, eps).ok ==
          is_branching_direct_oracle(m, p, eps).ok);
  }
}

TEST_CASE("half-split pair: branching holds on the left, weak fails with exact margin") {
  Rat eps(1, 8);
  auto [left, right] = gen_weak_branching_incomparable(eps);
  auto ix = [&](const char* n) { return *left.index_of(n); };

  Partition p(left.size(), {{ix("s"), ix("t")}, {ix("s1"), ix("t1")}, {ix("x")}, {ix("y")}});
  CHECK(is_branching_eps_bisimulation(left, p, eps).ok);
  CHECK(is_branching_direct_oracle(left, p, eps).ok);
  auto dec = decide_branching_bisimilar(left, ix("s"), ix("t"), eps);
  REQUIRE(dec.has_value());
  CHECK(dec->same_block(ix("s"), ix("t")));

  // Weak transfer fails: after collapsing the {a}-labeled class, t reaches x
  // with 49/64 while s only offers 5/8 + eps = 3/4 = 48/64.
  std::set<std::size_t> aclass{ix("s"), ix("s1"), ix("t"), ix("t1")};
  std::vector<char> allowed = mask_of(left.size(), aclass);
  Rat from_t = until_probability(left, ix("t"), allowed, mask_of(left.size(), {ix("x")}));
  Rat from_s = until_probability(left, ix("s"), allowed, mask_of(left.size(), {ix("x")}));
  CHECK(from_t == Rat(49, 64));
  CHECK(from_s == Rat(5, 8));
  CHECK(from_t > from_s + eps);

  Relation r(left.size());
  r.add(ix("s"), ix("t"));
  r.add(ix("s1"), ix("t1"));
  CheckReport weak = is_weak_eps_bisimulation(left, r, eps);
  CHECK(!weak.ok);
  CHECK(!greatest_weak_eps_bisimilarity(left, eps).related(ix("s"), ix("t")));

  // Right model: weakly related, yet no branching partition merges (s, t).
  auto rx = [&](const char* n) { return *right.index_of(n); };
  Relation wr(right.size());
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
           {"s", "t"}, {"s", "u"}, {"s", "v"}, {"t", "v"}, {"t", "w"}, {"u", "v"}, {"v", "w"}})
    wr.add(rx(a), rx(b));
  CHECK(is_weak_eps_bisimulation(right, wr, eps).ok);
  CHECK(greatest_weak_eps_bisimilarity(right, eps).related(rx("s"), rx("t")));
  CHECK(!decide_branching_bisimilar(right, rx("s"), rx("t"), eps).has_value());
}

TEST_CASE("coin-order pair: plain and closed-set related, neither branching nor weak") {
  Rat e1(1, 4), e2(1, 8), eps = e1 - e2;
  auto [left, right] = gen_eps_vs_weak_branching(e1, e2);
  auto ix = [&](const char* n) { return *left.index_of(n); };

  CHECK(greatest_eps_bisimilarity(left, eps).related(ix("s"), ix("t")));
  Relation st(left.size());
  st.add(ix("s"), ix("t"));
  CHECK(is_eps_apb(left, st, eps).ok);
  CHECK(!decide_branching_bisimilar(left, ix("s"), ix("t"), eps).has_value());
  CHECK(!greatest_weak_eps_bisimilarity(left, eps).related(ix("s"), ix("t")));

  // Right model: related by the plain flavor, but the weak transfer to {x}
  // is off by more than eps: 1 against (14/15)^2 + 1/8.
  auto rx = [&](const char* n) { return *right.index_of(n); };
  CHECK(greatest_eps_bisimilarity(right, eps).related(rx("s"), rx("t")));
  std::set<std::size_t> aclass{rx("s"), rx("s1"), rx("t"), rx("t1")};
  std::vector<char> allowed = mask_of(right.size(), aclass);
  Rat from_s =
      until_probability(right, rx("s"), allowed, mask_of(right.size(), {rx("x")}));
  Rat from_t =
      until_probability(right, rx("t"), allowed, mask_of(right.size(), {rx("x")}));
  CHECK(from_t == Rat(1));
  CHECK(from_s == Rat(196, 225));
  CHECK(from_t > from_s + eps);  // 1 > 1793/1800
  CHECK(!greatest_weak_eps_bisimilarity(right, eps).related(rx("s"), rx("t")));
}

TEST_CASE("deterministic stutter chain: branching and weak hold where plain fails") {
  Lmc m = parse_lmc(
      "state s {a}\nstate t {a}\nstate x {b}\ninit s\n"
      "s -> t : 1\nt -> x : 1\nx -> x : 1\n");
  Rat eps(1, 100);
  Partition p(3, {{0, 1}, {2}});
  CHECK(is_branching_eps_bisimulation(m, p, eps).ok);
  CHECK(is_branching_direct_oracle(m, p, eps).ok);
  CHECK(greatest_weak_eps_bisimilarity(m, eps).related(0, 1));
  // The plain flavor distinguishes them at any eps < 1: s moves all mass to
  // t, while t puts nothing on {s, t}.
  CHECK(!greatest_eps_bisimilarity(m, Rat(1, 2)).related(0, 1));
  Relation st(3);
  st.add(0, 1);
  CHECK(!is_eps_apb(m, st, Rat(1, 2)).ok);
}

TEST_CASE("label-collapsed model: classes, divergence states, exact rows") {
  Lmc m = gen_mr_example(Rat(1, 8), Rat(1, 4));
  auto ix = [&](const char* n) { return *m.index_of(n); };
  MwModel mw = build_mw(m);
  CHECK(mw.orig_states == 7);
  // Divergence states exist for {a} (the chain) and {b} (the absorbing x),
  // not for the empty-labeled probes which almost surely move on.
  REQUIRE(mw.div_of_label.count("{a}") == 1);
  REQUIRE(mw.div_of_label.count("{b}") == 1);
  CHECK(mw.div_of_label.count("{}") == 0);
  CHECK(mw.model.size() == 9);
  std::size_t da = mw.div_of_label.at("{a}"), db = mw.div_of_label.at("{b}");
  CHECK(mw.model.states[da].name == "__div_a");
  CHECK(mw.model.states[db].name == "__div_b");
  CHECK(mw.model.label(da) == std::set<std::string>{"a"});

  CHECK(mw.model.prob(ix("s"), ix("x")) == Rat(1, 8));
  CHECK(mw.model.prob(ix("s"), da) == Rat(7, 8));
  CHECK(mw.model.prob(ix("t"), ix("x")) == Rat(1, 16));
  CHECK(mw.model.prob(ix("t"), da) == Rat(15, 16));
  CHECK(mw.model.prob(ix("x"), db) == Rat(1));
  CHECK(mw.model.prob(ix("p"), ix("s")) == Rat(1, 2));
  CHECK(mw.model.prob(ix("q"), ix("t")) == Rat(5, 8));
  mw.model.validate();
}

TEST_CASE("weak relations lift to plain relations on the label-collapsed model") {
  auto g = testutil::make_rng(703);
  int lifted = 0;
  for (int it = 0; it < 80 && lifted < 30; ++it) {
    Lmc m = random_divergence_lmc(g, 2 + pick(g, 4));
    Rat eps = Rat(1 + static_cast<long>(pick(g, 4)), 8);
    Relation r = greatest_weak_eps_bisimilarity(m, eps);
    if (r.pair_count() == 0) continue;
    ++lifted;
    MwModel mw = build_mw(m);
    Relation lift = lift_rw(m, mw, r, eps);  // throws if not an eps-bisimulation
    for (const auto& [i, j] : r.pairs()) CHECK(lift.related(i, j));
    CHECK(is_eps_bisimulation(mw.model, lift, eps).ok);
  }
  CHECK(lifted >= 30);

  // A relation that is not weak must be refused.
  Lmc m = gen_eps_vs_weak_branching(Rat(1, 4), Rat(1, 8)).second;
  Relation bad(m.size());
  bad.add(*m.index_of("s"), *m.index_of("t"));
  MwModel mw = build_mw(m);
  CHECK_THROWS_AS(lift_rw(m, mw, bad, Rat(1, 8)), ValidationError);
}

TEST_CASE("weak checker: maximality of the greatest relation and cap behavior") {
  auto g = testutil::make_rng(704);
  for (int it = 0; it < 60; ++it) {
    Lmc m = random_divergence_lmc(g, 2 + pick(g, 4));
    Rat eps = Rat(1 + static_cast<long>(pick(g, 4)), 8);
    Relation great = greatest_weak_eps_bisimilarity(m, eps);
    CHECK(is_weak_eps_bisimulation(m, great, eps).ok);
    Relation r = testutil::random_relation(g, m);
    if (is_weak_eps_bisimulation(m, r, eps).ok)
      for (const auto& [i, j] : r.pairs()) CHECK(great.related(i, j));
  }
  Lmc m = random_divergence_lmc(g, 5);
  CHECK_THROWS_AS(is_weak_eps_bisimulation(m, Relation(m.size()), Rat(1, 8), 4),
                  CapExceeded);
}

TEST_CASE("without stutter steps, branching collapses to the transitive flavor") {
  auto g = testutil::make_rng(705);
  for (int it = 0; it < 60; ++it) {
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 4);
    o.no_stutter = true;
    Lmc m = testutil::random_lmc(g, o);
    Partition p = testutil::random_partition(g, m);
    Rat eps = Rat(1 + static_cast<long>(pick(g, 4)), 8);
    CHECK(is_branching_eps_bisimulation(m, p, eps).ok ==
          is_transitive_eps_bisimulation(m, p, eps).ok);
  }
}

TEST_CASE("decide_branching: label mismatch yields no partition, not an error") {
  Lmc m = parse_lmc("state s {a}\nstate t {b}\ninit s\ns -> t : 1\nt -> t : 1\n");
  CHECK(!decide_branching_bisimilar(m, 0, 1, Rat(1, 8)).has_value());
}
