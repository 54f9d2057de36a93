// Example-family generators: parameter validation, advertised tolerances in
// the notes, and the quantitative claims each family is built to witness.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "abst/approx_bisim.hpp"
#include "abst/bounds.hpp"
#include "abst/errors.hpp"
#include "abst/generators.hpp"
#include "abst/lmc.hpp"
#include "abst/perturbed.hpp"
#include "abst/solvers.hpp"
#include "testutil.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace abst;
using testutil::error_containing;
using testutil::pick;

namespace {

Rat reach_to(const Lmc& m, std::size_t s, const std::string& ap) {
  std::vector<char> all(m.size(), 1);
  std::vector<std::size_t> goal = m.states_with_ap(ap);
  return until_vector(m, all,
                      mask_of(m.size(), std::set<std::size_t>(goal.begin(), goal.end())))[s];
}

const std::vector<std::string> kFamilies = {
    "apb",           "chain",           "eps_vs_weak_branching",
    "graph_iso",     "knuth_yao",       "mn_nn_2",
    "mr_example",    "ms_mt",           "nonunique",
    "perturbation_gap", "strictly_finer", "subsetsum",
    "tight_bounded", "tight_unbounded", "unbounded_cex",
    "weak_branching_incomparable"};

GenParams gp(std::optional<long> n, std::optional<Rat> eps = std::nullopt,
             std::optional<Rat> eps2 = std::nullopt, std::optional<Rat> p = std::nullopt,
             std::optional<Rat> delta = std::nullopt) {
  GenParams g;
  g.n = n;
  g.eps = eps;
  g.eps2 = eps2;
  g.p = p;
  g.delta = delta;
  return g;
}

}  // namespace

TEST_CASE("the registry lists 16 families, sorted, and rejects unknown names") {
  CHECK(gen_family_names() == kFamilies);
  std::string msg = error_containing<ValidationError>([] { generate("nope", {}); });
  CHECK(msg.find("unknown family 'nope'") != std::string::npos);
  for (const std::string& f : kFamilies) CHECK(msg.find(f) != std::string::npos);
}

TEST_CASE("every family generates validating models at reference parameters") {
  struct Row {
    std::string family;
    GenParams params;
    std::size_t nmodels;
  };
  std::vector<Row> rows = {
      {"apb", gp(4), 1},
      {"chain", gp(4), 1},
      {"eps_vs_weak_branching", gp({}, Rat(1, 4), Rat(1, 8)), 2},
      {"graph_iso", gp(2, Rat(1, 18)), 2},
      {"knuth_yao", gp(6), 1},
      {"mn_nn_2", gp({}), 2},
      {"mr_example", gp({}, Rat(1, 8), {}, {}, Rat(1, 4)), 1},
      {"ms_mt", gp({}, Rat(1, 8)), 2},
      {"nonunique", gp({}, Rat(1, 8)), 1},
      {"perturbation_gap", gp(2, Rat(1, 16)), 2},
      {"subsetsum", gp({}), 2},
      {"tight_bounded", gp(3, Rat(1, 10)), 1},
      {"tight_unbounded", gp({}, Rat(1, 8), {}, Rat(1, 3)), 1},
      {"unbounded_cex", gp({}, Rat(1, 8)), 1},
      {"weak_branching_incomparable", gp({}, Rat(1, 8)), 2},
  };
  for (Row& r : rows) {
    if (r.family == "subsetsum") {
      r.params.set = std::vector<long>{2, 3};
      r.params.target = 5;
    }
    GenOutput out = generate(r.family, r.params);
    CHECK(out.models.size() == r.nmodels);
    if (r.nmodels == 1) {
      CHECK(out.models[0].first == "");
    } else {
      CHECK(out.models[0].first == "_M");
      CHECK(out.models[1].first == "_N");
    }
    for (auto& [suffix, m] : out.models) {
      CHECK_NOTHROW(m.validate());
      CHECK(m.size() >= 1);
    }
  }
}

TEST_CASE("parameter ranges are enforced and the error cites the range") {
  auto err = [](const char* family, GenParams p) {
    return error_containing<ValidationError>([&] { generate(family, p); });
  };
  CHECK(err("chain", gp(0)) == "chain requires n >= 1, got 0");
  CHECK(err("apb", gp(-2)) == "apb requires n >= 1, got -2");
  CHECK(err("tight_bounded", gp(0, Rat(1, 2))) == "tight_bounded requires n >= 1, got 0");
  CHECK(err("tight_bounded", gp(2, Rat(1))) ==
        "tight_bounded requires 0 < eps < 1, got eps = 1");
  CHECK(err("unbounded_cex", gp({}, Rat(0))) ==
        "unbounded_cex requires 0 < eps < 1, got eps = 0");
  CHECK(err("tight_unbounded", gp({}, Rat(1, 8), {}, Rat(1))).find(
            "tight_unbounded requires 0 < p < 1") == 0);
  CHECK(err("tight_unbounded", gp({}, Rat(1, 4), {}, Rat(1, 3))).find(
            "tight_unbounded requires 0 < eps < p/2") == 0);
  CHECK(err("nonunique", gp({}, Rat(1, 2))) ==
        "nonunique requires 0 < eps < 1/2, got eps = 1/2");
  CHECK(err("ms_mt", gp({}, Rat(1, 4))) == "ms_mt requires 0 < eps < 1/4, got eps = 1/4");
  CHECK(err("strictly_finer", gp({}, Rat(1, 3))) ==
        "strictly_finer requires 0 < eps < 1/3, got eps = 1/3");
  CHECK(err("graph_iso", gp(2, Rat(1, 17))).find(
            "graph_iso requires 0 < eps <= 1/(n*(n+1)^2), got eps = 1/17") == 0);
  CHECK(err("perturbation_gap", gp(2, Rat(1, 7))).find(
            "perturbation_gap requires 0 < eps <= 1/(4n)") == 0);
  CHECK(err("weak_branching_incomparable", gp({}, Rat(1, 4))) ==
        "weak_branching_incomparable requires 0 < eps < 1/4, got eps = 1/4");
  CHECK(err("eps_vs_weak_branching", gp({}, Rat(1, 2), Rat(1, 2))).find(
            "eps_vs_weak_branching requires eps1, eps2 in (0,1)") == 0);
  CHECK(err("mr_example", gp({}, Rat(1, 8), {}, {}, Rat(1, 2))).find(
            "mr_example requires 0 < delta < 1/2") == 0);
  CHECK(err("mr_example", gp({}, Rat(2, 3), {}, {}, Rat(1, 4))).find(
            "mr_example requires 0 < eps < 1 - 2*delta and eps <= 1/2") == 0);
  CHECK(err("knuth_yao", gp(0)) == "knuth_yao requires n >= 1, got 0");

  // Missing-parameter diagnostics name the flag.
  CHECK(err("chain", gp({})) == "family 'chain' requires --n");
  CHECK(err("ms_mt", gp({})) == "family 'ms_mt' requires --eps");
  CHECK(err("tight_unbounded", gp({}, Rat(1, 8))) == "family 'tight_unbounded' requires --p");
  CHECK(err("eps_vs_weak_branching", gp({}, Rat(1, 4))) ==
        "family 'eps_vs_weak_branching' requires --eps2");
  CHECK(err("mr_example", gp({}, Rat(1, 8))) == "family 'mr_example' requires --delta");
  GenParams ss;
  CHECK(err("subsetsum", ss) == "family 'subsetsum' requires --set");
  ss.set = std::vector<long>{1};
  CHECK(err("subsetsum", ss) == "family 'subsetsum' requires --target");
  ss.target = 9;
  CHECK(err("subsetsum", ss) == "subsetsum requires 0 <= target <= 1, got 9");
  ss.set = std::vector<long>{2, 0};
  CHECK(err("subsetsum", ss) == "subsetsum values must be positive, got 0");
  ss.set = std::vector<long>{};
  CHECK(err("subsetsum", ss) == "subsetsum requires at least one value");
}

TEST_CASE("advertised tolerances land in the notes") {
  CHECK(generate("chain", gp(5)).notes.at("eps") == "1/5");
  CHECK(generate("apb", gp(3)).notes.at("eps") == "1/3");
  CHECK(generate("mn_nn_2", gp({})).notes.at("eps") == "1/18");  // default
  CHECK(generate("mn_nn_2", gp({}, Rat(1, 20))).notes.at("eps") == "1/20");
  CHECK(generate("perturbation_gap", gp(2, Rat(1, 16))).notes.at("perturbation_threshold") ==
        "1/4");
  GenParams ss;
  ss.set = std::vector<long>{2, 3};
  ss.target = 4;
  GenOutput out = generate("subsetsum", ss);
  CHECK(out.notes.at("eps") == "1/10");
  CHECK(out.notes.at("total") == "5");
  CHECK(generate("eps_vs_weak_branching", gp({}, Rat(1, 4), Rat(1, 8))).notes.at("eps") ==
        "1/8");
  CHECK(generate("eps_vs_weak_branching", gp({}, Rat(1, 8), Rat(1, 4))).notes.at("eps") ==
        "1/8");
}

TEST_CASE("deterministic vs leaky chain: trace gap is exactly 1 - (1-eps)^(n+1)") {
  for (long n : {1L, 2L, 3L, 4L}) {
    for (Rat eps : {Rat(1, 10), Rat(1, 7)}) {
      Lmc m = gen_tight_bounded(n, eps);
      std::vector<std::vector<std::set<std::string>>> traces(1);
      for (long i = 0; i <= n; ++i) traces[0].push_back({"a" + std::to_string(i)});
      traces[0].push_back({"g"});
      Rat ps = trace_set_probability(m, *m.index_of("s0"), traces);
      Rat pt = trace_set_probability(m, *m.index_of("t0"), traces);
      CHECK(ps == Rat(1));
      Rat want = 1;
      for (long i = 0; i <= n; ++i) want *= Rat(1) - eps;
      CHECK(ps - pt == Rat(1) - want);
      // And the pair really is related at the construction tolerance.
      CHECK(greatest_eps_bisimilarity(m, eps).related(*m.index_of("s0"), *m.index_of("t0")));
    }
  }
}

TEST_CASE("divergent trio: reach probabilities 1/2, 0, 1 under one tolerance") {
  for (Rat eps : {Rat(1, 8), Rat(1, 5)}) {
    Lmc m = gen_unbounded_cex(eps);
    CHECK(reach_to(m, *m.index_of("s0"), "g") == Rat(1, 2));
    CHECK(reach_to(m, *m.index_of("s1"), "g") == Rat(0));
    CHECK(reach_to(m, *m.index_of("s2"), "g") == Rat(1));
    Relation great = greatest_eps_bisimilarity(m, eps);
    CHECK(great.related(*m.index_of("s0"), *m.index_of("s1")));
    CHECK(great.related(*m.index_of("s1"), *m.index_of("s2")));
  }
}

TEST_CASE("self-loop pair: goal gap eps/p and expected exit time 1/p") {
  for (auto [p, eps] : std::vector<std::pair<Rat, Rat>>{
           {Rat(1, 3), Rat(1, 8)}, {Rat(1, 2), Rat(1, 5)}, {Rat(2, 5), Rat(1, 10)}}) {
    Lmc m = gen_tight_unbounded(p, eps);
    std::size_t s = *m.index_of("s"), t = *m.index_of("t");
    Rat gap = reach_to(m, s, "g") - reach_to(m, t, "g");
    if (gap < 0) gap = -gap;
    CHECK(gap == eps / p);
    std::vector<char> absorb(m.size(), 0);
    for (std::size_t u : m.states_with_ap("g")) absorb[u] = 1;
    for (std::size_t u : m.states_with_ap("f")) absorb[u] = 1;
    CHECK(expected_steps(m, s, absorb) == Rat(1) / p);
    CHECK(greatest_eps_bisimilarity(m, eps).related(s, t));
  }
}

TEST_CASE("shifted coins: neighbors are related, the ends are not") {
  Rat eps(1, 8);
  Lmc m = gen_nonunique(eps);
  std::size_t s = *m.index_of("s"), t = *m.index_of("t"), u = *m.index_of("u");
  Relation great = greatest_eps_bisimilarity(m, eps);
  CHECK(great.related(s, t));
  CHECK(great.related(t, u));
  CHECK(!great.related(s, u));
}

TEST_CASE("isomorphic pair: related at eps yet not perturbed below the n*eps wall") {
  Rat eps(1, 18);
  auto [m2, n2] = gen_graph_iso_family(2, eps);
  auto [a, b] = gen_mn_nn_2(eps);
  CHECK(serialize_lmc(m2) == serialize_lmc(a));
  CHECK(serialize_lmc(n2) == serialize_lmc(b));

  Lmc d = direct_sum(m2, n2);
  Relation great = greatest_eps_bisimilarity(d, eps);
  CHECK(great.related(m2.init, m2.size() + n2.init));
  CHECK(!decide_perturbed_bisimilar(m2, n2, eps).yes);         // eps < 2*eps wall
  CHECK(decide_perturbed_bisimilar(m2, n2, Rat(2) * eps).yes); // wall attained at 1/9

  for (long n : {1L, 3L}) {
    Rat e = Rat(1, n * (n + 1) * (n + 1));
    auto [mm, nn] = gen_graph_iso_family(n, e);
    Lmc dd = direct_sum(mm, nn);
    CHECK(greatest_eps_bisimilarity(dd, e).related(mm.init, mm.size() + nn.init));
  }
}

TEST_CASE("self-loop ladders: the exact related-pair set at n = 1") {
  Rat eps(1, 8);
  auto [m, n] = gen_perturbation_gap_family(1, eps);
  Lmc d = direct_sum(m, n);
  Relation great = greatest_eps_bisimilarity(d, eps);
  std::set<std::pair<std::size_t, std::size_t>> want;
  auto addp = [&](const char* x, const char* y) {
    std::size_t i = *d.index_of(x), j = *d.index_of(y);
    want.insert({std::min(i, j), std::max(i, j)});
  };
  addp("d0", "2:d0");
  addp("a1", "2:b1");
  addp("s1", "2:t1");
  addp("s2", "2:t1");
  addp("x", "2:y");
  std::set<std::pair<std::size_t, std::size_t>> got;
  for (const auto& [i, j] : great.pairs())
    if (i < j) got.insert({i, j});
  CHECK(got == want);
}

TEST_CASE("subset-sum reduction agrees with a brute-force oracle") {
  auto brute = [](const std::vector<long>& vals, long target) {
    std::set<long> sums = {0};
    for (long v : vals) {
      std::set<long> next = sums;
      for (long s : sums) next.insert(s + v);
      sums = next;
    }
    return sums.count(target) > 0;
  };
  auto decide = [](const std::vector<long>& vals, long target) {
    SubsetSumInstance inst;
    inst.values = vals;
    inst.target = target;
    auto [m, n] = gen_subsetsum(inst);
    return decide_transitive_eps_bisimilar(m, n, inst.eps()).yes;
  };

  for (long t = 0; t <= 5; ++t) CHECK(decide({2, 3}, t) == brute({2, 3}, t));
  for (long t = 0; t <= 4; ++t) CHECK(decide({2, 2}, t) == brute({2, 2}, t));
  for (long t = 0; t <= 3; ++t) CHECK(decide({3}, t) == brute({3}, t));

  auto g = testutil::make_rng(901);
  int yes_seen = 0, no_seen = 0;
  for (int it = 0; it < 20; ++it) {
    std::vector<long> vals;
    std::size_t k = 1 + pick(g, 2);
    long total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      vals.push_back(1 + static_cast<long>(pick(g, 3)));
      total += vals.back();
    }
    long target = static_cast<long>(pick(g, static_cast<std::size_t>(total) + 1));
    bool want = brute(vals, target);
    CHECK(decide(vals, target) == want);
    (want ? yes_seen : no_seen) += 1;
  }
  CHECK(yes_seen > 3);
  CHECK(no_seen > 3);
}

TEST_CASE("fast-dice-roller gadget: classic size and exactly uniform exits") {
  UniformGadget g6 = knuth_yao_uniform(6);
  CHECK(g6.inner.size() == 7);
  CHECK(knuth_yao_uniform(1).inner.empty());

  for (long n = 1; n <= 8; ++n) {
    Lmc m = gen_knuth_yao_uniform(n);
    m.validate();
    for (long i = 1; i <= n; ++i)
      CHECK(reach_to(m, m.init, "x" + std::to_string(i)) == Rat(1, n));
    // Inner states are fair coins: every arc probability is 1/2 (or a merged 1).
    for (const auto& st : m.states) {
      if (!st.label.empty()) continue;  // exits are labeled and absorbing
      for (const auto& [to, pr] : m.rows[&st - m.states.data()])
        CHECK((pr == Rat(1, 2) || pr == Rat(1)));
    }
  }
  Lmc one = gen_knuth_yao_uniform(1);
  CHECK(one.size() == 1);  // the entry is the exit
  CHECK(one.states[one.init].label == std::set<std::string>{"x1"});
}

TEST_CASE("worked class-collapse example builds across its parameter box") {
  for (auto [eps, delta] : std::vector<std::pair<Rat, Rat>>{
           {Rat(1, 8), Rat(1, 4)}, {Rat(1, 2), Rat(1, 8)}, {Rat(1, 4), Rat(1, 3)}}) {
    Lmc m = gen_mr_example(eps, delta);
    CHECK_NOTHROW(m.validate());
  }
}
