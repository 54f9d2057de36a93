// Twelve randomized invariant suites over small random models (at most 8
// states), each seed-pinned and run for at least 200 instances. Shared by the
// property-test binary and the acceptance gate: both require zero violations.
#pragma once

#include "abst/approx_bisim.hpp"
#include "abst/bounds.hpp"
#include "abst/lmc.hpp"
#include "abst/perturbed.hpp"
#include "abst/relations.hpp"
#include "abst/solvers.hpp"
#include "abst/weak_branching.hpp"
#include "testutil.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace propsuite {

using namespace abst;
using testutil::pick;

struct SuiteResult {
  std::string name;
  int instances = 0;
  int violations = 0;
};

namespace detail {

inline Rat l1(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  Rat d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += abs(Rat(a[i] - b[i]));
  return d;
}

inline std::vector<Rat> random_dist(std::mt19937_64& g, std::size_t k) {
  std::vector<Rat> w(k);
  long total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    long x = static_cast<long>(pick(g, 5));
    w[i] = x;
    total += x;
  }
  if (total == 0) {
    w[pick(g, k)] = 1;
    total = 1;
  }
  for (Rat& x : w) x /= total;
  return w;
}

inline Rat small_eps(std::mt19937_64& g) {
  static const Rat pool[] = {Rat(1, 10), Rat(1, 8), Rat(1, 6), Rat(1, 4)};
  return pool[pick(g, 4)];
}

// Probability mass state s sends into each block of p.
inline std::vector<Rat> lifted(const Lmc& m, const Partition& p, std::size_t s) {
  std::vector<Rat> row(p.blocks().size(), Rat(0));
  for (const auto& [t, pr] : m.rows[s]) row[p.block_of(t)] += pr;
  return row;
}

inline Lmc random_divergence_lmc(std::mt19937_64& g, std::size_t n) {
  testutil::LmcOpts o;
  o.n = n;
  Lmc m = testutil::random_lmc(g, o);
  for (std::size_t s = 0; s < n; ++s)
    if (pick(g, 4) == 0) m.rows[s] = {{s, Rat(1)}};
  return m;
}

// Complete vertex scan for {x >= 0 : cons}: with the nonnegativity bounds the
// region is pointed, so it is nonempty iff some basic point (intersection of
// n active boundaries drawn from constraint rows and coordinate planes)
// satisfies everything.
inline bool lp_oracle(std::size_t nvars, const std::vector<LinearConstraint>& cons) {
  std::vector<std::vector<Rat>> planes;  // row ++ rhs
  for (const auto& c : cons) {
    std::vector<Rat> r = c.coeffs;
    r.push_back(c.rhs);
    planes.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < nvars; ++i) {
    std::vector<Rat> r(nvars + 1, Rat(0));
    r[i] = 1;
    planes.push_back(std::move(r));
  }
  auto feasible = [&](const std::vector<Rat>& x) {
    for (const Rat& xi : x)
      if (xi < 0) return false;
    for (const auto& c : cons) {
      Rat lhs = 0;
      for (std::size_t i = 0; i < nvars; ++i) lhs += c.coeffs[i] * x[i];
      if (c.op == CmpOp::le && lhs > c.rhs) return false;
      if (c.op == CmpOp::ge && lhs < c.rhs) return false;
      if (c.op == CmpOp::eq && lhs != c.rhs) return false;
    }
    return true;
  };
  if (nvars == 0) return feasible({});
  std::vector<std::size_t> idx(planes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::size_t> comb;
  bool found = false;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (found) return;
    if (comb.size() == nvars) {
      LinearSystem sys;
      sys.n = nvars;
      for (std::size_t pi : comb) {
        sys.a.push_back(
            std::vector<Rat>(planes[pi].begin(), planes[pi].begin() + nvars));
        sys.b.push_back(planes[pi][nvars]);
      }
      if (auto x = solve_linear(sys); x && feasible(*x)) found = true;
      return;
    }
    for (std::size_t i = start; i < idx.size(); ++i) {
      comb.push_back(idx[i]);
      rec(i + 1);
      comb.pop_back();
    }
  };
  rec(0);
  return found;
}

}  // namespace detail

// 1. Any two distributions admit a common center within half their L1
// distance, and never strictly closer to both.
inline SuiteResult suite_centroid_half_distance() {
  SuiteResult r{"centroid within half L1 distance", 0, 0};
  auto g = testutil::make_rng(7001);
  while (r.instances < 200) {
    ++r.instances;
    std::size_t k = 2 + pick(g, 4);
    std::vector<Rat> a = detail::random_dist(g, k), b = detail::random_dist(g, k);
    Rat d = detail::l1(a, b);
    auto c = centroid({a, b}, d / 2);
    bool ok = c.has_value();
    if (ok) {
      Rat sum = 0;
      for (const Rat& x : *c) sum += x;
      ok = sum == Rat(1) && detail::l1(*c, a) <= d / 2 && detail::l1(*c, b) <= d / 2;
    }
    if (ok && d > 0) ok = !centroid({a, b}, d / 2 - d / 100).has_value();
    if (!ok) ++r.violations;
  }
  return r;
}

// 2. Greatest tolerant bisimilarities add: s ~(e1) t and t ~(e2) u imply
// s ~(e1+e2) u.
inline SuiteResult suite_eps_additivity() {
  SuiteResult r{"eps-bisimilarity additivity", 0, 0};
  auto g = testutil::make_rng(7002);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 5);
    Lmc m = testutil::random_lmc(g, o);
    Rat e1 = detail::small_eps(g), e2 = detail::small_eps(g);
    Relation g1 = greatest_eps_bisimilarity(m, e1);
    Relation g2 = greatest_eps_bisimilarity(m, e2);
    Relation g12 = greatest_eps_bisimilarity(m, e1 + e2);
    bool ok = true;
    for (std::size_t s = 0; s < m.size() && ok; ++s)
      for (std::size_t t = 0; t < m.size() && ok; ++t) {
        if (s != t && !g1.related(s, t)) continue;
        for (std::size_t u = 0; u < m.size() && ok; ++u) {
          if (t != u && !g2.related(t, u)) continue;
          if (s != u && !g12.related(s, u)) ok = false;
        }
      }
    if (!ok) ++r.violations;
  }
  return r;
}

// 3. The same additivity for the greatest weak (stutter-path) bisimilarity.
inline SuiteResult suite_weak_additivity() {
  SuiteResult r{"weak bisimilarity additivity", 0, 0};
  auto g = testutil::make_rng(7003);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 4);
    Lmc m = testutil::random_lmc(g, o);
    static const Rat pool[] = {Rat(1, 10), Rat(1, 8), Rat(1, 6)};
    Rat e1 = pool[pick(g, 3)], e2 = pool[pick(g, 3)];
    Relation g1 = greatest_weak_eps_bisimilarity(m, e1);
    Relation g2 = greatest_weak_eps_bisimilarity(m, e2);
    Relation g12 = greatest_weak_eps_bisimilarity(m, e1 + e2);
    bool ok = true;
    for (std::size_t s = 0; s < m.size() && ok; ++s)
      for (std::size_t t = 0; t < m.size() && ok; ++t) {
        if (s != t && !g1.related(s, t)) continue;
        for (std::size_t u = 0; u < m.size() && ok; ++u) {
          if (t != u && !g2.related(t, u)) continue;
          if (s != u && !g12.related(s, u)) ok = false;
        }
      }
    if (!ok) ++r.violations;
  }
  return r;
}

// 4. The bounded-unrolling relation reaches the greatest relation as a
// fixpoint: enough refinement steps equal the limit.
inline SuiteResult suite_upto_limit() {
  SuiteResult r{"bounded unrolling reaches the greatest fixpoint", 0, 0};
  auto g = testutil::make_rng(7004);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 5);
    Lmc m = testutil::random_lmc(g, o);
    static const Rat pool[] = {Rat(0), Rat(1, 10), Rat(1, 8), Rat(1, 4), Rat(1, 2)};
    Rat eps = pool[pick(g, 5)];
    unsigned deep = static_cast<unsigned>(m.size() * m.size() + 2);
    if (!(up_to_bisimilarity(m, eps, deep) == greatest_eps_bisimilarity(m, eps)))
      ++r.violations;
  }
  return r;
}

// 5. The greatest relation is itself a passing relation for the checker.
inline SuiteResult suite_greatest_is_bisimulation() {
  SuiteResult r{"greatest relation passes its own check", 0, 0};
  auto g = testutil::make_rng(7005);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 6);
    Lmc m = testutil::random_lmc(g, o);
    Rat eps = detail::small_eps(g);
    if (!is_eps_bisimulation(m, greatest_eps_bisimilarity(m, eps), eps).ok)
      ++r.violations;
  }
  return r;
}

// 6. Every tolerant bisimulation also satisfies the two-sided closed-set
// condition (checked on the greatest relation and on passing random ones).
inline SuiteResult suite_bisim_implies_closed_set() {
  SuiteResult r{"eps-bisimulation implies the closed-set condition", 0, 0};
  auto g = testutil::make_rng(7006);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 6);
    Lmc m = testutil::random_lmc(g, o);
    Rat eps = detail::small_eps(g);
    bool ok = is_eps_apb(m, greatest_eps_bisimilarity(m, eps), eps).ok;
    Relation cand = testutil::random_relation(g, m);
    if (ok && is_eps_bisimulation(m, cand, eps).ok) ok = is_eps_apb(m, cand, eps).ok;
    if (!ok) ++r.violations;
  }
  return r;
}

// 7. Without stuttering there is nothing to collapse: the branching check
// equals the transitive check, and the greatest weak relation equals the
// greatest plain one.
inline SuiteResult suite_no_stutter_collapse() {
  SuiteResult r{"stutter-free models collapse branching and weak", 0, 0};
  auto g = testutil::make_rng(7007);
  while (r.instances < 200) {
    ++r.instances;
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 4);
    o.no_stutter = true;
    Lmc m = testutil::random_lmc(g, o);
    Rat eps = detail::small_eps(g);
    Partition p = testutil::random_partition(g, m);
    bool ok = is_branching_eps_bisimulation(m, p, eps).ok ==
              is_transitive_eps_bisimulation(m, p, eps).ok;
    if (ok)
      ok = greatest_weak_eps_bisimilarity(m, eps) == greatest_eps_bisimilarity(m, eps);
    if (!ok) ++r.violations;
  }
  return r;
}

// 8. The class-collapse route and the direct until-condition oracle agree on
// the branching check, including divergence handling.
inline SuiteResult suite_branching_oracle_agreement() {
  SuiteResult r{"branching checker agrees with the direct oracle", 0, 0};
  auto g = testutil::make_rng(7008);
  while (r.instances < 200) {
    ++r.instances;
    Lmc m = detail::random_divergence_lmc(g, 2 + pick(g, 5));
    Rat eps = detail::small_eps(g);
    Partition p = testutil::random_partition(g, m);
    CheckReport a = is_branching_eps_bisimulation(m, p, eps);
    CheckReport b = is_branching_direct_oracle(m, p, eps);
    if (a.ok != b.ok) ++r.violations;
  }
  return r;
}

// 9. Synthesis round-trip: an accepted partition yields a perturbation that
// moves at most eps per state and makes the partition exactly lumpable.
inline SuiteResult suite_synthesis_round_trip() {
  SuiteResult r{"perturbation synthesis round-trip", 0, 0};
  auto g = testutil::make_rng(7009);
  for (int attempt = 0; attempt < 2000 && r.instances < 200; ++attempt) {
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 4);
    o.max_weight = 3;
    Lmc m = testutil::random_lmc(g, o);
    Partition p = testutil::random_partition(g, m);
    Rat eps = Rat(1 + static_cast<long>(pick(g, 4)), 8);
    PerturbedReport rep = is_eps_perturbed_bisimulation(m, p, eps);
    if (!rep.ok) continue;
    ++r.instances;
    bool ok = true;
    try {
      Perturbation pert = synthesize_perturbation(m, p, *rep.cert, eps);
      auto [pm, moved] = apply_perturbation(m, pert);
      pm.validate();
      for (std::size_t s = 0; s < m.size(); ++s)
        if (moved[s] > eps) ok = false;
      for (const auto& blk : p.blocks())
        for (std::size_t k = 1; k < blk.size() && ok; ++k)
          if (detail::lifted(pm, p, blk[0]) != detail::lifted(pm, p, blk[k])) ok = false;
      if (ok) ok = is_transitive_eps_bisimulation(pm, p, Rat(0)).ok;
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) ++r.violations;
  }
  return r;
}

// 10. Reachability-difference bounds are sound whenever their premises hold
// and the right-hand side is finite (finite-horizon and plain-step flavors).
inline SuiteResult suite_bound_soundness() {
  SuiteResult r{"bound inequalities under verified premises", 0, 0};
  auto g = testutil::make_rng(7010);
  auto pool = testutil::label_pool(2);
  for (int outer = 0; outer < 2000 && r.instances < 200; ++outer) {
    testutil::LmcOpts o;
    o.n = 2 + pick(g, 5);
    Lmc m0 = testutil::random_lmc(g, o);
    if (m0.states_with_ap("a").empty()) continue;
    Lmc m = label_f_closure(m0, "a", "f");
    Rat eps(1 + static_cast<long>(pick(g, 4)), 8);
    Relation great = greatest_eps_bisimilarity(m, eps);
    for (const auto& [s, t] : great.pairs()) {
      BoundReport rep = unbounded_report(m, s, t, eps, BoundFlavor::step, "a", "f");
      if (!rep.premise.relation_holds || !rep.premise.f_discipline_ok) {
        ++r.instances;
        ++r.violations;  // construction guarantees the premises
        continue;
      }
      if (rep.rhs) {
        ++r.instances;
        if (rep.lhs > *rep.rhs) ++r.violations;
      }
      std::vector<std::vector<std::set<std::string>>> traces(1);
      std::size_t k = 1 + pick(g, 3);
      for (std::size_t i = 0; i <= k; ++i) traces[0].push_back(pool[pick(g, pool.size())]);
      BoundReport fin = finite_horizon_report(m, s, t, traces, eps);
      ++r.instances;
      if (!fin.premise.relation_holds || !fin.rhs || fin.lhs > *fin.rhs) ++r.violations;
    }
  }
  return r;
}

// 11. Simplex feasibility agrees with complete vertex enumeration.
inline SuiteResult suite_lp_agreement() {
  SuiteResult r{"LP feasibility agrees with vertex enumeration", 0, 0};
  auto g = testutil::make_rng(7011);
  while (r.instances < 200) {
    ++r.instances;
    std::size_t nvars = 1 + pick(g, 3);
    std::vector<LinearConstraint> cons;
    std::size_t ncons = 1 + pick(g, 4);
    for (std::size_t c = 0; c < ncons; ++c) {
      LinearConstraint lc;
      for (std::size_t i = 0; i < nvars; ++i)
        lc.coeffs.push_back(Rat(static_cast<long>(pick(g, 7)) - 3));
      lc.rhs = Rat(static_cast<long>(pick(g, 7)) - 3);
      std::size_t op = pick(g, 3);
      lc.op = op == 0 ? CmpOp::le : (op == 1 ? CmpOp::ge : CmpOp::eq);
      cons.push_back(std::move(lc));
    }
    bool got = lp_feasible(nvars, cons).has_value();
    if (got != detail::lp_oracle(nvars, cons)) ++r.violations;
  }
  return r;
}

// 12. Max-flow value equals the minimum cut over all source/sink separations.
inline SuiteResult suite_flow_cut_agreement() {
  SuiteResult r{"max flow equals brute-force min cut", 0, 0};
  auto g = testutil::make_rng(7012);
  while (r.instances < 200) {
    ++r.instances;
    std::size_t n = 2 + pick(g, 5);
    std::size_t src = 0, snk = 1 + pick(g, n - 1);
    std::vector<FlowArc> arcs;
    std::size_t narcs = 1 + pick(g, 10);
    for (std::size_t i = 0; i < narcs; ++i) {
      FlowArc a;
      a.from = pick(g, n);
      a.to = pick(g, n);
      if (a.from == a.to) continue;
      a.cap = Rat(static_cast<long>(pick(g, 4)), 1 + static_cast<long>(pick(g, 3)));
      arcs.push_back(a);
    }
    FlowResult res = max_flow(n, src, snk, arcs);
    // Brute-force minimum cut over subsets containing src but not snk.
    Rat best = -1;
    for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
      if (!(mask & (std::size_t(1) << src)) || (mask & (std::size_t(1) << snk))) continue;
      Rat cut = 0;
      for (const FlowArc& a : arcs)
        if ((mask & (std::size_t(1) << a.from)) && !(mask & (std::size_t(1) << a.to)))
          cut += a.cap;
      if (best < 0 || cut < best) best = cut;
    }
    bool ok = res.value == best;
    // And the reported source side is itself a minimum cut.
    Rat side_cut = 0;
    for (const FlowArc& a : arcs)
      if (res.source_side[a.from] && !res.source_side[a.to]) side_cut += a.cap;
    ok = ok && side_cut == best;
    if (!ok) ++r.violations;
  }
  return r;
}

inline std::vector<SuiteResult> run_all() {
  return {suite_centroid_half_distance(),
          suite_eps_additivity(),
          suite_weak_additivity(),
          suite_upto_limit(),
          suite_greatest_is_bisimulation(),
          suite_bisim_implies_closed_set(),
          suite_no_stutter_collapse(),
          suite_branching_oracle_agreement(),
          suite_synthesis_round_trip(),
          suite_bound_soundness(),
          suite_lp_agreement(),
          suite_flow_cut_agreement()};
}

}  // namespace propsuite
