#include "abst/generators.hpp"

#include "abst/errors.hpp"

#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace abst {

namespace {

// Incremental model assembly: states in declaration order, zero arcs omitted.
struct Builder {
  Lmc m;

  std::size_t add(std::string name, std::set<std::string> aps) {
    m.states.push_back(StateRec{std::move(name), std::move(aps)});
    m.rows.emplace_back();
    return m.states.size() - 1;
  }

  void arc(std::size_t from, std::size_t to, const Rat& p) {
    if (p == 0) return;
    m.rows[from][to] += p;
  }

  Lmc take(std::size_t init) {
    m.init = init;
    m.validate();
    return std::move(m);
  }
};

std::string num(long v) { return std::to_string(v); }

[[noreturn]] void range_error(const std::string& msg) { throw ValidationError(msg); }

void require_eps_range(const std::string& family, const Rat& eps, const Rat& lo,
                       const Rat& hi, bool hi_inclusive, const std::string& hi_text) {
  bool ok = eps > lo && (hi_inclusive ? eps <= hi : eps < hi);
  if (!ok) {
    range_error(family + " requires 0 < eps " + (hi_inclusive ? "<= " : "< ") + hi_text +
                ", got eps = " + rat_to_string(eps));
  }
}

}  // namespace

Lmc gen_chain(long n) {
  if (n < 1) range_error("chain requires n >= 1, got " + num(n));
  Builder b;
  std::vector<std::size_t> s(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) s[static_cast<std::size_t>(i)] = b.add("s" + num(i), {});
  std::size_t x = b.add("x", {"a"});
  for (long i = 0; i <= n; ++i) {
    std::size_t si = s[static_cast<std::size_t>(i)];
    if (i < n) b.arc(si, s[static_cast<std::size_t>(i) + 1], Rat(n - i, n));
    b.arc(si, x, Rat(i, n));
  }
  b.arc(x, x, 1);
  return b.take(s[0]);
}

Lmc gen_apb(long n) {
  if (n < 1) range_error("apb requires n >= 1, got " + num(n));
  Builder b;
  std::size_t s = b.add("s", {"a"});
  std::vector<std::size_t> u(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = b.add("u" + num(i), {"a"});
  std::size_t t = b.add("t", {"a"});
  std::size_t x = b.add("x", {"b"});
  std::size_t y = b.add("y", {"c"});
  b.arc(s, u[0], 1);
  b.arc(t, u[static_cast<std::size_t>(n)], 1);
  for (long i = 0; i <= n; ++i) {
    std::size_t ui = u[static_cast<std::size_t>(i)];
    b.arc(ui, x, Rat(n - i, n));
    b.arc(ui, y, Rat(i, n));
  }
  b.arc(x, x, 1);
  b.arc(y, y, 1);
  return b.take(s);
}

Lmc gen_tight_bounded(long n, const Rat& eps) {
  if (n < 1) range_error("tight_bounded requires n >= 1, got " + num(n));
  require_eps_range("tight_bounded", eps, 0, 1, false, "1");
  Builder b;
  std::vector<std::size_t> s(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i)
    s[static_cast<std::size_t>(i)] = b.add("s" + num(i), {"a" + num(i)});
  std::size_t g1 = b.add("G1", {"g"});
  std::vector<std::size_t> t(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i)
    t[static_cast<std::size_t>(i)] = b.add("t" + num(i), {"a" + num(i)});
  std::size_t f = b.add("F", {"f"});
  std::size_t g2 = b.add("G2", {"g"});
  for (long i = 0; i < n; ++i) {
    b.arc(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i) + 1], 1);
    b.arc(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(i) + 1], 1 - eps);
    b.arc(t[static_cast<std::size_t>(i)], f, eps);
  }
  b.arc(s[static_cast<std::size_t>(n)], g1, 1);
  b.arc(t[static_cast<std::size_t>(n)], g2, 1 - eps);
  b.arc(t[static_cast<std::size_t>(n)], f, eps);
  b.arc(g1, g1, 1);
  b.arc(f, f, 1);
  b.arc(g2, g2, 1);
  return b.take(s[0]);
}

Lmc gen_unbounded_cex(const Rat& eps) {
  require_eps_range("unbounded_cex", eps, 0, 1, false, "1");
  Builder b;
  std::size_t s0 = b.add("s0", {"a"});
  std::size_t s1 = b.add("s1", {"a"});
  std::size_t s2 = b.add("s2", {"a"});
  std::size_t s3 = b.add("s3", {"g"});
  b.arc(s0, s1, Rat(1, 2));
  b.arc(s0, s2, Rat(1, 2));
  b.arc(s1, s1, 1);
  b.arc(s2, s3, eps);
  b.arc(s2, s2, 1 - eps);
  b.arc(s3, s3, 1);
  return b.take(s0);
}

Lmc gen_tight_unbounded(const Rat& p, const Rat& eps) {
  if (!(p > 0 && p < 1))
    range_error("tight_unbounded requires 0 < p < 1, got p = " + rat_to_string(p));
  if (!(eps > 0 && eps < p / 2))
    range_error("tight_unbounded requires 0 < eps < p/2, got eps = " + rat_to_string(eps) +
                " with p = " + rat_to_string(p));
  Builder b;
  std::size_t s = b.add("s", {"a"});
  std::size_t r = b.add("r", {"f"});
  std::size_t q = b.add("q", {"g"});
  std::size_t t = b.add("t", {"a"});
  std::size_t rp = b.add("rp", {"f"});
  std::size_t qp = b.add("qp", {"g"});
  b.arc(s, r, p / 2);
  b.arc(s, s, 1 - p);
  b.arc(s, q, p / 2);
  b.arc(t, rp, p / 2 + eps);
  b.arc(t, t, 1 - p);
  b.arc(t, qp, p / 2 - eps);
  b.arc(r, r, 1);
  b.arc(q, q, 1);
  b.arc(rp, rp, 1);
  b.arc(qp, qp, 1);
  return b.take(s);
}

Lmc gen_nonunique(const Rat& eps) {
  require_eps_range("nonunique", eps, 0, Rat(1, 2), false, "1/2");
  Builder b;
  std::size_t s = b.add("s", {});
  std::size_t t = b.add("t", {});
  std::size_t u = b.add("u", {});
  std::size_t x = b.add("x", {"a"});
  std::size_t y = b.add("y", {"b"});
  b.arc(s, x, Rat(1, 2) - eps);
  b.arc(s, y, Rat(1, 2) + eps);
  b.arc(t, x, Rat(1, 2));
  b.arc(t, y, Rat(1, 2));
  b.arc(u, x, Rat(1, 2) + eps);
  b.arc(u, y, Rat(1, 2) - eps);
  b.arc(x, x, 1);
  b.arc(y, y, 1);
  return b.take(t);
}

namespace {

// Shared middle layer of the branching-cells pair: u1..u4 -> {v, w}.
void ms_mt_middle(Builder& b, const Rat& eps, std::vector<std::size_t>& u,
                  std::size_t& v, std::size_t& w) {
  u.clear();
  for (long i = 1; i <= 4; ++i) u.push_back(b.add("u" + num(i), {"b"}));
  v = b.add("v", {});
  w = b.add("w", {"c"});
  b.arc(u[0], v, Rat(1, 2) - 2 * eps);
  b.arc(u[0], w, Rat(1, 2) + 2 * eps);
  b.arc(u[1], v, Rat(1, 2) - eps);
  b.arc(u[1], w, Rat(1, 2) + eps);
  b.arc(u[2], v, Rat(1, 2) - eps);
  b.arc(u[2], w, Rat(1, 2) + eps);
  b.arc(u[3], v, Rat(1, 2));
  b.arc(u[3], w, Rat(1, 2));
  b.arc(v, v, 1);
  b.arc(w, w, 1);
}

}  // namespace

std::pair<Lmc, Lmc> gen_ms_mt(const Rat& eps) {
  require_eps_range("ms_mt", eps, 0, Rat(1, 4), false, "1/4");
  Builder bm;
  std::size_t s = bm.add("s", {"a"});
  std::vector<std::size_t> um;
  std::size_t vm = 0, wm = 0;
  ms_mt_middle(bm, eps, um, vm, wm);
  for (std::size_t i = 0; i < 4; ++i) bm.arc(s, um[i], Rat(1, 4));

  Builder bn;
  std::size_t t = bn.add("t", {"a"});
  std::vector<std::size_t> un;
  std::size_t vn = 0, wn = 0;
  ms_mt_middle(bn, eps, un, vn, wn);
  bn.arc(t, un[0], Rat(1, 2));
  bn.arc(t, un[3], Rat(1, 2));
  return {bm.take(s), bn.take(t)};
}

Lmc gen_strictly_finer(const Rat& eps) {
  require_eps_range("strictly_finer", eps, 0, Rat(1, 3), false, "1/3");
  Builder b;
  std::size_t s = b.add("s", {"a"});
  std::size_t u1 = b.add("u1", {"b"});
  std::size_t u2 = b.add("u2", {"b"});
  std::size_t u3 = b.add("u3", {"b"});
  std::size_t x = b.add("x", {});
  std::size_t y = b.add("y", {"a"});
  std::size_t z = b.add("z", {"b"});
  std::size_t t = b.add("t", {"a"});
  b.arc(s, u1, Rat(1, 2));
  b.arc(s, u2, Rat(1, 2));
  b.arc(t, u3, 1);
  b.arc(u1, x, Rat(1, 3) - eps);
  b.arc(u1, y, Rat(1, 3) + eps);
  b.arc(u1, z, Rat(1, 3));
  b.arc(u2, x, Rat(1, 3) - eps);
  b.arc(u2, y, Rat(1, 3));
  b.arc(u2, z, Rat(1, 3) + eps);
  b.arc(u3, x, Rat(1, 3));
  b.arc(u3, y, Rat(1, 3));
  b.arc(u3, z, Rat(1, 3));
  b.arc(x, x, 1);
  b.arc(y, y, 1);
  b.arc(z, z, 1);
  return b.take(s);
}

std::pair<Lmc, Lmc> gen_graph_iso_family(long n, const Rat& eps) {
  if (n < 1) range_error("graph_iso requires n >= 1, got " + num(n));
  Rat cap = Rat(1) / (Rat(n) * Rat(n + 1) * Rat(n + 1));
  if (!(eps > 0 && eps <= cap))
    range_error("graph_iso requires 0 < eps <= 1/(n*(n+1)^2), got eps = " +
                rat_to_string(eps) + " with n = " + num(n));
  Rat big = Rat(n + 2, (n + 1) * (n + 1));
  Rat small = Rat(1, (n + 1) * (n + 1));

  Builder bm;
  std::size_t s = bm.add("s", {"a"});
  std::vector<std::size_t> si;
  for (long i = 1; i <= n + 1; ++i) si.push_back(bm.add("s" + num(i), {"b"}));
  std::size_t x = bm.add("x", {"c"});
  for (long i = 1; i <= n; ++i) bm.arc(s, si[static_cast<std::size_t>(i) - 1], big);
  bm.arc(s, si[static_cast<std::size_t>(n)], small);
  for (long i = 1; i <= n + 1; ++i) {
    std::size_t state = si[static_cast<std::size_t>(i) - 1];
    Rat shift = eps * Rat(n - 2 * i + 1);
    bm.arc(state, x, Rat(1, 2) + shift);
    bm.arc(state, state, Rat(1, 2) - shift);
  }
  bm.arc(x, x, 1);

  Builder bn;
  std::size_t t = bn.add("t", {"a"});
  std::vector<std::size_t> ti;
  for (long i = 1; i <= n + 1; ++i) ti.push_back(bn.add("t" + num(i), {"b"}));
  std::size_t y = bn.add("y", {"c"});
  bn.arc(t, ti[0], small);
  for (long i = 2; i <= n + 1; ++i) bn.arc(t, ti[static_cast<std::size_t>(i) - 1], big);
  for (long i = 1; i <= n + 1; ++i) {
    std::size_t state = ti[static_cast<std::size_t>(i) - 1];
    Rat shift = eps * Rat(n - 2 * i + 2);
    bn.arc(state, y, Rat(1, 2) + shift);
    bn.arc(state, state, Rat(1, 2) - shift);
  }
  bn.arc(y, y, 1);
  return {bm.take(s), bn.take(t)};
}

std::pair<Lmc, Lmc> gen_mn_nn_2(const Rat& eps) { return gen_graph_iso_family(2, eps); }

std::pair<Lmc, Lmc> gen_perturbation_gap_family(long n, const Rat& eps) {
  if (n < 1) range_error("perturbation_gap requires n >= 1, got " + num(n));
  if (!(eps > 0 && eps <= Rat(1, 4 * n)))
    range_error("perturbation_gap requires 0 < eps <= 1/(4n), got eps = " +
                rat_to_string(eps) + " with n = " + num(n));
  UniformGadget gadget = knuth_yao_uniform(static_cast<std::size_t>(n));

  auto build = [&](bool left) {
    Builder b;
    std::size_t inner_count = gadget.inner.size();
    std::vector<std::size_t> d;
    std::size_t synthetic_d0 = 0;
    if (inner_count == 0) {
      synthetic_d0 = b.add("d0", {});
    } else {
      for (std::size_t i = 0; i < inner_count; ++i) d.push_back(b.add("d" + num(static_cast<long>(i)), {}));
    }
    std::vector<std::size_t> entry_targets;  // a_i resp. b_i
    for (long i = 1; i <= n; ++i)
      entry_targets.push_back(b.add((left ? "a" : "b") + num(i), {"l" + num(i)}));
    std::vector<std::size_t> ladder;  // s_1..s_{n+1} resp. t_1..t_n
    long ladder_len = left ? n + 1 : n;
    for (long i = 1; i <= ladder_len; ++i)
      ladder.push_back(b.add((left ? "s" : "t") + num(i), {"a"}));
    std::size_t sink = b.add(left ? "x" : "y", {"b"});

    if (inner_count == 0) {
      b.arc(synthetic_d0, entry_targets[0], 1);
    } else {
      for (std::size_t i = 0; i < inner_count; ++i) {
        auto resolve = [&](const UniformGadget::Ref& ref) {
          return ref.is_exit ? entry_targets[ref.idx] : d[ref.idx];
        };
        b.arc(d[i], resolve(gadget.inner[i].first), Rat(1, 2));
        b.arc(d[i], resolve(gadget.inner[i].second), Rat(1, 2));
      }
    }
    for (long i = 1; i <= n; ++i) {
      std::size_t from = entry_targets[static_cast<std::size_t>(i) - 1];
      if (left) {
        b.arc(from, ladder[static_cast<std::size_t>(i) - 1], Rat(1, 2));
        b.arc(from, ladder[static_cast<std::size_t>(i)], Rat(1, 2));
      } else {
        b.arc(from, ladder[static_cast<std::size_t>(i) - 1], 1);
      }
    }
    for (long i = 1; i <= ladder_len; ++i) {
      std::size_t state = ladder[static_cast<std::size_t>(i) - 1];
      Rat stay = left ? Rat(1, 2) + Rat(2 * (i - 1)) * eps
                      : Rat(1, 2) + Rat(2 * i - 1) * eps;
      b.arc(state, state, stay);
      b.arc(state, sink, 1 - stay);
    }
    b.arc(sink, sink, 1);
    return b.take(inner_count == 0 ? synthetic_d0 : d[0]);
  };
  return {build(true), build(false)};
}

long SubsetSumInstance::total() const {
  long t = 0;
  for (long v : values) t += v;
  return t;
}

Rat SubsetSumInstance::eps() const {
  long t = total();
  if (t <= 0) throw ValidationError("subsetsum requires at least one positive value");
  return Rat(1, 2 * t);
}

std::pair<Lmc, Lmc> gen_subsetsum(const SubsetSumInstance& inst) {
  if (inst.values.empty()) range_error("subsetsum requires at least one value");
  for (long v : inst.values)
    if (v <= 0) range_error("subsetsum values must be positive, got " + num(v));
  long total = inst.total();
  if (inst.target < 0 || inst.target > total)
    range_error("subsetsum requires 0 <= target <= " + num(total) + ", got " +
                num(inst.target));
  Rat eps = inst.eps();

  Builder bm;
  std::size_t s = bm.add("s", {"a"});
  std::vector<std::size_t> si;
  for (std::size_t i = 0; i < inst.values.size(); ++i)
    si.push_back(bm.add("s" + num(static_cast<long>(i) + 1), {"a"}));
  std::size_t sa = bm.add("sa", {"a"});
  std::size_t sb = bm.add("sb", {"b"});
  for (std::size_t i = 0; i < inst.values.size(); ++i) {
    bm.arc(s, si[i], Rat(inst.values[i], total));
    bm.arc(si[i], sa, Rat(1, 2));
    bm.arc(si[i], sb, Rat(1, 2));
  }
  bm.arc(sa, sa, 1);
  bm.arc(sb, sb, 1);

  Builder bn;
  std::size_t t = bn.add("t", {"a"});
  std::size_t ty = bn.add("ty", {"a"});
  std::size_t tn = bn.add("tn", {"a"});
  std::size_t ta = bn.add("ta", {"a"});
  std::size_t tb = bn.add("tb", {"b"});
  bn.arc(t, ty, Rat(inst.target, total));
  bn.arc(t, tn, Rat(total - inst.target, total));
  bn.arc(ty, ta, Rat(1, 2) - eps);
  bn.arc(ty, tb, Rat(1, 2) + eps);
  bn.arc(tn, ta, Rat(1, 2) + eps);
  bn.arc(tn, tb, Rat(1, 2) - eps);
  bn.arc(ta, ta, 1);
  bn.arc(tb, tb, 1);
  return {bm.take(s), bn.take(t)};
}

std::pair<Lmc, Lmc> gen_weak_branching_incomparable(const Rat& eps) {
  require_eps_range("weak_branching_incomparable", eps, 0, Rat(1, 4), false, "1/4");

  Builder bl;
  std::size_t s = bl.add("s", {"a"});
  std::size_t s1 = bl.add("s1", {"a"});
  std::size_t x = bl.add("x", {});
  std::size_t y = bl.add("y", {"b"});
  std::size_t t = bl.add("t", {"a"});
  std::size_t t1 = bl.add("t1", {"a"});
  bl.arc(s, x, Rat(1, 2));
  bl.arc(s, s1, Rat(1, 2));
  bl.arc(s1, x, Rat(1, 4));
  bl.arc(s1, y, Rat(3, 4));
  bl.arc(t, x, Rat(1, 2) + eps);
  bl.arc(t, t1, Rat(1, 2) - eps);
  bl.arc(t1, x, Rat(1, 4) + eps);
  bl.arc(t1, y, Rat(3, 4) - eps);
  bl.arc(x, x, 1);
  bl.arc(y, y, 1);

  Builder br;
  std::size_t rs = br.add("s", {"a"});
  std::size_t rt = br.add("t", {"a"});
  std::size_t ru = br.add("u", {"a"});
  std::size_t rv = br.add("v", {"a"});
  std::size_t rw = br.add("w", {"a"});
  std::size_t rx = br.add("x", {});
  std::size_t ry = br.add("y", {"b"});
  br.arc(rs, ru, Rat(1, 2));
  br.arc(rs, rv, Rat(1, 2));
  br.arc(rt, rv, Rat(1, 2));
  br.arc(rt, rw, Rat(1, 2));
  br.arc(ru, rx, Rat(1, 2) + eps);
  br.arc(ru, ry, Rat(1, 2) - eps);
  br.arc(rv, rx, Rat(1, 2));
  br.arc(rv, ry, Rat(1, 2));
  br.arc(rw, rx, Rat(1, 2) - eps);
  br.arc(rw, ry, Rat(1, 2) + eps);
  br.arc(rx, rx, 1);
  br.arc(ry, ry, 1);
  return {bl.take(s), br.take(rs)};
}

std::pair<Lmc, Lmc> gen_eps_vs_weak_branching(const Rat& eps1, const Rat& eps2) {
  bool ok = eps1 > 0 && eps1 < 1 && eps2 > 0 && eps2 < 1 && eps1 != eps2 && eps1 + eps2 < 1;
  if (!ok)
    range_error("eps_vs_weak_branching requires eps1, eps2 in (0,1) with eps1 != eps2 "
                "and eps1 + eps2 < 1, got eps1 = " +
                rat_to_string(eps1) + ", eps2 = " + rat_to_string(eps2));
  Rat eps = rat_abs(eps1 - eps2);

  Builder bl;
  std::size_t s = bl.add("s", {"a"});
  std::size_t x1 = bl.add("x1", {"b"});
  std::size_t x2 = bl.add("x2", {});
  std::size_t t = bl.add("t", {"a"});
  bl.arc(s, x1, eps1);
  bl.arc(s, x2, eps2);
  bl.arc(s, s, 1 - eps1 - eps2);
  bl.arc(t, x1, eps2);
  bl.arc(t, x2, eps1);
  bl.arc(t, t, 1 - eps1 - eps2);
  bl.arc(x1, x1, 1);
  bl.arc(x2, x2, 1);

  Builder br;
  std::size_t rs = br.add("s", {"a"});
  std::size_t rs1 = br.add("s1", {"a"});
  std::size_t rx = br.add("x", {"b"});
  std::size_t ry = br.add("y", {});
  std::size_t rt1 = br.add("t1", {"a"});
  std::size_t rt = br.add("t", {"a"});
  br.arc(rs, rs1, 1 - eps);
  br.arc(rs, rs, eps / 2);
  br.arc(rs, ry, eps / 2);
  br.arc(rs1, rx, 1 - eps);
  br.arc(rs1, rs1, eps / 2);
  br.arc(rs1, ry, eps / 2);
  br.arc(rt, rt1, 1);
  br.arc(rt1, rx, 1);
  br.arc(rx, rx, 1);
  br.arc(ry, ry, 1);
  return {bl.take(s), br.take(rs)};
}

Lmc gen_mr_example(const Rat& eps, const Rat& delta) {
  if (!(delta > 0 && delta < Rat(1, 2)))
    range_error("mr_example requires 0 < delta < 1/2, got delta = " + rat_to_string(delta));
  if (!(eps > 0 && eps < 1 - 2 * delta && eps <= Rat(1, 2)))
    range_error("mr_example requires 0 < eps < 1 - 2*delta and eps <= 1/2, got eps = " +
                rat_to_string(eps) + " with delta = " + rat_to_string(delta));
  Builder b;
  std::size_t s = b.add("s", {"a"});
  std::size_t x = b.add("x", {"b"});
  std::size_t t = b.add("t", {"a"});
  std::size_t s1 = b.add("s1", {"a"});
  std::size_t t1 = b.add("t1", {"a"});
  std::size_t p = b.add("p", {});
  std::size_t q = b.add("q", {});
  b.arc(s, s1, 1 - eps);
  b.arc(s, x, eps);
  b.arc(s1, s1, 1);
  b.arc(x, x, 1);
  b.arc(t, t1, 1);
  b.arc(t1, s1, 1 - eps / 2);
  b.arc(t1, x, eps / 2);
  b.arc(p, p, 1 - 2 * delta);
  b.arc(p, s, delta);
  b.arc(p, x, delta);
  b.arc(q, x, Rat(1, 2) - eps);
  b.arc(q, t, Rat(1, 2) + eps);
  return b.take(s);
}

UniformGadget knuth_yao_uniform(std::size_t n) {
  if (n < 1) range_error("knuth_yao requires n >= 1, got " + num(static_cast<long>(n)));
  UniformGadget g;
  if (n == 1) return g;  // the entry already decides: exit 0 with certainty

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::deque<std::pair<std::size_t, std::size_t>> queue;
  auto intern = [&](std::size_t c, std::size_t v) {
    auto it = seen.find({c, v});
    if (it != seen.end()) return it->second;
    std::size_t idx = seen.size();
    seen.emplace(std::make_pair(c, v), idx);
    queue.emplace_back(c, v);
    return idx;
  };
  auto classify = [&](std::size_t c, std::size_t v) -> UniformGadget::Ref {
    if (c >= n) {
      if (v < n) return UniformGadget::Ref{true, v};
      return UniformGadget::Ref{false, intern(c - n, v - n)};
    }
    return UniformGadget::Ref{false, intern(c, v)};
  };

  intern(1, 0);
  while (!queue.empty()) {
    auto [c, v] = queue.front();
    queue.pop_front();
    UniformGadget::Ref lo = classify(2 * c, 2 * v);
    UniformGadget::Ref hi = classify(2 * c, 2 * v + 1);
    g.inner.emplace_back(lo, hi);
  }
  return g;
}

Lmc gen_knuth_yao_uniform(long n) {
  if (n < 1) range_error("knuth_yao requires n >= 1, got " + num(n));
  UniformGadget gadget = knuth_yao_uniform(static_cast<std::size_t>(n));
  Builder b;
  std::vector<std::size_t> d;
  for (std::size_t i = 0; i < gadget.inner.size(); ++i)
    d.push_back(b.add("d" + num(static_cast<long>(i)), {}));
  std::vector<std::size_t> exits;
  for (long i = 1; i <= n; ++i) exits.push_back(b.add("exit" + num(i), {"x" + num(i)}));
  for (std::size_t i = 0; i < gadget.inner.size(); ++i) {
    auto resolve = [&](const UniformGadget::Ref& ref) {
      return ref.is_exit ? exits[ref.idx] : d[ref.idx];
    };
    b.arc(d[i], resolve(gadget.inner[i].first), Rat(1, 2));
    b.arc(d[i], resolve(gadget.inner[i].second), Rat(1, 2));
  }
  for (std::size_t e : exits) b.arc(e, e, 1);
  return b.take(d.empty() ? exits[0] : d[0]);
}

// --- CLI-facing registry ----------------------------------------------------

namespace {

long need_n(const std::string& family, const GenParams& p) {
  if (!p.n) throw ValidationError("family '" + family + "' requires --n");
  return *p.n;
}

Rat need_eps(const std::string& family, const GenParams& p) {
  if (!p.eps) throw ValidationError("family '" + family + "' requires --eps");
  return *p.eps;
}

GenOutput single(Lmc m) {
  GenOutput out;
  out.models.emplace_back("", std::move(m));
  return out;
}

GenOutput paired(std::pair<Lmc, Lmc> mn) {
  GenOutput out;
  out.models.emplace_back("_M", std::move(mn.first));
  out.models.emplace_back("_N", std::move(mn.second));
  return out;
}

}  // namespace

GenOutput generate(const std::string& family, const GenParams& params) {
  if (family == "chain") {
    long n = need_n(family, params);
    GenOutput out = single(gen_chain(n));
    out.notes["eps"] = rat_to_string(Rat(1, n));
    return out;
  }
  if (family == "apb") {
    long n = need_n(family, params);
    GenOutput out = single(gen_apb(n));
    out.notes["eps"] = rat_to_string(Rat(1, n));
    return out;
  }
  if (family == "tight_bounded")
    return single(gen_tight_bounded(need_n(family, params), need_eps(family, params)));
  if (family == "unbounded_cex") return single(gen_unbounded_cex(need_eps(family, params)));
  if (family == "tight_unbounded") {
    if (!params.p) throw ValidationError("family 'tight_unbounded' requires --p");
    return single(gen_tight_unbounded(*params.p, need_eps(family, params)));
  }
  if (family == "nonunique") return single(gen_nonunique(need_eps(family, params)));
  if (family == "ms_mt") return paired(gen_ms_mt(need_eps(family, params)));
  if (family == "strictly_finer") return single(gen_strictly_finer(need_eps(family, params)));
  if (family == "graph_iso")
    return paired(gen_graph_iso_family(need_n(family, params), need_eps(family, params)));
  if (family == "mn_nn_2") {
    Rat eps = params.eps ? *params.eps : Rat(1, 18);
    GenOutput out = paired(gen_mn_nn_2(eps));
    out.notes["eps"] = rat_to_string(eps);
    return out;
  }
  if (family == "perturbation_gap") {
    long n = need_n(family, params);
    Rat eps = need_eps(family, params);
    GenOutput out = paired(gen_perturbation_gap_family(n, eps));
    out.notes["perturbation_threshold"] = rat_to_string(Rat(2 * n) * eps);
    return out;
  }
  if (family == "subsetsum") {
    if (!params.set) throw ValidationError("family 'subsetsum' requires --set");
    if (!params.target) throw ValidationError("family 'subsetsum' requires --target");
    SubsetSumInstance inst;
    inst.values = *params.set;
    inst.target = *params.target;
    GenOutput out = paired(gen_subsetsum(inst));
    out.notes["eps"] = rat_to_string(inst.eps());
    out.notes["total"] = num(inst.total());
    return out;
  }
  if (family == "weak_branching_incomparable")
    return paired(gen_weak_branching_incomparable(need_eps(family, params)));
  if (family == "eps_vs_weak_branching") {
    Rat eps1 = need_eps(family, params);
    if (!params.eps2) throw ValidationError("family 'eps_vs_weak_branching' requires --eps2");
    GenOutput out = paired(gen_eps_vs_weak_branching(eps1, *params.eps2));
    out.notes["eps"] = rat_to_string(rat_abs(eps1 - *params.eps2));
    return out;
  }
  if (family == "mr_example") {
    if (!params.delta) throw ValidationError("family 'mr_example' requires --delta");
    return single(gen_mr_example(need_eps(family, params), *params.delta));
  }
  if (family == "knuth_yao") return single(gen_knuth_yao_uniform(need_n(family, params)));

  std::ostringstream os;
  os << "unknown family '" << family << "'; known families:";
  for (const std::string& name : gen_family_names()) os << ' ' << name;
  throw ValidationError(os.str());
}

std::vector<std::string> gen_family_names() {
  return {"apb",
          "chain",
          "eps_vs_weak_branching",
          "graph_iso",
          "knuth_yao",
          "mn_nn_2",
          "mr_example",
          "ms_mt",
          "nonunique",
          "perturbation_gap",
          "strictly_finer",
          "subsetsum",
          "tight_bounded",
          "tight_unbounded",
          "unbounded_cex",
          "weak_branching_incomparable"};
}

}  // namespace abst
