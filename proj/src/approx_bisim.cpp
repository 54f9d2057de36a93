// ε-bisimulation checkers: flow-based pair checks, greatest fixpoint,
// weight-function extraction, ε-APB, up-to hierarchy, transitive flavor,
// and exact bisimilarity.

#include "abst/approx_bisim.hpp"

#include <algorithm>
#include <map>

namespace abst {

namespace {

void require_eps(const Rat& eps) {
  if (eps < 0 || eps > 1)
    throw ValidationError("epsilon must be in [0, 1], got " + rat_to_string(eps));
}

// Flow network for one direction of the transfer condition on (s, t):
// source -> s' with cap P(s)(s'), t' -> sink with cap P(t)(t'), s' -> t' for
// related pairs (capacity 2 dominates any feasible flow), and a slack arc
// source -> sink with cap eps. The condition holds iff max flow >= 1.
struct PairNetwork {
  std::vector<std::size_t> ss, tt;  // successor index lists
  std::size_t nodes = 0, source = 0, sink = 1;
  std::vector<FlowArc> arcs;
  std::size_t first_pair_arc = 0, pair_arc_count = 0;
};

PairNetwork build_pair_network(const Lmc& m, const Relation& r, std::size_t s,
                               std::size_t t, const Rat& eps) {
  PairNetwork net;
  net.ss = m.succ(s);
  net.tt = m.succ(t);
  net.nodes = 2 + net.ss.size() + net.tt.size();
  std::map<std::size_t, std::size_t> tnode;
  for (std::size_t j = 0; j < net.tt.size(); ++j)
    tnode[net.tt[j]] = 2 + net.ss.size() + j;
  for (std::size_t i = 0; i < net.ss.size(); ++i)
    net.arcs.push_back({net.source, 2 + i, m.prob(s, net.ss[i])});
  net.first_pair_arc = net.arcs.size();
  for (std::size_t i = 0; i < net.ss.size(); ++i)
    for (std::size_t j = 0; j < net.tt.size(); ++j)
      if (r.related(net.ss[i], net.tt[j]))
        net.arcs.push_back({2 + i, 2 + net.ss.size() + j, Rat(2)});
  net.pair_arc_count = net.arcs.size() - net.first_pair_arc;
  for (std::size_t j = 0; j < net.tt.size(); ++j)
    net.arcs.push_back({2 + net.ss.size() + j, net.sink, m.prob(t, net.tt[j])});
  net.arcs.push_back({net.source, net.sink, eps});
  return net;
}

bool pair_check_fast(const Lmc& m, const Relation& r, std::size_t s, std::size_t t,
                     const Rat& eps) {
  PairNetwork net = build_pair_network(m, r, s, t, eps);
  return max_flow(net.nodes, net.source, net.sink, net.arcs).value >= 1;
}

}  // namespace

PairCheck pair_check_eps(const Lmc& m, const Relation& r, std::size_t s, std::size_t t,
                         const Rat& eps) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  PairNetwork net = build_pair_network(m, r, s, t, eps);
  FlowResult flow = max_flow(net.nodes, net.source, net.sink, net.arcs);
  PairCheck out;
  if (flow.value >= 1) return out;
  out.ok = false;

  // Violating sets A correspond to cut candidates with value
  // V(A) = 1 - P(s)(A) + P(t)(R(A)) + eps, so enumerate A ⊆ Succ(s) and take
  // the lexicographically least minimizer (sorted-sequence order, prefixes
  // first). Guarded fallback: the minimal residual cut.
  Witness w;
  w.s = s;
  w.t = t;
  if (net.ss.size() <= 16) {
    std::vector<std::size_t> best_set;
    Rat best_v;
    bool have = false;
    for (std::size_t mask = 0; mask < (std::size_t(1) << net.ss.size()); ++mask) {
      std::set<std::size_t> a;
      for (std::size_t i = 0; i < net.ss.size(); ++i)
        if (mask & (std::size_t(1) << i)) a.insert(net.ss[i]);
      Rat v = 1 - m.prob_set(s, a) + m.prob_set(t, r.image(a)) + eps;
      std::vector<std::size_t> sorted(a.begin(), a.end());
      if (!have || v < best_v ||
          (v == best_v && std::lexicographical_compare(sorted.begin(), sorted.end(),
                                                       best_set.begin(), best_set.end()))) {
        have = true;
        best_v = v;
        best_set = sorted;
      }
    }
    w.set = best_set;
  } else {
    std::set<std::size_t> a;
    for (std::size_t i = 0; i < net.ss.size(); ++i)
      if (flow.source_side[2 + i]) a.insert(net.ss[i]);
    w.set.assign(a.begin(), a.end());
  }
  std::set<std::size_t> a(w.set.begin(), w.set.end());
  w.lhs = m.prob_set(s, a);
  w.rhs = m.prob_set(t, r.image(a)) + eps;
  out.witness = w;
  return out;
}

CheckReport is_eps_bisimulation(const Lmc& m, const Relation& r, const Rat& eps) {
  require_eps(eps);
  if (r.size() != m.size())
    throw ValidationError("relation is over a different number of states");
  CheckReport rep;
  for (const auto& [i, j] : r.pairs()) {
    if (!m.same_label(i, j)) {
      rep.ok = false;
      rep.reason = "label mismatch: " + m.states[i].name + " vs " + m.states[j].name;
      Witness w;
      w.s = i;
      w.t = j;
      w.lhs = 0;
      w.rhs = 0;
      rep.witness = w;
      return rep;
    }
    for (auto [s, t] : {std::make_pair(i, j), std::make_pair(j, i)}) {
      PairCheck pc = pair_check_eps(m, r, s, t, eps);
      if (!pc.ok) {
        rep.ok = false;
        rep.reason = "flow condition violated for (" + m.states[s].name + ", " +
                     m.states[t].name + ")";
        rep.witness = pc.witness;
        return rep;
      }
    }
  }
  return rep;
}

Relation greatest_eps_bisimilarity(const Lmc& m, const Rat& eps) {
  require_eps(eps);
  Relation r = Relation::equal_labels(m.state_labels());
  bool deleted = true;
  while (deleted) {
    deleted = false;
    // Snapshot: deleting invalidates iterators, and the fixpoint restarts
    // the scan after every deletion anyway.
    std::vector<std::pair<std::size_t, std::size_t>> pairs(r.pairs().begin(),
                                                           r.pairs().end());
    for (const auto& [i, j] : pairs) {
      if (!pair_check_fast(m, r, i, j, eps) || !pair_check_fast(m, r, j, i, eps)) {
        r.remove(i, j);
        deleted = true;
        break;
      }
    }
  }
  return r;
}

std::optional<WeightFunction> extract_weight_function(const Lmc& m, const Relation& r,
                                                      std::size_t s, std::size_t t,
                                                      const Rat& eps) {
  require_eps(eps);
  PairNetwork net = build_pair_network(m, r, s, t, eps);
  FlowResult flow = max_flow(net.nodes, net.source, net.sink, net.arcs);
  if (flow.value < 1) return std::nullopt;

  // Absolute mass moved from s' to t' (pair arcs), then northwest-corner
  // completion: undelivered source mass meets unfilled target mass in
  // canonical (ascending successor) order.
  std::map<std::size_t, std::map<std::size_t, Rat>> mass;
  std::map<std::size_t, Rat> out_of, into;
  for (std::size_t k = 0; k < net.pair_arc_count; ++k) {
    const FlowArc& arc = net.arcs[net.first_pair_arc + k];
    Rat f = flow.flow[net.first_pair_arc + k];
    if (f == 0) continue;
    std::size_t sp = net.ss[arc.from - 2];
    std::size_t tp = net.tt[arc.to - 2 - net.ss.size()];
    mass[sp][tp] += f;
    out_of[sp] += f;
    into[tp] += f;
  }
  std::vector<std::pair<std::size_t, Rat>> residual, deficit;
  for (std::size_t sp : net.ss) {
    Rat rho = m.prob(s, sp) - out_of[sp];
    if (rho > 0) residual.emplace_back(sp, rho);
  }
  for (std::size_t tp : net.tt) {
    Rat sigma = m.prob(t, tp) - into[tp];
    if (sigma > 0) deficit.emplace_back(tp, sigma);
  }
  std::size_t i = 0, j = 0;
  while (i < residual.size() && j < deficit.size()) {
    Rat move = std::min(residual[i].second, deficit[j].second);
    mass[residual[i].first][deficit[j].first] += move;
    residual[i].second -= move;
    deficit[j].second -= move;
    if (residual[i].second == 0) ++i;
    if (deficit[j].second == 0) ++j;
  }

  WeightFunction wf;
  for (std::size_t sp : net.ss) {
    Rat total = m.prob(s, sp);
    for (const auto& [tp, v] : mass[sp])
      if (v != 0) wf.w[sp][tp] = v / total;
  }
  std::string err = weight_function_error(m, r, s, t, eps, wf);
  if (!err.empty()) throw std::logic_error("extracted weight function invalid: " + err);
  return wf;
}

std::string weight_function_error(const Lmc& m, const Relation& r, std::size_t s,
                                  std::size_t t, const Rat& eps, const WeightFunction& wf) {
  std::vector<std::size_t> ss = m.succ(s), tt = m.succ(t);
  std::set<std::size_t> succ_t(tt.begin(), tt.end());
  for (const auto& [sp, row] : wf.w) {
    if (m.prob(s, sp) == 0) return "weight row for a non-successor";
    Rat sum = 0;
    for (const auto& [tp, v] : row) {
      if (v < 0) return "negative weight";
      if (!succ_t.count(tp)) return "weight onto a non-successor of the second state";
      sum += v;
    }
    if (sum != 1) return "weight row does not sum to 1";
  }
  for (std::size_t sp : ss)
    if (!wf.w.count(sp)) return "missing weight row for a successor";
  // (1) exact marginal: P(t)(t') = sum_{s'} P(s)(s') * w(s')(t').
  for (std::size_t tp : tt) {
    Rat acc = 0;
    for (std::size_t sp : ss) {
      auto rit = wf.w.find(sp);
      auto vit = rit->second.find(tp);
      if (vit != rit->second.end()) acc += m.prob(s, sp) * vit->second;
    }
    if (acc != m.prob(t, tp)) return "marginal mismatch at " + m.states[tp].name;
  }
  // (2) related mass at least 1 - eps.
  Rat related_mass = 0;
  for (std::size_t sp : ss) {
    auto rit = wf.w.find(sp);
    for (const auto& [tp, v] : rit->second)
      if (r.related(sp, tp)) related_mass += m.prob(s, sp) * v;
  }
  if (related_mass < 1 - eps) return "related mass below 1 - eps";
  return "";
}

CheckReport is_eps_apb(const Lmc& m, const Relation& r, const Rat& eps) {
  require_eps(eps);
  if (r.size() != m.size())
    throw ValidationError("relation is over a different number of states");
  CheckReport rep;
  Partition comps = components(r);
  for (const auto& [i, j] : r.pairs()) {
    if (!m.same_label(i, j)) {
      rep.ok = false;
      rep.reason = "label mismatch: " + m.states[i].name + " vs " + m.states[j].name;
      Witness w;
      w.s = i;
      w.t = j;
      w.lhs = 0;
      w.rhs = 0;
      rep.witness = w;
      return rep;
    }
    for (auto [s, t] : {std::make_pair(i, j), std::make_pair(j, i)}) {
      // Max over R-closed A of P(s)(A) - P(t)(A) = sum over components of the
      // positive part; the maximizing A is the union of positive components.
      Rat gap = 0;
      std::set<std::size_t> a;
      for (const auto& block : comps.blocks()) {
        std::set<std::size_t> c(block.begin(), block.end());
        Rat d = m.prob_set(s, c) - m.prob_set(t, c);
        if (d > 0) {
          gap += d;
          a.insert(c.begin(), c.end());
        }
      }
      if (gap > eps) {
        rep.ok = false;
        rep.reason = "closed-set condition violated for (" + m.states[s].name + ", " +
                     m.states[t].name + ")";
        Witness w;
        w.s = s;
        w.t = t;
        w.set.assign(a.begin(), a.end());
        w.lhs = m.prob_set(s, a);
        w.rhs = m.prob_set(t, a) + eps;
        rep.witness = w;
        return rep;
      }
    }
  }
  return rep;
}

Relation up_to_bisimilarity(const Lmc& m, const Rat& eps, unsigned n) {
  require_eps(eps);
  Relation r = Relation::full(m.size());
  const Relation candidates = Relation::equal_labels(m.state_labels());
  for (unsigned k = 0; k < n; ++k) {
    Relation next(m.size());
    for (const auto& [i, j] : candidates.pairs())
      if (pair_check_fast(m, r, i, j, eps) && pair_check_fast(m, r, j, i, eps))
        next.add(i, j);
    r = next;
  }
  return r;
}

CheckReport is_transitive_eps_bisimulation(const Lmc& m, const Partition& p,
                                           const Rat& eps) {
  require_eps(eps);
  if (p.size() != m.size() || !p.covers_all())
    throw ValidationError("partition must cover every state");
  CheckReport rep;
  for (const auto& block : p.blocks()) {
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b) {
        std::size_t i = block[a], j = block[b];
        if (!m.same_label(i, j)) {
          rep.ok = false;
          rep.reason = "label mismatch in block: " + m.states[i].name + " vs " +
                       m.states[j].name;
          Witness w;
          w.s = i;
          w.t = j;
          w.lhs = 0;
          w.rhs = 0;
          rep.witness = w;
          return rep;
        }
        for (auto [s, t] : {std::make_pair(i, j), std::make_pair(j, i)}) {
          Rat gap = 0;
          std::set<std::size_t> aset;
          for (const auto& cblock : p.blocks()) {
            std::set<std::size_t> c(cblock.begin(), cblock.end());
            Rat d = m.prob_set(s, c) - m.prob_set(t, c);
            if (d > 0) {
              gap += d;
              aset.insert(c.begin(), c.end());
            }
          }
          if (gap > eps) {
            rep.ok = false;
            rep.reason = "block-sum condition violated for (" + m.states[s].name + ", " +
                         m.states[t].name + ")";
            Witness w;
            w.s = s;
            w.t = t;
            w.set.assign(aset.begin(), aset.end());
            w.lhs = m.prob_set(s, aset);
            w.rhs = m.prob_set(t, aset) + eps;
            rep.witness = w;
            return rep;
          }
        }
      }
  }
  return rep;
}

Partition exact_bisimilarity(const Lmc& m) {
  // Start from the label partition, refine by block-probability signatures.
  std::map<std::set<std::string>, std::vector<std::size_t>> by_label;
  for (std::size_t s = 0; s < m.size(); ++s) by_label[m.label(s)].push_back(s);
  std::vector<std::vector<std::size_t>> blocks;
  for (auto& [lab, members] : by_label) blocks.push_back(members);
  Partition p(m.size(), std::move(blocks));

  while (true) {
    std::map<std::pair<std::size_t, std::vector<Rat>>, std::vector<std::size_t>> groups;
    for (std::size_t s = 0; s < m.size(); ++s) {
      std::vector<Rat> sig(p.blocks().size(), Rat(0));
      for (const auto& [t, q] : m.rows[s]) sig[p.block_of(t)] += q;
      groups[{p.block_of(s), std::move(sig)}].push_back(s);
    }
    if (groups.size() == p.blocks().size()) return p;
    std::vector<std::vector<std::size_t>> next;
    next.reserve(groups.size());
    for (auto& [key, members] : groups) next.push_back(members);
    p = Partition(m.size(), std::move(next));
  }
}

}  // namespace abst
