// Branching and weak ε-bisimulation via the class-collapsed model (per
// equivalence class) and the label-collapsed model (per label), plus the
// brute-force oracles and fixpoint computations on top of them.

#include "abst/weak_branching.hpp"

#include "abst/solvers.hpp"

#include <algorithm>
#include <map>

namespace abst {

namespace {

void require_eps(const Rat& eps) {
  if (eps < 0 || eps > 1)
    throw ValidationError("epsilon must be in [0, 1], got " + rat_to_string(eps));
}

void require_cap(std::size_t n, std::size_t cap) {
  std::size_t effective = std::min<std::size_t>(cap, 60);
  if (n > effective)
    throw CapExceeded("search space too large: " + std::to_string(n) +
                      " states exceed cap " + std::to_string(effective));
}

std::string block_names(const Lmc& m, const std::vector<std::size_t>& block) {
  std::string out = "{";
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (i) out += ", ";
    out += m.states[block[i]].name;
  }
  return out + "}";
}

// First block member pair with differing labels, if any.
std::optional<std::pair<std::size_t, std::size_t>> label_clash(const Lmc& m,
                                                               const Partition& p) {
  for (const auto& block : p.blocks())
    for (std::size_t i = 1; i < block.size(); ++i)
      if (!m.same_label(block[0], block[i]))
        return std::make_pair(block[0], block[i]);
  return std::nullopt;
}

}  // namespace

MrResult build_mr(const Lmc& m, const Partition& p, const Rat& eps) {
  require_eps(eps);
  if (p.size() != m.size() || !p.covers_all())
    throw ValidationError("partition must cover every state");
  if (auto clash = label_clash(m, p))
    throw ValidationError("block is not label-homogeneous: " +
                          m.states[clash->first].name + " vs " +
                          m.states[clash->second].name);

  MrResult res;
  const auto& blocks = p.blocks();

  // Stay-forever probability per state, and the divergence dichotomy.
  std::vector<Rat> stay(m.size());
  std::vector<char> divergent(blocks.size(), 0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::set<std::size_t> bset(blocks[b].begin(), blocks[b].end());
    std::vector<Rat> av = always_vector(m, mask_of(m.size(), bset));
    bool all_high = true;
    for (std::size_t u : blocks[b]) {
      stay[u] = av[u];
      if (av[u] < 1 - eps) all_high = false;
    }
    divergent[b] = all_high;
    if (!all_high) {
      for (std::size_t u : blocks[b]) {
        if (stay[u] > 0) {
          res.reason = "divergence dichotomy violated: state " + m.states[u].name +
                       " has stay probability " + rat_to_string(stay[u]) + " in block " +
                       block_names(m, blocks[b]) + " (neither 0 nor >= 1 - eps)";
          res.bad_block = b;
          res.bad_state = u;
          return res;
        }
      }
    }
  }

  MrModel mr;
  mr.base = p;
  mr.divergent = divergent;
  mr.div_state.assign(blocks.size(), std::nullopt);
  mr.model.states = m.states;
  mr.model.init = m.init;
  mr.model.rows.assign(m.size(), {});
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (!divergent[b]) continue;
    std::string name = "__div_" + m.states[blocks[b].front()].name;
    for (const auto& st : mr.model.states)
      if (st.name == name)
        throw ValidationError("divergence state name collides with an existing state: " +
                              name);
    mr.div_state[b] = mr.model.states.size();
    mr.model.states.push_back({name, m.label(blocks[b].front())});
    mr.model.rows.push_back({{mr.model.states.size() - 1, Rat(1)}});
  }

  // P_R(u)(t) = Pr_u(block U t) for targets t outside u's block, plus the
  // divergence arc P_R(u)(div) = Pr_u(□ block).
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::set<std::size_t> bset(blocks[b].begin(), blocks[b].end());
    std::vector<char> allowed = mask_of(m.size(), bset);
    for (std::size_t t = 0; t < m.size(); ++t) {
      if (bset.count(t)) continue;
      std::vector<Rat> uv = until_vector(m, allowed, mask_of(m.size(), {t}));
      for (std::size_t u : blocks[b])
        if (uv[u] > 0) mr.model.rows[u][t] = uv[u];
    }
    for (std::size_t u : blocks[b])
      if (divergent[b] && stay[u] > 0) mr.model.rows[u][*mr.div_state[b]] = stay[u];
  }
  for (std::size_t u = 0; u < m.size(); ++u) {
    Rat sum = 0;
    for (const auto& [t, q] : mr.model.rows[u]) sum += q;
    if (sum != 1)
      throw std::logic_error("class-collapsed row does not sum to 1 for state " +
                             m.states[u].name);
  }
  mr.model.validate();

  std::vector<std::vector<std::size_t>> class_blocks = blocks;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (mr.div_state[b]) class_blocks[b].push_back(*mr.div_state[b]);
  mr.classes = Partition(mr.model.size(), std::move(class_blocks));

  res.ok = true;
  res.mr = std::move(mr);
  return res;
}

CheckReport is_branching_eps_bisimulation(const Lmc& m, const Partition& p,
                                          const Rat& eps) {
  require_eps(eps);
  if (p.size() != m.size() || !p.covers_all())
    throw ValidationError("partition must cover every state");
  if (auto clash = label_clash(m, p)) {
    CheckReport rep;
    rep.ok = false;
    rep.reason = "label mismatch in block: " + m.states[clash->first].name + " vs " +
                 m.states[clash->second].name;
    return rep;
  }
  MrResult res = build_mr(m, p, eps);
  if (!res.ok) {
    CheckReport rep;
    rep.ok = false;
    rep.reason = res.reason;
    return rep;
  }
  return is_transitive_eps_bisimulation(res.mr->model, res.mr->classes, eps);
}

CheckReport is_branching_direct_oracle(const Lmc& m, const Partition& p, const Rat& eps,
                                       std::size_t cap) {
  require_eps(eps);
  if (p.size() != m.size() || !p.covers_all())
    throw ValidationError("partition must cover every state");
  require_cap(m.size(), cap);
  if (auto clash = label_clash(m, p)) {
    CheckReport rep;
    rep.ok = false;
    rep.reason = "label mismatch in block: " + m.states[clash->first].name + " vs " +
                 m.states[clash->second].name;
    return rep;
  }
  const auto& blocks = p.blocks();
  for (std::size_t d = 0; d < blocks.size(); ++d) {
    if (blocks[d].size() < 2) continue;
    std::set<std::size_t> dset(blocks[d].begin(), blocks[d].end());
    std::vector<char> allowed = mask_of(m.size(), dset);
    std::map<std::size_t, std::vector<Rat>> cache;  // block mask -> until vector
    for (std::size_t a = 0; a < blocks[d].size(); ++a)
      for (std::size_t b = a + 1; b < blocks[d].size(); ++b) {
        std::size_t u = blocks[d][a], v = blocks[d][b];
        for (std::size_t bm = 1; bm < (std::size_t(1) << blocks.size()); ++bm) {
          auto it = cache.find(bm);
          if (it == cache.end()) {
            std::set<std::size_t> targ;
            for (std::size_t c = 0; c < blocks.size(); ++c)
              if (bm & (std::size_t(1) << c))
                targ.insert(blocks[c].begin(), blocks[c].end());
            it = cache.emplace(bm, until_vector(m, allowed, mask_of(m.size(), targ)))
                     .first;
          }
          const std::vector<Rat>& uv = it->second;
          for (auto [s, t] : {std::make_pair(u, v), std::make_pair(v, u)}) {
            if (uv[s] > uv[t] + eps) {
              CheckReport rep;
              rep.ok = false;
              rep.reason = "class-until condition violated for (" + m.states[s].name +
                           ", " + m.states[t].name + ")";
              Witness w;
              w.s = s;
              w.t = t;
              std::set<std::size_t> targ;
              for (std::size_t c = 0; c < blocks.size(); ++c)
                if (bm & (std::size_t(1) << c))
                  targ.insert(blocks[c].begin(), blocks[c].end());
              w.set.assign(targ.begin(), targ.end());
              w.lhs = uv[s];
              w.rhs = uv[t] + eps;
              rep.witness = w;
              return rep;
            }
          }
        }
      }
  }
  return CheckReport{};
}

std::optional<Partition> decide_branching_bisimilar(const Lmc& m, std::size_t s,
                                                    std::size_t t, const Rat& eps,
                                                    const DecideOptions& opts) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  if (!m.same_label(s, t)) return std::nullopt;
  std::vector<std::size_t> universe(m.size());
  for (std::size_t i = 0; i < universe.size(); ++i) universe[i] = i;
  return first_passing_partition(
      m.state_labels(), {{s, t}}, universe, opts,
      [&](const Partition& p) { return is_branching_eps_bisimulation(m, p, eps).ok; });
}

std::string label_key(const std::set<std::string>& label) {
  std::string out = "{";
  bool first = true;
  for (const auto& ap : label) {
    if (!first) out += ",";
    first = false;
    out += ap;
  }
  return out + "}";
}

MwModel build_mw(const Lmc& m) {
  // Label classes in canonical key order.
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t s = 0; s < m.size(); ++s) classes[label_key(m.label(s))].push_back(s);

  std::vector<Rat> stay(m.size());
  std::map<std::string, bool> in_script_l;
  for (const auto& [key, members] : classes) {
    std::set<std::size_t> cset(members.begin(), members.end());
    std::vector<Rat> av = always_vector(m, mask_of(m.size(), cset));
    bool any = false;
    for (std::size_t u : members) {
      stay[u] = av[u];
      if (av[u] > 0) any = true;
    }
    in_script_l[key] = any;
  }

  MwModel mw;
  mw.orig_states = m.size();
  mw.model.states = m.states;
  mw.model.init = m.init;
  mw.model.rows.assign(m.size(), {});
  for (const auto& [key, members] : classes) {
    if (!in_script_l[key]) continue;
    std::string name = "__div_";
    bool first = true;
    for (const auto& ap : m.label(members.front())) {
      if (!first) name += "_";
      first = false;
      name += ap;
    }
    for (const auto& st : mw.model.states)
      if (st.name == name)
        throw ValidationError("divergence state name collides with an existing state: " +
                              name);
    mw.div_of_label[key] = mw.model.states.size();
    mw.model.states.push_back({name, m.label(members.front())});
    mw.model.rows.push_back({{mw.model.states.size() - 1, Rat(1)}});
  }

  // P^w(u)(t) = Pr_u(label-class U t) for differently-labeled t, plus the
  // divergence arc P^w(u)(div) = Pr_u(□ label-class).
  for (const auto& [key, members] : classes) {
    std::set<std::size_t> cset(members.begin(), members.end());
    std::vector<char> allowed = mask_of(m.size(), cset);
    for (std::size_t t = 0; t < m.size(); ++t) {
      if (cset.count(t)) continue;
      std::vector<Rat> uv = until_vector(m, allowed, mask_of(m.size(), {t}));
      for (std::size_t u : members)
        if (uv[u] > 0) mw.model.rows[u][t] = uv[u];
    }
    if (in_script_l[key]) {
      std::size_t div = mw.div_of_label[key];
      for (std::size_t u : members)
        if (stay[u] > 0) mw.model.rows[u][div] = stay[u];
    }
  }
  for (std::size_t u = 0; u < m.size(); ++u) {
    Rat sum = 0;
    for (const auto& [t, q] : mw.model.rows[u]) sum += q;
    if (sum != 1)
      throw std::logic_error("label-collapsed row does not sum to 1 for state " +
                             m.states[u].name);
  }
  mw.model.validate();
  return mw;
}

namespace {

// Shared cache for Pr(label-class U A) queries. Keys do not depend on the
// relation being checked, so one cache serves an entire fixpoint run.
struct WeakCache {
  const Lmc* m = nullptr;
  std::vector<std::size_t> class_of;          // state -> label class id
  std::vector<std::vector<char>> class_mask;  // class id -> allowed mask
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Rat>> until;

  explicit WeakCache(const Lmc& model) : m(&model) {
    std::map<std::string, std::size_t> ids;
    class_of.resize(model.size());
    for (std::size_t s = 0; s < model.size(); ++s) {
      std::string key = label_key(model.label(s));
      auto [it, fresh] = ids.emplace(key, class_mask.size());
      if (fresh) class_mask.emplace_back(model.size(), 0);
      class_of[s] = it->second;
      class_mask[it->second][s] = 1;
    }
  }

  const std::vector<Rat>& get(std::size_t cls, std::size_t amask) {
    auto key = std::make_pair(cls, amask);
    auto it = until.find(key);
    if (it != until.end()) return it->second;
    std::vector<char> target(m->size(), 0);
    for (std::size_t i = 0; i < m->size(); ++i)
      if (amask & (std::size_t(1) << i)) target[i] = 1;
    return until.emplace(key, until_vector(*m, class_mask[cls], target)).first->second;
  }
};

// First violating (A, direction) for the pair, A by ascending bitmask,
// i-as-left first.
std::optional<Witness> weak_pair_witness(WeakCache& cache, const Relation& r,
                                         std::size_t i, std::size_t j, const Rat& eps) {
  std::size_t n = cache.m->size();
  for (std::size_t amask = 0; amask < (std::size_t(1) << n); ++amask) {
    std::set<std::size_t> a;
    for (std::size_t k = 0; k < n; ++k)
      if (amask & (std::size_t(1) << k)) a.insert(k);
    std::set<std::size_t> ra = r.image(a);
    std::size_t rmask = 0;
    for (std::size_t k : ra) rmask |= std::size_t(1) << k;
    for (auto [s, t] : {std::make_pair(i, j), std::make_pair(j, i)}) {
      Rat lhs = cache.get(cache.class_of[s], amask)[s];
      Rat rhs = cache.get(cache.class_of[t], rmask)[t] + eps;
      if (lhs > rhs) {
        Witness w;
        w.s = s;
        w.t = t;
        w.set.assign(a.begin(), a.end());
        w.lhs = lhs;
        w.rhs = rhs;
        return w;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

CheckReport is_weak_eps_bisimulation(const Lmc& m, const Relation& r, const Rat& eps,
                                     std::size_t cap) {
  require_eps(eps);
  if (r.size() != m.size())
    throw ValidationError("relation is over a different number of states");
  require_cap(m.size(), cap);
  WeakCache cache(m);
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
    if (auto w = weak_pair_witness(cache, r, i, j, eps)) {
      rep.ok = false;
      rep.reason = "weak until condition violated for (" + m.states[w->s].name + ", " +
                   m.states[w->t].name + ")";
      rep.witness = *w;
      return rep;
    }
  }
  return rep;
}

Relation greatest_weak_eps_bisimilarity(const Lmc& m, const Rat& eps, std::size_t cap) {
  require_eps(eps);
  require_cap(m.size(), cap);
  WeakCache cache(m);
  Relation r = Relation::equal_labels(m.state_labels());
  bool deleted = true;
  while (deleted) {
    deleted = false;
    std::vector<std::pair<std::size_t, std::size_t>> pairs(r.pairs().begin(),
                                                           r.pairs().end());
    for (const auto& [i, j] : pairs) {
      if (weak_pair_witness(cache, r, i, j, eps)) {
        r.remove(i, j);
        deleted = true;
        break;
      }
    }
  }
  CheckReport rep = is_weak_eps_bisimulation(m, r, eps, cap);
  if (!rep.ok) throw std::logic_error("fixpoint is not a weak eps-bisimulation");
  return r;
}

Relation lift_rw(const Lmc& m, const MwModel& mw, const Relation& r, const Rat& eps) {
  require_eps(eps);
  if (r.size() != m.size() || mw.orig_states != m.size())
    throw ValidationError("relation and label-collapsed model must match the model");
  Relation rw(mw.model.size());
  for (const auto& [i, j] : r.pairs()) rw.add(i, j);
  for (std::size_t s = 0; s < m.size(); ++s) {
    auto it = mw.div_of_label.find(label_key(m.label(s)));
    if (it == mw.div_of_label.end()) continue;
    if (mw.model.prob(s, it->second) >= 1 - eps) rw.add(s, it->second);
  }
  CheckReport rep = is_eps_bisimulation(mw.model, rw, eps);
  if (!rep.ok)
    throw ValidationError(
        "lifted relation is not an eps-bisimulation on the label-collapsed model: " +
        rep.reason);
  return rw;
}

}  // namespace abst
