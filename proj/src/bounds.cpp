// Reachability-difference bounds certified by approximate bisimulations:
// the finite-horizon trace bound and the unbounded expected-count bounds,
// with every premise checked and reported rather than assumed.

#include "abst/bounds.hpp"

#include "abst/approx_bisim.hpp"
#include "abst/solvers.hpp"
#include "abst/weak_branching.hpp"

#include <algorithm>

namespace abst {

namespace {

void require_eps(const Rat& eps) {
  if (eps < 0 || eps > 1)
    throw ValidationError("epsilon must be in [0, 1], got " + rat_to_string(eps));
}

Rat rat_pow(const Rat& base, unsigned k) {
  Rat out = 1;
  for (unsigned i = 0; i < k; ++i) out *= base;
  return out;
}

std::vector<char> ap_mask(const Lmc& m, const std::string& ap) {
  std::vector<char> mask(m.size(), 0);
  for (std::size_t s : m.states_with_ap(ap)) mask[s] = 1;
  return mask;
}

// States with zero probability of ever reaching a goal-labeled state.
std::set<std::size_t> non_reaching(const Lmc& m, const std::string& goal_ap) {
  std::vector<char> goal = ap_mask(m, goal_ap);
  std::vector<Rat> reach = until_vector(m, std::vector<char>(m.size(), 1), goal);
  std::set<std::size_t> out;
  for (std::size_t s = 0; s < m.size(); ++s)
    if (reach[s] == 0) out.insert(s);
  return out;
}

}  // namespace

std::string bound_flavor_name(BoundFlavor f) {
  switch (f) {
    case BoundFlavor::finite_horizon: return "finite";
    case BoundFlavor::step: return "step";
    case BoundFlavor::class_change: return "class";
    case BoundFlavor::label_change: return "label";
  }
  return "unknown";
}

Lmc label_f_closure(const Lmc& m, const std::string& goal_ap, const std::string& f_ap) {
  if (m.states_with_ap(goal_ap).empty())
    throw ValidationError("goal proposition '" + goal_ap + "' labels no state");
  std::set<std::size_t> want = non_reaching(m, goal_ap);
  std::vector<std::size_t> have_v = m.states_with_ap(f_ap);
  std::set<std::size_t> have(have_v.begin(), have_v.end());
  if (have.empty()) {
    Lmc out = m;
    for (std::size_t s : want) out.states[s].label.insert(f_ap);
    return out;
  }
  if (have == want) return m;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (have.count(s) != want.count(s))
      throw ValidationError("proposition '" + f_ap +
                            "' does not label exactly the non-reaching states (state " +
                            m.states[s].name + " differs)");
  }
  return m;  // unreachable
}

BoundReport finite_horizon_report(
    const Lmc& m, std::size_t s, std::size_t t,
    const std::vector<std::vector<std::set<std::string>>>& traces, const Rat& eps) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  if (traces.empty()) throw ValidationError("at least one trace is required");

  BoundReport rep;
  rep.s = s;
  rep.t = t;
  rep.flavor = BoundFlavor::finite_horizon;
  rep.eps = eps;
  rep.horizon = static_cast<unsigned>(traces[0].size() - 1);
  rep.lhs = rat_abs(trace_set_probability(m, s, traces) -
                    trace_set_probability(m, t, traces));
  rep.rhs = 1 - rat_pow(1 - eps, rep.horizon);
  rep.tight = rep.lhs == *rep.rhs;
  rep.vacuous = false;

  rep.premise.relation_holds = greatest_eps_bisimilarity(m, eps).related(s, t);
  rep.premise.f_discipline_ok = true;
  rep.premise.note = rep.premise.relation_holds
                         ? "greatest eps-bisimilarity relates the pair"
                         : "greatest eps-bisimilarity does not relate the pair";
  rep.premise.note += "; f-discipline not applicable";
  return rep;
}

BoundReport unbounded_report(const Lmc& m, std::size_t s, std::size_t t, const Rat& eps,
                             BoundFlavor flavor, const std::string& goal_ap,
                             const std::string& f_ap,
                             const std::optional<Partition>& partition) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  if (flavor == BoundFlavor::finite_horizon)
    throw ValidationError("the finite-horizon bound takes traces, not a goal");
  if (m.states_with_ap(goal_ap).empty())
    throw ValidationError("goal proposition '" + goal_ap + "' labels no state");

  BoundReport rep;
  rep.s = s;
  rep.t = t;
  rep.flavor = flavor;
  rep.eps = eps;

  std::vector<Rat> reach =
      until_vector(m, std::vector<char>(m.size(), 1), ap_mask(m, goal_ap));
  rep.lhs = rat_abs(reach[s] - reach[t]);

  // f-discipline: f_ap must label exactly the states that cannot reach goal.
  std::set<std::size_t> want = non_reaching(m, goal_ap);
  std::vector<std::size_t> have_v = m.states_with_ap(f_ap);
  std::set<std::size_t> have(have_v.begin(), have_v.end());
  rep.premise.f_discipline_ok = have == want;
  std::string f_note;
  if (rep.premise.f_discipline_ok) {
    f_note = "proposition '" + f_ap + "' labels exactly the non-reaching states";
  } else {
    std::size_t diff = 0;
    for (std::size_t u = 0; u < m.size(); ++u)
      if (have.count(u) != want.count(u)) {
        diff = u;
        break;
      }
    f_note = "proposition '" + f_ap +
             "' does not label exactly the non-reaching states (state " +
             m.states[diff].name + " differs)";
  }

  // The counted-model: steps on m itself, class changes on the
  // class-collapsed model, label changes on the label-collapsed model.
  std::optional<Lmc> counted;
  std::string note;
  if (flavor == BoundFlavor::step) {
    rep.premise.relation_holds = greatest_eps_bisimilarity(m, eps).related(s, t);
    note = rep.premise.relation_holds
               ? "greatest eps-bisimilarity relates the pair"
               : "greatest eps-bisimilarity does not relate the pair";
    counted = m;
  } else if (flavor == BoundFlavor::class_change) {
    if (!partition)
      throw ValidationError("the class-change bound requires a partition");
    bool label_ok = true;
    for (const auto& block : partition->blocks())
      for (std::size_t i = 1; i < block.size() && label_ok; ++i)
        if (!m.same_label(block[0], block[i])) label_ok = false;
    if (!label_ok) {
      rep.premise.relation_holds = false;
      note = "partition has a block with mixed labels";
    } else {
      MrResult res = build_mr(m, *partition, eps);
      if (!res.ok) {
        rep.premise.relation_holds = false;
        note = res.reason;
      } else {
        rep.premise.relation_holds =
            is_transitive_eps_bisimulation(res.mr->model, res.mr->classes, eps).ok &&
            partition->same_block(s, t);
        note = rep.premise.relation_holds
                   ? "partition is a branching eps-bisimulation relating the pair"
                   : "partition is not a branching eps-bisimulation relating the pair";
        counted = res.mr->model;
      }
    }
  } else {  // label_change
    Relation weak = greatest_weak_eps_bisimilarity(m, eps);
    rep.premise.relation_holds = weak.related(s, t);
    note = rep.premise.relation_holds
               ? "greatest weak eps-bisimilarity relates the pair"
               : "greatest weak eps-bisimilarity does not relate the pair";
    counted = build_mw(m).model;
  }
  rep.premise.note = note + "; " + f_note;

  if (counted) {
    std::vector<char> absorb(counted->size(), 0);
    for (std::size_t u : counted->states_with_ap(goal_ap)) absorb[u] = 1;
    for (std::size_t u : counted->states_with_ap(f_ap)) absorb[u] = 1;
    rep.expected_s = expected_steps(*counted, s, absorb);
    rep.expected_t = expected_steps(*counted, t, absorb);
    if (rep.expected_s) rep.rhs = eps * *rep.expected_s;
  }
  rep.vacuous = !rep.rhs;
  rep.tight = rep.rhs && rep.lhs == *rep.rhs;
  return rep;
}

}  // namespace abst
