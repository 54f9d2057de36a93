// ε-perturbed bisimulation: centroid feasibility by exact LP, constructive
// perturbation synthesis, and the enumeration-based decision procedures for
// the perturbed and transitive flavors.

#include "abst/perturbed.hpp"

#include "abst/solvers.hpp"

#include <algorithm>

namespace abst {

namespace {

void require_eps(const Rat& eps) {
  if (eps < 0 || eps > 1)
    throw ValidationError("epsilon must be in [0, 1], got " + rat_to_string(eps));
}

std::vector<Rat> lifted_row(const Lmc& m, const Partition& p, std::size_t s) {
  std::vector<Rat> row(p.blocks().size(), Rat(0));
  for (const auto& [t, q] : m.rows[s]) row[p.block_of(t)] += q;
  return row;
}

std::string block_names(const Lmc& m, const std::vector<std::size_t>& block) {
  std::string out = "{";
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (i) out += ", ";
    out += m.states[block[i]].name;
  }
  return out + "}";
}

bool blocks_cross_halves(const Partition& p, std::size_t left_size) {
  for (const auto& block : p.blocks()) {
    bool left = false, right = false;
    for (std::size_t s : block) (s < left_size ? left : right) = true;
    if (!left || !right) return false;
  }
  return true;
}

}  // namespace

std::optional<std::vector<Rat>> centroid(const std::vector<std::vector<Rat>>& rows,
                                         const Rat& eps) {
  if (rows.empty()) throw ValidationError("centroid requires at least one row");
  std::size_t k = rows[0].size();
  for (const auto& row : rows)
    if (row.size() != k) throw ValidationError("centroid rows must have equal length");
  if (rows.size() == 1) return rows[0];

  // Variables: x(0..k-1), then per row l a deviation bound d(l, i) at index
  // k + l*k + i. Feasibility of { x dist, |x_i - mu_{l,i}| <= d(l,i),
  // sum_i d(l,i) <= eps } is exactly the centroid condition.
  std::size_t nvars = k + rows.size() * k;
  std::vector<LinearConstraint> cons;
  {
    LinearConstraint sum1;
    sum1.coeffs.assign(nvars, Rat(0));
    for (std::size_t i = 0; i < k; ++i) sum1.coeffs[i] = 1;
    sum1.op = CmpOp::eq;
    sum1.rhs = 1;
    cons.push_back(std::move(sum1));
  }
  for (std::size_t l = 0; l < rows.size(); ++l) {
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t dv = k + l * k + i;
      LinearConstraint up;  // x_i - d <= mu
      up.coeffs.assign(nvars, Rat(0));
      up.coeffs[i] = 1;
      up.coeffs[dv] = -1;
      up.op = CmpOp::le;
      up.rhs = rows[l][i];
      cons.push_back(std::move(up));
      LinearConstraint dn;  // -x_i - d <= -mu
      dn.coeffs.assign(nvars, Rat(0));
      dn.coeffs[i] = -1;
      dn.coeffs[dv] = -1;
      dn.op = CmpOp::le;
      dn.rhs = -rows[l][i];
      cons.push_back(std::move(dn));
    }
    LinearConstraint budget;  // sum_i d(l, i) <= eps
    budget.coeffs.assign(nvars, Rat(0));
    for (std::size_t i = 0; i < k; ++i) budget.coeffs[k + l * k + i] = 1;
    budget.op = CmpOp::le;
    budget.rhs = eps;
    cons.push_back(std::move(budget));
  }
  std::optional<std::vector<Rat>> sol = lp_feasible(nvars, cons);
  if (!sol) return std::nullopt;
  return std::vector<Rat>(sol->begin(), sol->begin() + k);
}

PerturbedReport is_eps_perturbed_bisimulation(const Lmc& m, const Partition& p,
                                              const Rat& eps) {
  require_eps(eps);
  CheckReport trans = is_transitive_eps_bisimulation(m, p, eps);
  PerturbedReport rep;
  if (!trans.ok) {
    rep.ok = false;
    rep.reason = trans.reason;
    rep.witness = trans.witness;
    return rep;
  }
  CentroidCertificate cert;
  cert.partition = p;
  for (std::size_t b = 0; b < p.blocks().size(); ++b) {
    const auto& block = p.blocks()[b];
    std::vector<std::vector<Rat>> rows;
    rows.reserve(block.size());
    for (std::size_t s : block) rows.push_back(lifted_row(m, p, s));
    std::optional<std::vector<Rat>> mu = centroid(rows, eps);
    if (!mu) {
      rep.ok = false;
      rep.reason = "block " + block_names(m, block) + ": no centroid within epsilon " +
                   rat_to_string(eps);
      rep.bad_block = b;
      return rep;
    }
    std::map<std::size_t, Rat> sparse;
    for (std::size_t c = 0; c < mu->size(); ++c)
      if ((*mu)[c] != 0) sparse[c] = (*mu)[c];
    cert.centroids.push_back(std::move(sparse));
    std::vector<Rat> l1s;
    for (const auto& row : rows) {
      Rat l1 = 0;
      for (std::size_t c = 0; c < row.size(); ++c) l1 += rat_abs(row[c] - (*mu)[c]);
      l1s.push_back(l1);
    }
    cert.member_l1.push_back(std::move(l1s));
  }
  rep.cert = std::move(cert);
  return rep;
}

Perturbation synthesize_perturbation(const Lmc& m, const Partition& p,
                                     const CentroidCertificate& cert, const Rat& eps) {
  require_eps(eps);
  if (!(cert.partition == p))
    throw ValidationError("certificate was produced for a different partition");
  Perturbation pert;
  for (std::size_t b = 0; b < p.blocks().size(); ++b) {
    const auto& block = p.blocks()[b];
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (cert.member_l1[b][k] == 0) continue;  // row already on the centroid
      std::size_t s = block[k];
      std::map<std::size_t, Rat> row = m.rows[s];
      std::vector<Rat> lifted = lifted_row(m, p, s);
      for (std::size_t c = 0; c < p.blocks().size(); ++c) {
        auto cit = cert.centroids[b].find(c);
        Rat target = cit == cert.centroids[b].end() ? Rat(0) : cit->second;
        Rat d = lifted[c] - target;
        if (d > 0) {
          // Surplus: strip d from s's arcs into block c, members ascending.
          for (std::size_t member : p.blocks()[c]) {
            if (d == 0) break;
            auto it = row.find(member);
            if (it == row.end()) continue;
            Rat take = std::min(d, it->second);
            it->second -= take;
            d -= take;
            if (it->second == 0) row.erase(it);
          }
        } else if (d < 0) {
          // Deficit: put the missing mass on the least member of block c.
          row[p.blocks()[c].front()] += -d;
        }
      }
      pert.rows[s] = std::move(row);
    }
  }

  // Re-verify every postcondition exactly; a failure is a bug in the
  // construction, not bad input.
  for (const auto& [s, row] : pert.rows) {
    Rat sum = 0;
    for (const auto& [t, q] : row) {
      if (q <= 0) throw std::logic_error("synthesized row has a non-positive entry");
      sum += q;
    }
    if (sum != 1) throw std::logic_error("synthesized row does not sum to 1");
    (void)s;
  }
  auto [perturbed, l1s] = apply_perturbation(m, pert);
  for (std::size_t s = 0; s < m.size(); ++s)
    if (l1s[s] > eps)
      throw std::logic_error("synthesized perturbation exceeds the epsilon budget");
  if (!is_transitive_eps_bisimulation(perturbed, p, Rat(0)).ok)
    throw std::logic_error("synthesized perturbation is not an exact bisimulation");
  return pert;
}

namespace {

PerturbedDecision decide_perturbed_common(Lmc model, std::size_t u, std::size_t v,
                                          std::optional<std::size_t> left_size,
                                          const Rat& eps, const DecideOptions& opts) {
  PerturbedDecision dec;
  dec.model = std::move(model);
  if (!dec.model.same_label(u, v)) return dec;
  std::vector<std::size_t> universe(dec.model.size());
  for (std::size_t i = 0; i < universe.size(); ++i) universe[i] = i;
  const Lmc& m = dec.model;
  auto pred = [&](const Partition& p) {
    if (left_size && opts.prune_cross && !blocks_cross_halves(p, *left_size))
      return false;
    return is_eps_perturbed_bisimulation(m, p, eps).ok;
  };
  std::optional<Partition> found = first_passing_partition(
      m.state_labels(), {{u, v}}, universe, opts, pred);
  if (!found) return dec;
  dec.yes = true;
  PerturbedReport rep = is_eps_perturbed_bisimulation(m, *found, eps);
  if (!rep.ok || !rep.cert)
    throw std::logic_error("accepted partition failed on re-check");
  dec.perturbation = synthesize_perturbation(m, *found, *rep.cert, eps);
  dec.cert = std::move(rep.cert);
  return dec;
}

TransitiveDecision decide_transitive_common(Lmc model, std::size_t u, std::size_t v,
                                            std::optional<std::size_t> left_size,
                                            const Rat& eps, const DecideOptions& opts) {
  TransitiveDecision dec;
  dec.model = std::move(model);
  if (!dec.model.same_label(u, v)) return dec;
  std::vector<std::size_t> universe(dec.model.size());
  for (std::size_t i = 0; i < universe.size(); ++i) universe[i] = i;
  const Lmc& m = dec.model;
  auto pred = [&](const Partition& p) {
    if (left_size && opts.prune_cross && !blocks_cross_halves(p, *left_size))
      return false;
    return is_transitive_eps_bisimulation(m, p, eps).ok;
  };
  std::optional<Partition> found = first_passing_partition(
      m.state_labels(), {{u, v}}, universe, opts, pred);
  if (!found) return dec;
  dec.yes = true;
  dec.partition = std::move(found);
  return dec;
}

}  // namespace

PerturbedDecision decide_perturbed_bisimilar(const Lmc& a, const Lmc& b, const Rat& eps,
                                             const DecideOptions& opts) {
  require_eps(eps);
  Lmc ds = direct_sum(a, b);
  return decide_perturbed_common(std::move(ds), a.init, a.size() + b.init, a.size(),
                                 eps, opts);
}

PerturbedDecision decide_perturbed_pair(const Lmc& m, std::size_t s, std::size_t t,
                                        const Rat& eps, const DecideOptions& opts) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  if (s == t) {
    PerturbedDecision dec;
    dec.model = m;
    dec.yes = true;
    PerturbedReport rep =
        is_eps_perturbed_bisimulation(m, Partition::singletons(m.size()), eps);
    if (rep.ok) {
      dec.perturbation = synthesize_perturbation(m, Partition::singletons(m.size()),
                                                 *rep.cert, eps);
      dec.cert = std::move(rep.cert);
    }
    return dec;
  }
  return decide_perturbed_common(m, s, t, std::nullopt, eps, opts);
}

TransitiveDecision decide_transitive_eps_bisimilar(const Lmc& a, const Lmc& b,
                                                   const Rat& eps,
                                                   const DecideOptions& opts) {
  require_eps(eps);
  Lmc ds = direct_sum(a, b);
  return decide_transitive_common(std::move(ds), a.init, a.size() + b.init, a.size(),
                                  eps, opts);
}

TransitiveDecision decide_transitive_pair(const Lmc& m, std::size_t s, std::size_t t,
                                          const Rat& eps, const DecideOptions& opts) {
  require_eps(eps);
  if (s >= m.size() || t >= m.size()) throw ValidationError("state index out of range");
  if (s == t) {
    TransitiveDecision dec;
    dec.model = m;
    dec.yes = true;
    dec.partition = Partition::singletons(m.size());
    return dec;
  }
  return decide_transitive_common(m, s, t, std::nullopt, eps, opts);
}

}  // namespace abst
