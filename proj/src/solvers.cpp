// Exact rational solvers and the probabilistic queries built on them.

#include "abst/solvers.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <stdexcept>

namespace abst {

std::vector<char> mask_of(std::size_t n, const std::set<std::size_t>& a) {
  std::vector<char> mask(n, 0);
  for (std::size_t s : a) {
    if (s >= n) throw ValidationError("set member out of range");
    mask[s] = 1;
  }
  return mask;
}

std::optional<std::vector<Rat>> solve_linear(const LinearSystem& sys) {
  std::size_t n = sys.n;
  if (sys.a.size() != n || sys.b.size() != n)
    throw ValidationError("linear system is not square");
  std::vector<std::vector<Rat>> a = sys.a;
  std::vector<Rat> b = sys.b;
  for (const auto& row : a)
    if (row.size() != n) throw ValidationError("linear system row has wrong width");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    for (std::size_t r = col; r < n; ++r)
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot == n) return std::nullopt;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      Rat f = a[r][col] / a[col][col];
      a[r][col] = 0;
      for (std::size_t c = col + 1; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rat> x(n, Rat(0));
  for (std::size_t ri = n; ri-- > 0;) {
    Rat acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

// --- phase-1 simplex ---------------------------------------------------------

std::optional<std::vector<Rat>> lp_feasible(std::size_t nvars,
                                            const std::vector<LinearConstraint>& cons) {
  for (const auto& c : cons)
    if (c.coeffs.size() != nvars)
      throw ValidationError("constraint width does not match variable count");

  std::size_t m = cons.size();
  if (m == 0) return std::vector<Rat>(nvars, Rat(0));

  // Columns: nvars originals, then one slack/surplus per inequality, then one
  // artificial per row that needs it. Rows are normalized to rhs >= 0 first.
  std::size_t nslack = 0;
  for (const auto& c : cons)
    if (c.op != CmpOp::eq) ++nslack;

  std::vector<std::vector<Rat>> t(m);  // tableau rows: coefficients then rhs
  std::vector<std::size_t> basis(m);
  std::size_t ncols = nvars + nslack;  // artificials appended below
  std::vector<std::size_t> art_rows;

  std::size_t slack_at = nvars;
  struct RowPlan {
    std::vector<Rat> coeffs;
    Rat rhs;
    int slack_sign;  // 0 none, +1 slack, -1 surplus
    std::size_t slack_col = 0;
  };
  std::vector<RowPlan> plan(m);
  for (std::size_t r = 0; r < m; ++r) {
    RowPlan& p = plan[r];
    p.coeffs = cons[r].coeffs;
    p.rhs = cons[r].rhs;
    CmpOp op = cons[r].op;
    if (p.rhs < 0) {  // flip the row so rhs >= 0
      for (auto& c : p.coeffs) c = -c;
      p.rhs = -p.rhs;
      op = op == CmpOp::le ? CmpOp::ge : (op == CmpOp::ge ? CmpOp::le : CmpOp::eq);
    }
    p.slack_sign = op == CmpOp::le ? 1 : (op == CmpOp::ge ? -1 : 0);
    if (p.slack_sign != 0) p.slack_col = slack_at++;
  }

  // A row gets an artificial unless its slack can start basic (le rows).
  for (std::size_t r = 0; r < m; ++r)
    if (plan[r].slack_sign != 1) art_rows.push_back(r);
  std::size_t nart = art_rows.size();
  std::size_t width = ncols + nart + 1;  // + rhs

  for (std::size_t r = 0; r < m; ++r) {
    t[r].assign(width, Rat(0));
    for (std::size_t j = 0; j < nvars; ++j) t[r][j] = plan[r].coeffs[j];
    if (plan[r].slack_sign != 0) t[r][plan[r].slack_col] = plan[r].slack_sign;
    t[r][width - 1] = plan[r].rhs;
  }
  {
    std::size_t k = 0;
    for (std::size_t r : art_rows) {
      t[r][ncols + k] = 1;
      basis[r] = ncols + k;
      ++k;
    }
    for (std::size_t r = 0; r < m; ++r)
      if (plan[r].slack_sign == 1) basis[r] = plan[r].slack_col;
  }

  // Objective: minimize the sum of artificials. Reduced-cost row z starts as
  // -(sum of artificial-basic rows) so basic columns cost 0.
  std::vector<Rat> z(width, Rat(0));
  for (std::size_t r : art_rows)
    for (std::size_t j = 0; j < width; ++j) z[j] -= t[r][j];
  for (std::size_t k = 0; k < nart; ++k) z[ncols + k] = 0;

  std::size_t total_cols = ncols + nart;
  while (true) {
    // Bland: entering = lowest-index column with negative reduced cost.
    std::size_t enter = total_cols;
    for (std::size_t j = 0; j < total_cols; ++j)
      if (z[j] < 0) {
        enter = j;
        break;
      }
    if (enter == total_cols) break;
    // Ratio test; ties broken by lowest basic variable index (Bland).
    std::size_t leave = m;
    Rat best;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] <= 0) continue;
      Rat ratio = t[r][width - 1] / t[r][enter];
      if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == m)
      throw std::logic_error("phase-1 objective unbounded (cannot happen)");
    Rat piv = t[leave][enter];
    for (std::size_t j = 0; j < width; ++j) t[leave][j] /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave || t[r][enter] == 0) continue;
      Rat f = t[r][enter];
      for (std::size_t j = 0; j < width; ++j) t[r][j] -= f * t[leave][j];
    }
    if (z[enter] != 0) {
      Rat f = z[enter];
      for (std::size_t j = 0; j < width; ++j) z[j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  // Feasible iff all artificials are zero, i.e. objective value reached 0.
  Rat art_sum = 0;
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] >= ncols) art_sum += t[r][width - 1];
  if (art_sum != 0) return std::nullopt;

  std::vector<Rat> x(nvars, Rat(0));
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < nvars) x[basis[r]] = t[r][width - 1];
  return x;
}

// --- max flow ----------------------------------------------------------------

FlowResult max_flow(std::size_t nodes, std::size_t source, std::size_t sink,
                    std::vector<FlowArc> arcs) {
  if (source >= nodes || sink >= nodes || source == sink)
    throw ValidationError("bad flow network endpoints");
  for (const auto& a : arcs) {
    if (a.from >= nodes || a.to >= nodes) throw ValidationError("flow arc out of range");
    if (a.cap < 0) throw ValidationError("negative arc capacity");
  }

  // Residual graph: forward edge 2k, backward edge 2k+1.
  std::size_t ne = arcs.size();
  std::vector<Rat> residual(2 * ne);
  for (std::size_t k = 0; k < ne; ++k) {
    residual[2 * k] = arcs[k].cap;
    residual[2 * k + 1] = 0;
  }
  std::vector<std::vector<std::size_t>> adj(nodes);  // edge ids, insertion order
  for (std::size_t k = 0; k < ne; ++k) {
    adj[arcs[k].from].push_back(2 * k);
    adj[arcs[k].to].push_back(2 * k + 1);
  }
  auto edge_to = [&](std::size_t e) { return e % 2 == 0 ? arcs[e / 2].to : arcs[e / 2].from; };

  Rat value = 0;
  while (true) {
    std::vector<std::size_t> pred_edge(nodes, 2 * ne);
    std::vector<char> seen(nodes, 0);
    std::deque<std::size_t> queue{source};
    seen[source] = 1;
    while (!queue.empty() && !seen[sink]) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : adj[u]) {
        std::size_t v = edge_to(e);
        if (seen[v] || residual[e] == 0) continue;
        seen[v] = 1;
        pred_edge[v] = e;
        queue.push_back(v);
        if (v == sink) break;
      }
    }
    if (!seen[sink]) break;
    Rat bottleneck;
    bool first = true;
    for (std::size_t v = sink; v != source;) {
      std::size_t e = pred_edge[v];
      if (first || residual[e] < bottleneck) bottleneck = residual[e];
      first = false;
      v = e % 2 == 0 ? arcs[e / 2].from : arcs[e / 2].to;
    }
    for (std::size_t v = sink; v != source;) {
      std::size_t e = pred_edge[v];
      residual[e] -= bottleneck;
      residual[e ^ 1] += bottleneck;
      v = e % 2 == 0 ? arcs[e / 2].from : arcs[e / 2].to;
    }
    value += bottleneck;
  }

  FlowResult out;
  out.value = value;
  out.flow.resize(ne);
  for (std::size_t k = 0; k < ne; ++k) out.flow[k] = arcs[k].cap - residual[2 * k];
  out.source_side.assign(nodes, 0);
  std::deque<std::size_t> queue{source};
  out.source_side[source] = 1;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t e : adj[u]) {
      std::size_t v = edge_to(e);
      if (!out.source_side[v] && residual[e] > 0) {
        out.source_side[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return out;
}

// --- reachability ------------------------------------------------------------

namespace {

void check_mask(const Lmc& m, const std::vector<char>& mask, const char* what) {
  if (mask.size() != m.size())
    throw ValidationError(std::string(what) + " mask has wrong size");
}

// Solves x_u = sum_{v in vars} P(u)(v) x_v + b_u for the given variable set.
std::vector<Rat> solve_markov(const Lmc& m, const std::vector<std::size_t>& vars,
                              const std::vector<Rat>& rhs) {
  std::size_t k = vars.size();
  std::map<std::size_t, std::size_t> col;
  for (std::size_t i = 0; i < k; ++i) col[vars[i]] = i;
  LinearSystem sys;
  sys.n = k;
  sys.a.assign(k, std::vector<Rat>(k, Rat(0)));
  sys.b = rhs;
  for (std::size_t i = 0; i < k; ++i) {
    sys.a[i][i] = 1;
    for (const auto& [t, p] : m.rows[vars[i]]) {
      auto it = col.find(t);
      if (it != col.end()) sys.a[i][it->second] -= p;
    }
  }
  auto sol = solve_linear(sys);
  if (!sol) throw std::logic_error("reachability system singular (cannot happen)");
  return *sol;
}

}  // namespace

std::vector<Rat> until_vector(const Lmc& m, const std::vector<char>& allowed,
                              const std::vector<char>& target) {
  check_mask(m, allowed, "allowed");
  check_mask(m, target, "target");
  std::size_t n = m.size();

  // Backward reachability inside `allowed` (target-wins: target states score 1
  // regardless of allowed).
  std::vector<char> can_reach(n, 0);
  for (std::size_t s = 0; s < n; ++s) can_reach[s] = target[s];
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (can_reach[s] || !allowed[s] || target[s]) continue;
      for (const auto& [t, p] : m.rows[s])
        if (can_reach[t]) {
          can_reach[s] = 1;
          changed = true;
          break;
        }
    }
  }

  std::vector<std::size_t> vars;
  for (std::size_t s = 0; s < n; ++s)
    if (allowed[s] && !target[s] && can_reach[s]) vars.push_back(s);
  std::vector<Rat> rhs(vars.size(), Rat(0));
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (const auto& [t, p] : m.rows[vars[i]])
      if (target[t]) rhs[i] += p;
  std::vector<Rat> sol = solve_markov(m, vars, rhs);

  std::vector<Rat> out(n, Rat(0));
  for (std::size_t s = 0; s < n; ++s)
    if (target[s]) out[s] = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = sol[i];
  return out;
}

Rat until_probability(const Lmc& m, std::size_t s, const std::vector<char>& allowed,
                      const std::vector<char>& target) {
  if (s >= m.size()) throw ValidationError("state index out of range");
  return until_vector(m, allowed, target)[s];
}

std::vector<Rat> always_vector(const Lmc& m, const std::vector<char>& inside) {
  check_mask(m, inside, "inside");
  std::vector<char> outside(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) outside[s] = !inside[s];
  std::vector<Rat> uv = until_vector(m, inside, outside);
  std::vector<Rat> out(m.size(), Rat(0));
  for (std::size_t s = 0; s < m.size(); ++s)
    if (inside[s]) out[s] = 1 - uv[s];
  return out;
}

Rat always_probability(const Lmc& m, std::size_t s, const std::vector<char>& inside) {
  if (s >= m.size()) throw ValidationError("state index out of range");
  return always_vector(m, inside)[s];
}

Rat bounded_reach(const Lmc& m, std::size_t s, const std::vector<char>& target,
                  unsigned steps) {
  check_mask(m, target, "target");
  if (s >= m.size()) throw ValidationError("state index out of range");
  std::size_t n = m.size();
  std::vector<Rat> x(n, Rat(0));
  for (std::size_t u = 0; u < n; ++u)
    if (target[u]) x[u] = 1;
  for (unsigned k = 0; k < steps; ++k) {
    std::vector<Rat> nx(n, Rat(0));
    for (std::size_t u = 0; u < n; ++u) {
      if (target[u]) {
        nx[u] = 1;
        continue;
      }
      Rat acc = 0;
      for (const auto& [t, p] : m.rows[u]) acc += p * x[t];
      nx[u] = acc;
    }
    x = std::move(nx);
  }
  return x[s];
}

Rat trace_set_probability(const Lmc& m, std::size_t s,
                          const std::vector<std::vector<std::set<std::string>>>& traces) {
  if (s >= m.size()) throw ValidationError("state index out of range");
  if (traces.empty()) return 0;
  std::size_t len = traces[0].size();
  if (len == 0) throw ValidationError("traces must have positive length");
  for (const auto& tr : traces)
    if (tr.size() != len) throw ValidationError("traces must all have the same length");

  // Trie over the trace set, layered by depth; nodes get stable ids so the
  // (node, state) evaluation can be memoized.
  struct Node {
    std::map<std::set<std::string>, std::size_t> children;
  };
  std::vector<Node> trie(1);
  for (const auto& tr : traces) {
    std::size_t at = 0;
    for (const auto& lab : tr) {
      auto it = trie[at].children.find(lab);
      if (it == trie[at].children.end()) {
        trie.push_back({});
        it = trie[at].children.emplace(lab, trie.size() - 1).first;
      }
      at = it->second;
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, Rat> memo;
  // prob(u, node at depth d): the trace consumed d labels; node's children
  // constrain label d.
  std::function<Rat(std::size_t, std::size_t, std::size_t)> eval =
      [&](std::size_t u, std::size_t node, std::size_t depth) -> Rat {
    auto key = std::make_pair(node, u);
    auto mit = memo.find(key);
    if (mit != memo.end()) return mit->second;
    Rat result = 0;
    auto cit = trie[node].children.find(m.label(u));
    if (cit != trie[node].children.end()) {
      if (depth + 1 == len) {
        result = 1;
      } else {
        for (const auto& [t, p] : m.rows[u]) result += p * eval(t, cit->second, depth + 1);
      }
    }
    memo.emplace(key, result);
    return result;
  };
  return eval(s, 0, 0);
}

std::vector<std::optional<Rat>> expected_steps_vector(const Lmc& m,
                                                      const std::vector<char>& absorb) {
  check_mask(m, absorb, "absorb");
  std::size_t n = m.size();
  std::vector<char> all(n, 1);
  std::vector<Rat> reach = until_vector(m, all, absorb);

  // Expected-steps system over states that reach absorption almost surely;
  // that set is closed under successors outside absorb.
  std::vector<std::size_t> vars;
  for (std::size_t s = 0; s < n; ++s)
    if (!absorb[s] && reach[s] == 1) vars.push_back(s);
  std::vector<Rat> rhs(vars.size(), Rat(1));
  std::vector<Rat> sol = solve_markov(m, vars, rhs);

  std::vector<std::optional<Rat>> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (absorb[s])
      out[s] = Rat(0);
    else if (reach[s] != 1)
      out[s] = std::nullopt;
  }
  for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = sol[i];
  return out;
}

std::optional<Rat> expected_steps(const Lmc& m, std::size_t s,
                                  const std::vector<char>& absorb) {
  if (s >= m.size()) throw ValidationError("state index out of range");
  return expected_steps_vector(m, absorb)[s];
}

}  // namespace abst
