// Labeled Markov chain core: parsing, validation, serialization, direct sum,
// quotient, perturbation application, and rational text conversion.

#include "abst/lmc.hpp"

#include "abst/perturbed.hpp"  // centroid() for the centroid quotient policy

#include <algorithm>
#include <sstream>

namespace abst {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_integer_token(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

// State names must survive every text format (transition, relation and
// partition files), so the separator characters are reserved.
void check_state_name(const std::string& name, const std::string& where) {
  if (name.empty()) throw ValidationError(where + ": empty state name");
  if (name.find_first_of(" \t{},~#") != std::string::npos ||
      name.find("->") != std::string::npos)
    throw ValidationError(where + ": invalid state name \"" + name +
                          "\" (must not contain whitespace, braces, commas, '~', '#' or \"->\")");
}

std::set<std::string> parse_label_set(const std::string& body, const std::string& where) {
  std::set<std::string> label;
  std::string inner = trim(body);
  if (inner.empty()) return label;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string ap = trim(item);
    if (ap.empty() || ap.find_first_of(" \t{},~#") != std::string::npos)
      throw ValidationError(where + ": bad proposition \"" + ap + "\"");
    label.insert(ap);
  }
  return label;
}

std::string label_to_string(const std::set<std::string>& label) {
  std::string out = "{";
  bool first = true;
  for (const auto& ap : label) {
    if (!first) out += ", ";
    out += ap;
    first = false;
  }
  return out + "}";
}

}  // namespace

Rat rat_from_string(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = trim(s.substr(0, slash)), den = trim(s.substr(slash + 1));
    if (!valid_integer_token(num) || !valid_integer_token(den))
      throw std::invalid_argument("bad rational literal \"" + s + "\"");
    Int d(den);
    if (d == 0) throw std::invalid_argument("zero denominator in \"" + s + "\"");
    return Rat(Int(num), d);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = false;
    if (!ip.empty() && (ip[0] == '+' || ip[0] == '-')) {
      neg = ip[0] == '-';
      ip = ip.substr(1);
    }
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp)))
      throw std::invalid_argument("bad decimal literal \"" + s + "\"");
    Int num = ip.empty() ? Int(0) : Int(ip);
    Int den = 1;
    for (char c : fp) {
      num = num * 10 + (c - '0');
      den *= 10;
    }
    Rat r(num, den);
    return neg ? Rat(-r) : r;
  }
  if (!valid_integer_token(s)) throw std::invalid_argument("bad rational literal \"" + s + "\"");
  return Rat(Int(s));
}

Rat Lmc::prob(std::size_t s, std::size_t t) const {
  auto it = rows[s].find(t);
  return it == rows[s].end() ? Rat(0) : it->second;
}

Rat Lmc::prob_set(std::size_t s, const std::set<std::size_t>& a) const {
  Rat sum = 0;
  for (const auto& [t, p] : rows[s])
    if (a.count(t)) sum += p;
  return sum;
}

std::vector<std::size_t> Lmc::succ(std::size_t s) const {
  std::vector<std::size_t> out;
  out.reserve(rows[s].size());
  for (const auto& [t, p] : rows[s]) out.push_back(t);
  return out;
}

std::optional<std::size_t> Lmc::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> Lmc::state_names() const {
  std::vector<std::string> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(st.name);
  return out;
}

std::vector<std::set<std::string>> Lmc::state_labels() const {
  std::vector<std::set<std::string>> out;
  out.reserve(states.size());
  for (const auto& st : states) out.push_back(st.label);
  return out;
}

std::vector<std::size_t> Lmc::states_with_ap(const std::string& ap) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].label.count(ap)) out.push_back(i);
  return out;
}

void Lmc::validate() const {
  if (states.empty()) throw ValidationError("model has no states");
  if (rows.size() != states.size())
    throw ValidationError("model has " + std::to_string(states.size()) + " states but " +
                          std::to_string(rows.size()) + " transition rows");
  if (init >= states.size()) throw ValidationError("initial state index out of range");
  std::set<std::string> seen;
  for (const auto& st : states) {
    check_state_name(st.name, "state declaration");
    if (!seen.insert(st.name).second)
      throw ValidationError("duplicate state name \"" + st.name + "\"");
  }
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (rows[s].empty())
      throw ValidationError("state \"" + states[s].name + "\": no outgoing transitions");
    Rat sum = 0;
    for (const auto& [t, p] : rows[s]) {
      if (t >= states.size())
        throw ValidationError("state \"" + states[s].name + "\": transition target out of range");
      if (p <= 0 || p > 1)
        throw ValidationError("state \"" + states[s].name + "\": probability " +
                              rat_to_string(p) + " outside (0, 1]");
      sum += p;
    }
    if (sum != 1) {
      Rat gap = 1 - sum;
      std::string how = gap > 0 ? " (deficit " + rat_to_string(gap) + ")"
                                : " (excess " + rat_to_string(-gap) + ")";
      throw ValidationError("state \"" + states[s].name + "\": row sum " + rat_to_string(sum) +
                            " != 1" + how);
    }
  }
}

Lmc parse_lmc(const std::string& text) {
  Lmc m;
  std::optional<std::string> init_name;
  // (line, from, to, prob-text), resolved after all states are declared.
  std::vector<std::tuple<std::size_t, std::string, std::string, std::string>> arcs;

  std::stringstream ss(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    std::string where = "line " + std::to_string(lineno);
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.rfind("state", 0) == 0 && line.size() > 5 &&
        (line[5] == ' ' || line[5] == '\t')) {
      std::string rest = trim(line.substr(6));
      auto brace = rest.find('{');
      if (brace == std::string::npos)
        throw ValidationError(where + ": state declaration needs a {..} label");
      std::string name = trim(rest.substr(0, brace));
      std::string body = trim(rest.substr(brace));
      if (body.empty() || body.back() != '}')
        throw ValidationError(where + ": unterminated label set");
      check_state_name(name, where);
      if (m.index_of(name))
        throw ValidationError(where + ": duplicate state name \"" + name + "\"");
      m.states.push_back({name, parse_label_set(body.substr(1, body.size() - 2), where)});
      continue;
    }
    if (line.rfind("init", 0) == 0 && line.size() > 4 && (line[4] == ' ' || line[4] == '\t')) {
      if (init_name) throw ValidationError(where + ": init redeclared");
      init_name = trim(line.substr(5));
      continue;
    }
    auto arrow = line.find("->");
    if (arrow != std::string::npos) {
      std::string from = trim(line.substr(0, arrow));
      std::string rest = line.substr(arrow + 2);
      // The separator is the last ':' — state names may themselves contain
      // a ':' (direct-sum renaming), probabilities never do.
      auto colon = rest.rfind(':');
      if (colon == std::string::npos)
        throw ValidationError(where + ": transition needs \": <probability>\"");
      std::string to = trim(rest.substr(0, colon));
      std::string prob = trim(rest.substr(colon + 1));
      arcs.emplace_back(lineno, from, to, prob);
      continue;
    }
    throw ValidationError(where + ": unrecognized line \"" + line + "\"");
  }

  if (m.states.empty()) throw ValidationError("no states declared");
  if (!init_name) throw ValidationError("missing init declaration");
  auto ii = m.index_of(*init_name);
  if (!ii) throw ValidationError("init names unknown state \"" + *init_name + "\"");
  m.init = *ii;

  m.rows.assign(m.states.size(), {});
  for (const auto& [ln, from, to, prob] : arcs) {
    std::string where = "line " + std::to_string(ln);
    auto fi = m.index_of(from);
    if (!fi) throw ValidationError(where + ": unknown state \"" + from + "\"");
    auto ti = m.index_of(to);
    if (!ti) throw ValidationError(where + ": unknown state \"" + to + "\"");
    Rat p;
    try {
      p = rat_from_string(prob);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (p <= 0 || p > 1)
      throw ValidationError(where + ": probability " + rat_to_string(p) + " outside (0, 1]");
    if (!m.rows[*fi].emplace(*ti, p).second)
      throw ValidationError(where + ": duplicate transition " + from + " -> " + to);
  }
  m.validate();
  return m;
}

std::string serialize_lmc(const Lmc& m) {
  std::ostringstream out;
  for (const auto& st : m.states)
    out << "state " << st.name << " " << label_to_string(st.label) << "\n";
  out << "init " << m.states[m.init].name << "\n";
  for (std::size_t s = 0; s < m.size(); ++s)
    for (const auto& [t, p] : m.rows[s])
      out << m.states[s].name << " -> " << m.states[t].name << " : " << rat_to_string(p)
          << "\n";
  return out.str();
}

Lmc direct_sum(const Lmc& a, const Lmc& b) {
  a.validate();
  b.validate();
  std::set<std::string> left_names;
  for (const auto& st : a.states) left_names.insert(st.name);
  bool clash = false;
  for (const auto& st : b.states)
    if (left_names.count(st.name)) clash = true;

  Lmc sum;
  sum.states = a.states;
  for (const auto& st : b.states)
    sum.states.push_back({clash ? "2:" + st.name : st.name, st.label});
  sum.init = a.init;
  sum.rows = a.rows;
  for (const auto& row : b.rows) {
    std::map<std::size_t, Rat> shifted;
    for (const auto& [t, p] : row) shifted.emplace(t + a.size(), p);
    sum.rows.push_back(std::move(shifted));
  }
  sum.validate();
  return sum;
}

namespace {

std::string block_display(const Lmc& m, const std::vector<std::size_t>& block) {
  std::string out = "{";
  for (std::size_t k = 0; k < block.size(); ++k) {
    if (k) out += ", ";
    out += m.states[block[k]].name;
  }
  return out + "}";
}

// Row of s condensed onto partition blocks, dense over block indices.
std::vector<Rat> lifted_row(const Lmc& m, const Partition& p, std::size_t s) {
  std::vector<Rat> out(p.blocks().size(), Rat(0));
  for (const auto& [t, q] : m.rows[s]) out[p.block_of(t)] += q;
  return out;
}

}  // namespace

Lmc quotient(const Lmc& m, const Partition& p, const QuotientPolicy& policy) {
  m.validate();
  if (p.size() != m.size() || !p.covers_all())
    throw ValidationError("quotient requires a partition covering every state");
  if (policy.kind == QuotientPolicy::centroid && (policy.eps < 0 || policy.eps > 1))
    throw ValidationError("epsilon must be in [0, 1], got " + rat_to_string(policy.eps));

  const auto& blocks = p.blocks();
  for (const auto& block : blocks)
    for (std::size_t k = 1; k < block.size(); ++k)
      if (!m.same_label(block[0], block[k]))
        throw ValidationError("block " + block_display(m, block) + ": label mismatch between " +
                              m.states[block[0]].name + " and " + m.states[block[k]].name);

  Lmc q;
  q.states.reserve(blocks.size());
  for (const auto& block : blocks)
    q.states.push_back({m.states[block[0]].name, m.states[block[0]].label});
  q.init = p.block_of(m.init);

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<Rat> row;
    if (policy.kind == QuotientPolicy::exact) {
      row = lifted_row(m, p, blocks[b][0]);
      for (std::size_t k = 1; k < blocks[b].size(); ++k) {
        std::vector<Rat> other = lifted_row(m, p, blocks[b][k]);
        for (std::size_t c = 0; c < row.size(); ++c)
          if (row[c] != other[c])
            throw ValidationError(
                "block " + block_display(m, blocks[b]) + ": rows disagree on block " +
                block_display(m, blocks[c]) + ": " + m.states[blocks[b][0]].name + " gives " +
                rat_to_string(row[c]) + ", " + m.states[blocks[b][k]].name + " gives " +
                rat_to_string(other[c]));
      }
    } else {
      std::vector<std::vector<Rat>> rows;
      rows.reserve(blocks[b].size());
      for (std::size_t member : blocks[b]) rows.push_back(lifted_row(m, p, member));
      auto c = centroid(rows, policy.eps);
      if (!c)
        throw ValidationError("block " + block_display(m, blocks[b]) +
                              ": no centroid within epsilon " + rat_to_string(policy.eps));
      row = *c;
    }
    std::map<std::size_t, Rat> sparse;
    for (std::size_t c = 0; c < row.size(); ++c)
      if (row[c] != 0) sparse.emplace(c, row[c]);
    q.rows.push_back(std::move(sparse));
  }
  q.validate();
  return q;
}

std::pair<Lmc, std::vector<Rat>> apply_perturbation(const Lmc& m, const Perturbation& pert) {
  m.validate();
  Lmc out = m;
  std::vector<Rat> l1(m.size(), Rat(0));
  for (const auto& [s, row] : pert.rows) {
    if (s >= m.size()) throw ValidationError("perturbation names a state out of range");
    Rat sum = 0;
    for (const auto& [t, p] : row) {
      if (t >= m.size())
        throw ValidationError("perturbation row for \"" + m.states[s].name +
                              "\" has a target out of range");
      if (p <= 0 || p > 1)
        throw ValidationError("perturbation row for \"" + m.states[s].name +
                              "\": probability " + rat_to_string(p) + " outside (0, 1]");
      sum += p;
    }
    if (sum != 1)
      throw ValidationError("perturbation row for \"" + m.states[s].name + "\": row sum " +
                            rat_to_string(sum) + " != 1");
    Rat dist = 0;
    std::set<std::size_t> targets;
    for (const auto& [t, p] : m.rows[s]) targets.insert(t);
    for (const auto& [t, p] : row) targets.insert(t);
    for (std::size_t t : targets) {
      auto it = row.find(t);
      Rat np = it == row.end() ? Rat(0) : it->second;
      dist += rat_abs(np - m.prob(s, t));
    }
    l1[s] = dist;
    out.rows[s] = row;
  }
  out.validate();
  return {out, l1};
}

}  // namespace abst
