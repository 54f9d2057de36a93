// Relations, partitions, the canonical partition enumerator, and their text
// formats.

#include "abst/relations.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <sstream>

namespace abst {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t lookup(const std::string& name, const std::vector<std::string>& names,
                   const std::string& where) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ValidationError(where + ": unknown state name \"" + name + "\"");
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Relation Relation::full(std::size_t n) {
  Relation r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) r.pairs_.emplace(i, j);
  return r;
}

Relation Relation::equal_labels(const std::vector<std::set<std::string>>& labels) {
  Relation r(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j]) r.pairs_.emplace(i, j);
  return r;
}

Relation Relation::from_pairs(std::size_t n,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Relation r(n);
  for (const auto& [i, j] : pairs) r.add(i, j);
  return r;
}

bool Relation::related(std::size_t i, std::size_t j) const {
  if (i == j) return i < n_;
  if (i > j) std::swap(i, j);
  return pairs_.count({i, j}) > 0;
}

void Relation::add(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw ValidationError("relation pair index out of range");
  if (i == j) return;
  if (i > j) std::swap(i, j);
  pairs_.emplace(i, j);
}

void Relation::remove(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  pairs_.erase({i, j});
}

std::set<std::size_t> Relation::image(const std::set<std::size_t>& a) const {
  std::set<std::size_t> out = a;
  for (const auto& [i, j] : pairs_) {
    if (a.count(i)) out.insert(j);
    if (a.count(j)) out.insert(i);
  }
  return out;
}

Partition::Partition(std::size_t n, std::vector<std::vector<std::size_t>> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  block_of_.assign(n_, std::nullopt);
  for (auto& block : blocks_) {
    if (block.empty()) throw ValidationError("partition has an empty block");
    std::sort(block.begin(), block.end());
  }
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    for (std::size_t s : blocks_[b]) {
      if (s >= n_) throw ValidationError("partition mentions a state out of range");
      if (block_of_[s])
        throw ValidationError("partition blocks overlap on state index " + std::to_string(s));
      block_of_[s] = b;
    }
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::vector<std::size_t>> blocks(n);
  for (std::size_t i = 0; i < n; ++i) blocks[i] = {i};
  return Partition(n, std::move(blocks));
}

std::size_t Partition::block_of(std::size_t s) const {
  if (s >= n_ || !block_of_[s])
    throw ValidationError("state index " + std::to_string(s) + " not covered by partition");
  return *block_of_[s];
}

bool Partition::covers_all() const {
  for (const auto& b : block_of_)
    if (!b) return false;
  return n_ > 0;
}

bool Partition::same_block(std::size_t i, std::size_t j) const {
  return block_of(i) == block_of(j);
}

Relation Partition::as_relation() const {
  Relation r(n_);
  for (const auto& block : blocks_)
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = a + 1; b < block.size(); ++b) r.add(block[a], block[b]);
  return r;
}

Partition components(const Relation& r) {
  UnionFind uf(r.size());
  for (const auto& [i, j] : r.pairs()) uf.unite(i, j);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < r.size(); ++i) groups[uf.find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> blocks;
  blocks.reserve(groups.size());
  for (auto& [root, members] : groups) blocks.push_back(std::move(members));
  return Partition(r.size(), std::move(blocks));
}

bool enumerate_partitions(
    const std::vector<std::set<std::string>>& labels,
    const std::vector<std::pair<std::size_t, std::size_t>>& must_link,
    const std::vector<std::size_t>& universe, std::size_t cap,
    const std::function<bool(const Partition&)>& visit) {
  std::vector<std::size_t> uni = universe;
  std::sort(uni.begin(), uni.end());
  uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
  for (std::size_t s : uni)
    if (s >= labels.size()) throw ValidationError("universe mentions a state out of range");
  if (uni.size() > cap)
    throw CapExceeded("search space too large: " + std::to_string(uni.size()) +
                      " states exceed cap " + std::to_string(cap));

  std::map<std::size_t, std::size_t> pos;  // state -> position in uni
  for (std::size_t k = 0; k < uni.size(); ++k) pos[uni[k]] = k;

  UnionFind uf(uni.size());
  for (const auto& [a, b] : must_link) {
    auto ia = pos.find(a), ib = pos.find(b);
    if (ia == pos.end() || ib == pos.end())
      throw ValidationError("must-link pair outside the universe");
    if (labels[a] != labels[b])
      throw ValidationError("must-link pair with mismatched labels");
    uf.unite(ia->second, ib->second);
  }

  // Collapse must-link groups into atoms ordered by least member; a partition
  // of the atoms is exactly a partition of the universe merging all pairs.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < uni.size(); ++k) groups[uf.find(k)].push_back(uni[k]);
  std::vector<std::vector<std::size_t>> atoms;
  atoms.reserve(groups.size());
  for (auto& [root, members] : groups) atoms.push_back(std::move(members));
  for (const auto& atom : atoms)
    for (std::size_t k = 1; k < atom.size(); ++k)
      if (labels[atom[0]] != labels[atom[k]])
        throw ValidationError("must-link closure produced a label-mismatched group");

  std::size_t na = atoms.size();
  std::vector<std::size_t> assign(na, 0);
  // Restricted growth strings over atoms, lexicographic, with label pruning.
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                          std::size_t used) -> bool {
    if (i == na) {
      std::vector<std::vector<std::size_t>> blocks(used);
      for (std::size_t k = 0; k < na; ++k)
        blocks[assign[k]].insert(blocks[assign[k]].end(), atoms[k].begin(), atoms[k].end());
      return visit(Partition(labels.size(), std::move(blocks)));
    }
    for (std::size_t b = 0; b <= used; ++b) {
      if (b < used) {
        // First atom currently in block b (atoms join in index order, so the
        // block's label is its earliest atom's label).
        std::size_t first = na;
        for (std::size_t k = 0; k < i; ++k)
          if (assign[k] == b) {
            first = k;
            break;
          }
        if (labels[atoms[first][0]] != labels[atoms[i][0]]) continue;
      }
      assign[i] = b;
      if (!rec(i + 1, std::max(used, b + 1))) return false;
    }
    return true;
  };
  if (na == 0) return true;
  return rec(0, 0);
}

std::optional<Partition> first_passing_partition(
    const std::vector<std::set<std::string>>& labels,
    const std::vector<std::pair<std::size_t, std::size_t>>& must_link,
    const std::vector<std::size_t>& universe, const DecideOptions& opts,
    const std::function<bool(const Partition&)>& pred) {
  std::optional<Partition> found;
  if (opts.jobs <= 1) {
    enumerate_partitions(labels, must_link, universe, opts.cap, [&](const Partition& p) {
      if (pred(p)) {
        found = p;
        return false;
      }
      return true;
    });
    return found;
  }

  // Parallel path: fixed-size batches, each split into contiguous chunks; the
  // lowest passing batch index wins, so output equals the sequential result.
  std::vector<Partition> batch;
  const std::size_t batch_size = static_cast<std::size_t>(opts.jobs) * 8;
  auto flush = [&]() {
    if (batch.empty() || found) {
      batch.clear();
      return;
    }
    std::size_t chunk = (batch.size() + opts.jobs - 1) / opts.jobs;
    std::vector<std::future<std::size_t>> futs;
    for (std::size_t begin = 0; begin < batch.size(); begin += chunk) {
      std::size_t end = std::min(begin + chunk, batch.size());
      futs.push_back(std::async(std::launch::async, [&, begin, end]() -> std::size_t {
        for (std::size_t k = begin; k < end; ++k)
          if (pred(batch[k])) return k;
        return batch.size();
      }));
    }
    std::size_t best = batch.size();
    for (auto& f : futs) best = std::min(best, f.get());
    if (best < batch.size()) found = batch[best];
    batch.clear();
  };

  enumerate_partitions(labels, must_link, universe, opts.cap, [&](const Partition& p) {
    batch.push_back(p);
    if (batch.size() >= batch_size) {
      flush();
      if (found) return false;
    }
    return true;
  });
  flush();
  return found;
}

Relation parse_relation(const std::string& text, const std::vector<std::string>& names) {
  Relation r(names.size());
  std::stringstream ss(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    std::string where = "line " + std::to_string(lineno);
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto tilde = line.find('~');
    if (tilde == std::string::npos)
      throw ValidationError(where + ": expected \"<state> ~ <state>\"");
    std::string a = trim(line.substr(0, tilde)), b = trim(line.substr(tilde + 1));
    r.add(lookup(a, names, where), lookup(b, names, where));
  }
  return r;
}

std::string serialize_relation(const Relation& r, const std::vector<std::string>& names) {
  std::ostringstream out;
  for (const auto& [i, j] : r.pairs()) out << names[i] << " ~ " << names[j] << "\n";
  return out.str();
}

Partition parse_partition(const std::string& text, const std::vector<std::string>& names) {
  // Strip comments, then scan {..} groups; anything else must be whitespace.
  std::string clean;
  {
    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
      auto hash = raw.find('#');
      clean += (hash == std::string::npos ? raw : raw.substr(0, hash));
      clean += "\n";
    }
  }
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t i = 0;
  while (i < clean.size()) {
    if (std::isspace(static_cast<unsigned char>(clean[i]))) {
      ++i;
      continue;
    }
    if (clean[i] != '{') throw ValidationError("partition file: expected '{', found \"" +
                                               std::string(1, clean[i]) + "\"");
    auto close = clean.find('}', i);
    if (close == std::string::npos) throw ValidationError("partition file: unterminated block");
    std::string body = clean.substr(i + 1, close - i - 1);
    std::vector<std::size_t> block;
    std::stringstream bs(body);
    std::string item;
    while (std::getline(bs, item, ',')) {
      std::string name = trim(item);
      if (name.empty()) {
        if (trim(body).empty()) break;  // "{}" is rejected below as empty
        throw ValidationError("partition file: empty name in block {" + body + "}");
      }
      block.push_back(lookup(name, names, "partition file"));
    }
    if (block.empty()) throw ValidationError("partition file: empty block");
    blocks.push_back(std::move(block));
    i = close + 1;
  }
  return Partition(names.size(), std::move(blocks));
}

std::string serialize_partition(const Partition& p, const std::vector<std::string>& names) {
  std::ostringstream out;
  for (const auto& block : p.blocks()) {
    out << "{";
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (k) out << ", ";
      out << names[block[k]];
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace abst
