#include "abst/cli.hpp"

#include "abst/approx_bisim.hpp"
#include "abst/bounds.hpp"
#include "abst/errors.hpp"
#include "abst/generators.hpp"
#include "abst/lmc.hpp"
#include "abst/perturbed.hpp"
#include "abst/rat.hpp"
#include "abst/relations.hpp"
#include "abst/weak_branching.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace abst {

namespace {

using json = nlohmann::ordered_json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("cannot write file: " + path);
}

Rat parse_rat_flag(const std::string& text, const std::string& flag) {
  try {
    return rat_from_string(text);
  } catch (const std::invalid_argument&) {
    throw ValidationError("invalid rational for " + flag + ": '" + text + "'");
  }
}

Lmc load_model(const std::string& path) {
  Lmc m = parse_lmc(slurp(path));
  m.validate();
  return m;
}

std::size_t state_index(const Lmc& m, const std::string& name) {
  auto idx = m.index_of(name);
  if (!idx) throw ValidationError("unknown state '" + name + "'");
  return *idx;
}

// Single model, or the direct sum of two (verdict pair = the two initial
// states). --pair names two states of the single-model form.
struct ResolvedModel {
  Lmc m;
  std::optional<std::pair<std::size_t, std::size_t>> pair;
};

ResolvedModel resolve_models(const std::vector<std::string>& files,
                             const std::vector<std::string>& pair_names) {
  ResolvedModel rm;
  if (files.size() == 2) {
    if (!pair_names.empty())
      throw ValidationError("--pair requires the single-model form");
    Lmc a = load_model(files[0]);
    Lmc b = load_model(files[1]);
    std::size_t left_init = a.init;
    std::size_t left_size = a.size();
    std::size_t right_init = b.init;
    rm.m = direct_sum(a, b);
    rm.pair = {left_init, left_size + right_init};
    return rm;
  }
  rm.m = load_model(files.at(0));
  if (!pair_names.empty()) {
    rm.pair = {state_index(rm.m, pair_names.at(0)), state_index(rm.m, pair_names.at(1))};
  }
  return rm;
}

json relation_json(const Relation& r, const std::vector<std::string>& names) {
  json pairs = json::array();
  for (const auto& [i, j] : r.pairs()) pairs.push_back({names[i], names[j]});
  return json{{"count", r.pair_count()}, {"pairs", std::move(pairs)}};
}

json partition_json(const Partition& p, const std::vector<std::string>& names) {
  json blocks = json::array();
  for (const auto& block : p.blocks()) {
    json b = json::array();
    for (std::size_t s : block) b.push_back(names[s]);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

json witness_json(const Witness& w, const std::vector<std::string>& names) {
  json set = json::array();
  for (std::size_t s : w.set) set.push_back(names[s]);
  return json{{"s", names[w.s]},
              {"t", names[w.t]},
              {"set", std::move(set)},
              {"lhs", rat_to_string(w.lhs)},
              {"rhs", rat_to_string(w.rhs)}};
}

json report_json(const CheckReport& rep, const std::vector<std::string>& names) {
  json j{{"ok", rep.ok}, {"reason", rep.reason}};
  j["witness"] = rep.witness ? witness_json(*rep.witness, names) : json(nullptr);
  return j;
}

json certificate_json(const CentroidCertificate& cert,
                      const std::vector<std::string>& names) {
  json blocks = partition_json(cert.partition, names);
  json centroids = json::array();
  for (std::size_t bidx = 0; bidx < cert.centroids.size(); ++bidx) {
    json c = json::object();
    for (const auto& [block, mass] : cert.centroids[bidx]) {
      const auto& members = cert.partition.blocks()[block];
      c[names[members.front()]] = rat_to_string(mass);
    }
    centroids.push_back(std::move(c));
  }
  json l1 = json::array();
  for (const auto& dists : cert.member_l1) {
    json row = json::array();
    for (const Rat& d : dists) row.push_back(rat_to_string(d));
    l1.push_back(std::move(row));
  }
  return json{{"partition", std::move(blocks)},
              {"centroids", std::move(centroids)},
              {"member_l1", std::move(l1)}};
}

json perturbation_json(const Lmc& m, const Perturbation& pert) {
  const auto names = m.state_names();
  json rows = json::object();
  for (const auto& [s, row] : pert.rows) {
    json r = json::object();
    for (const auto& [t, p] : row) r[names[t]] = rat_to_string(p);
    rows[names[s]] = std::move(r);
  }
  auto [perturbed, l1s] = apply_perturbation(m, pert);
  json l1 = json::object();
  Rat max_l1 = 0;
  for (std::size_t s = 0; s < l1s.size(); ++s) {
    if (l1s[s] == 0) continue;
    l1[names[s]] = rat_to_string(l1s[s]);
    if (l1s[s] > max_l1) max_l1 = l1s[s];
  }
  return json{{"rows", std::move(rows)},
              {"l1", std::move(l1)},
              {"max_l1", rat_to_string(max_l1)}};
}

std::vector<long> parse_long_list(const std::string& text, const std::string& flag) {
  std::vector<long> out;
  std::string token;
  std::istringstream is(text);
  while (std::getline(is, token, ',')) {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(token, &pos);
    } catch (const std::exception&) {
      throw ValidationError("invalid " + flag + " entry '" + token + "'");
    }
    if (pos != token.size())
      throw ValidationError("invalid " + flag + " entry '" + token + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(flag + " must list at least one integer");
  return out;
}

std::set<std::string> parse_label_set(const std::string& text) {
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return std::string();
    return s.substr(b, e - b + 1);
  };
  std::string body = trim(text);
  if (body.size() < 2 || body.front() != '{' || body.back() != '}')
    throw ValidationError("malformed label set '" + text + "' (expected {a, b})");
  body = body.substr(1, body.size() - 2);
  std::set<std::string> label;
  if (trim(body).empty()) return label;
  std::istringstream is(body);
  std::string token;
  while (std::getline(is, token, ',')) {
    std::string ap = trim(token);
    if (ap.empty()) throw ValidationError("malformed label set '" + text + "'");
    label.insert(ap);
  }
  return label;
}

// "{a0}>{a1}>{g}" -> sequence of label sets.
std::vector<std::set<std::string>> parse_trace(const std::string& spec) {
  std::vector<std::set<std::string>> trace;
  std::istringstream is(spec);
  std::string part;
  while (std::getline(is, part, '>')) trace.push_back(parse_label_set(part));
  if (trace.empty()) throw ValidationError("empty trace spec '" + spec + "'");
  return trace;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "abstool: exact checkers, deciders, quotients, perturbation synthesis and\n"
      "reachability bounds for approximate probabilistic bisimulation on finite\n"
      "labeled Markov chains. All arithmetic is exact rational."};
  app.require_subcommand(1);

  // Shared option storage.
  std::vector<std::string> files;
  std::vector<std::string> pair_names;
  std::string eps_text, eps2_text, p_text, delta_text, delta_probe_text;
  std::string relation_path, partition_path, kind, policy = "exact";
  std::string family, set_text, out_base, goal_ap, f_ap, flavor_name;
  std::vector<std::string> trace_specs;
  long n_param = 0, target_param = 0;
  std::size_t cap = 14;
  std::size_t weak_cap = 12;
  unsigned jobs = 1;
  unsigned upto_n = 0;
  bool prune_cross = false, list_families = false;

  auto add_models = [&](CLI::App* cmd, int max_models) {
    cmd->add_option("models", files, "model file(s)")
        ->required()
        ->expected(1, max_models);
  };
  auto add_pair = [&](CLI::App* cmd) {
    cmd->add_option("--pair", pair_names, "two state names of the single-model form")
        ->expected(2);
  };
  auto add_eps = [&](CLI::App* cmd) {
    return cmd->add_option("--eps", eps_text, "tolerance (rational, e.g. 1/8)");
  };

  CLI::App* c_validate = app.add_subcommand("validate", "parse and validate a model file");
  add_models(c_validate, 1);

  CLI::App* c_bisim = app.add_subcommand(
      "bisim", "exact probabilistic bisimilarity (partition refinement)");
  add_models(c_bisim, 2);
  add_pair(c_bisim);

  CLI::App* c_eps_bisim = app.add_subcommand(
      "eps-bisim", "check a relation or compute the greatest eps-bisimilarity");
  add_models(c_eps_bisim, 2);
  add_pair(c_eps_bisim);
  add_eps(c_eps_bisim)->required();
  c_eps_bisim->add_option("--relation", relation_path, "relation file to check");

  CLI::App* c_upto = app.add_subcommand("upto", "the up-to-(n, eps) relation");
  add_models(c_upto, 2);
  add_pair(c_upto);
  add_eps(c_upto)->required();
  c_upto->add_option("--n", upto_n, "number of refinement steps")->required();

  CLI::App* c_apb = app.add_subcommand(
      "apb", "check a relation for the closed-set (eps-APB) condition");
  add_models(c_apb, 2);
  add_eps(c_apb)->required();
  c_apb->add_option("--relation", relation_path, "relation file to check")->required();

  CLI::App* c_check = app.add_subcommand(
      "check-partition", "check a partition: transitive, perturbed, or branching");
  add_models(c_check, 2);
  add_eps(c_check)->required();
  c_check->add_option("--partition", partition_path, "partition file")->required();
  c_check->add_option("--kind", kind, "transitive|perturbed|branching")->required();

  CLI::App* c_weak_check = app.add_subcommand(
      "weak-check", "check a relation for the weak (label-path) condition");
  add_models(c_weak_check, 2);
  add_eps(c_weak_check)->required();
  c_weak_check->add_option("--relation", relation_path, "relation file to check")
      ->required();
  c_weak_check->add_option("--cap", weak_cap, "state-count cap for the subset search");

  CLI::App* c_weak_greatest = app.add_subcommand(
      "weak-greatest", "compute the greatest weak eps-bisimilarity");
  add_models(c_weak_greatest, 2);
  add_pair(c_weak_greatest);
  add_eps(c_weak_greatest)->required();
  c_weak_greatest->add_option("--cap", weak_cap, "state-count cap for the subset search");

  CLI::App* c_decide = app.add_subcommand(
      "decide", "decide perturbed / transitive / branching bisimilarity of two states");
  add_models(c_decide, 2);
  add_pair(c_decide);
  add_eps(c_decide)->required();
  c_decide->add_option("--kind", kind, "perturbed|transitive|branching")->required();
  c_decide->add_option("--delta-probe", delta_probe_text,
                       "probe tolerance overriding --eps for the decision");
  c_decide->add_option("--cap", cap, "partition-enumeration universe cap");
  c_decide->add_option("--jobs", jobs, "parallel candidate checking (output-invariant)");
  c_decide->add_flag("--prune-cross-blocks", prune_cross,
                     "two-model form: only try partitions whose blocks cross the summands");

  CLI::App* c_quotient = app.add_subcommand("quotient", "collapse a partition's blocks");
  add_models(c_quotient, 1);
  c_quotient->add_option("--partition", partition_path, "partition file")->required();
  c_quotient->add_option("--policy", policy, "exact|centroid (default exact)");
  add_eps(c_quotient);
  c_quotient->add_option("-o,--out", out_base, "output model file");

  CLI::App* c_perturb = app.add_subcommand(
      "perturb", "synthesize a perturbation realizing an eps-perturbed partition");
  add_models(c_perturb, 1);
  add_eps(c_perturb)->required();
  c_perturb->add_option("--partition", partition_path, "partition file")->required();
  c_perturb->add_option("-o,--out", out_base, "output model file for the perturbed model");

  CLI::App* c_bounds = app.add_subcommand(
      "bounds", "reachability-difference bounds certified by approximate bisimulations");
  add_models(c_bounds, 1);
  c_bounds->add_option("--pair", pair_names, "the two compared states")
      ->expected(2)
      ->required();
  add_eps(c_bounds)->required();
  c_bounds->add_option("--flavor", flavor_name, "finite|step|class|label")->required();
  c_bounds->add_option("--goal", goal_ap, "goal proposition (unbounded flavors)");
  c_bounds->add_option("--f", f_ap, "fail proposition labeling the non-reaching states");
  c_bounds->add_option("--trace", trace_specs,
                       "trace spec {a0}>{a1}>{g} (repeatable; finite flavor)");
  c_bounds->add_option("--partition", partition_path, "partition file (class flavor)");

  CLI::App* c_gen = app.add_subcommand("gen", "generate a parameterized example family");
  c_gen->add_option("--family", family, "family name (see --list)");
  c_gen->add_flag("--list", list_families, "list family names");
  c_gen->add_option("--n", n_param, "size parameter");
  add_eps(c_gen);
  c_gen->add_option("--eps2", eps2_text, "second tolerance parameter");
  c_gen->add_option("--p", p_text, "loop-exit probability parameter");
  c_gen->add_option("--delta", delta_text, "perturbation radius parameter");
  c_gen->add_option("--set", set_text, "comma-separated positive integers");
  c_gen->add_option("--target", target_param, "target sum");
  c_gen->add_option("-o,--out", out_base, "output base path (suffix + .lmc appended)");

  CLI::App* c_reduce = app.add_subcommand(
      "reduce-subsetsum", "emit the model pair whose tolerance-equivalence encodes an instance");
  c_reduce->add_option("--set", set_text, "comma-separated positive integers")->required();
  c_reduce->add_option("--target", target_param, "target sum")->required();
  c_reduce->add_option("-o,--out", out_base, "output base path (suffix + .lmc appended)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_validate->parsed()) {
      Lmc m = load_model(files[0]);
      std::size_t arcs = 0;
      for (const auto& row : m.rows) arcs += row.size();
      emit(out, json{{"ok", true},
                     {"states", m.size()},
                     {"arcs", arcs},
                     {"init", m.states[m.init].name}});
      return 0;
    }

    if (c_bisim->parsed()) {
      ResolvedModel rm = resolve_models(files, pair_names);
      const auto names = rm.m.state_names();
      Partition p = exact_bisimilarity(rm.m);
      json j{{"partition", partition_json(p, names)}};
      if (rm.pair) {
        bool same = p.same_block(rm.pair->first, rm.pair->second);
        j["s"] = names[rm.pair->first];
        j["t"] = names[rm.pair->second];
        j["equivalent"] = same;
        emit(out, j);
        return same ? 0 : 1;
      }
      emit(out, j);
      return 0;
    }

    if (c_eps_bisim->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, pair_names);
      const auto names = rm.m.state_names();
      if (!relation_path.empty()) {
        if (rm.pair && files.size() == 1)
          throw ValidationError("--pair cannot be combined with --relation");
        Relation r = parse_relation(slurp(relation_path), names);
        CheckReport rep = is_eps_bisimulation(rm.m, r, eps);
        emit(out, report_json(rep, names));
        return rep.ok ? 0 : 1;
      }
      Relation g = greatest_eps_bisimilarity(rm.m, eps);
      json j{{"eps", rat_to_string(eps)}, {"greatest", relation_json(g, names)}};
      if (rm.pair) {
        bool related = rm.pair->first == rm.pair->second ||
                       g.related(rm.pair->first, rm.pair->second);
        j["s"] = names[rm.pair->first];
        j["t"] = names[rm.pair->second];
        j["related"] = related;
        emit(out, j);
        return related ? 0 : 1;
      }
      emit(out, j);
      return 0;
    }

    if (c_upto->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, pair_names);
      const auto names = rm.m.state_names();
      Relation r = up_to_bisimilarity(rm.m, eps, upto_n);
      json j{{"eps", rat_to_string(eps)},
             {"n", upto_n},
             {"relation", relation_json(r, names)}};
      if (rm.pair) {
        bool related =
            rm.pair->first == rm.pair->second || r.related(rm.pair->first, rm.pair->second);
        j["s"] = names[rm.pair->first];
        j["t"] = names[rm.pair->second];
        j["related"] = related;
        emit(out, j);
        return related ? 0 : 1;
      }
      emit(out, j);
      return 0;
    }

    if (c_apb->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, {});
      const auto names = rm.m.state_names();
      Relation r = parse_relation(slurp(relation_path), names);
      CheckReport rep = is_eps_apb(rm.m, r, eps);
      emit(out, report_json(rep, names));
      return rep.ok ? 0 : 1;
    }

    if (c_check->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, {});
      const auto names = rm.m.state_names();
      Partition p = parse_partition(slurp(partition_path), names);
      if (kind == "transitive") {
        CheckReport rep = is_transitive_eps_bisimulation(rm.m, p, eps);
        emit(out, report_json(rep, names));
        return rep.ok ? 0 : 1;
      }
      if (kind == "perturbed") {
        PerturbedReport rep = is_eps_perturbed_bisimulation(rm.m, p, eps);
        json j{{"ok", rep.ok}, {"reason", rep.reason}};
        j["witness"] = rep.witness ? witness_json(*rep.witness, names) : json(nullptr);
        if (rep.bad_block) j["bad_block"] = *rep.bad_block;
        if (rep.cert) j["certificate"] = certificate_json(*rep.cert, names);
        emit(out, j);
        return rep.ok ? 0 : 1;
      }
      if (kind == "branching") {
        CheckReport rep = is_branching_eps_bisimulation(rm.m, p, eps);
        emit(out, report_json(rep, names));
        return rep.ok ? 0 : 1;
      }
      throw ValidationError("unknown --kind '" + kind +
                            "' (expected transitive, perturbed, or branching)");
    }

    if (c_weak_check->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, {});
      const auto names = rm.m.state_names();
      Relation r = parse_relation(slurp(relation_path), names);
      CheckReport rep = is_weak_eps_bisimulation(rm.m, r, eps, weak_cap);
      emit(out, report_json(rep, names));
      return rep.ok ? 0 : 1;
    }

    if (c_weak_greatest->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, pair_names);
      const auto names = rm.m.state_names();
      Relation g = greatest_weak_eps_bisimilarity(rm.m, eps, weak_cap);
      json j{{"eps", rat_to_string(eps)}, {"greatest", relation_json(g, names)}};
      if (rm.pair) {
        bool related = rm.pair->first == rm.pair->second ||
                       g.related(rm.pair->first, rm.pair->second);
        j["s"] = names[rm.pair->first];
        j["t"] = names[rm.pair->second];
        j["related"] = related;
        emit(out, j);
        return related ? 0 : 1;
      }
      emit(out, j);
      return 0;
    }

    if (c_decide->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      Rat tol = delta_probe_text.empty() ? eps
                                         : parse_rat_flag(delta_probe_text, "--delta-probe");
      if (files.size() == 1 && pair_names.empty())
        throw ValidationError("decide needs two models or --pair on a single model");
      if (prune_cross && files.size() != 2)
        throw ValidationError("--prune-cross-blocks applies to the two-model form only");
      DecideOptions opts;
      opts.cap = cap;
      opts.jobs = jobs;
      opts.prune_cross = prune_cross;

      if (kind == "perturbed" || kind == "transitive") {
        json j{{"kind", kind}, {"eps", rat_to_string(tol)}};
        if (kind == "perturbed") {
          PerturbedDecision d =
              files.size() == 2
                  ? decide_perturbed_bisimilar(load_model(files[0]), load_model(files[1]),
                                               tol, opts)
                  : [&] {
                      ResolvedModel rm = resolve_models(files, pair_names);
                      return decide_perturbed_pair(rm.m, rm.pair->first, rm.pair->second,
                                                   tol, opts);
                    }();
          const auto names = d.model.state_names();
          j["yes"] = d.yes;
          if (d.cert) {
            j["certificate"] = certificate_json(*d.cert, names);
            if (d.perturbation) j["perturbation"] = perturbation_json(d.model, *d.perturbation);
          }
          emit(out, j);
          return d.yes ? 0 : 1;
        }
        TransitiveDecision d =
            files.size() == 2
                ? decide_transitive_eps_bisimilar(load_model(files[0]),
                                                  load_model(files[1]), tol, opts)
                : [&] {
                    ResolvedModel rm = resolve_models(files, pair_names);
                    return decide_transitive_pair(rm.m, rm.pair->first, rm.pair->second,
                                                  tol, opts);
                  }();
        const auto names = d.model.state_names();
        j["yes"] = d.yes;
        j["partition"] =
            d.partition ? partition_json(*d.partition, names) : json(nullptr);
        emit(out, j);
        return d.yes ? 0 : 1;
      }
      if (kind == "branching") {
        ResolvedModel rm = resolve_models(files, pair_names);
        const auto names = rm.m.state_names();
        auto found = decide_branching_bisimilar(rm.m, rm.pair->first, rm.pair->second,
                                                tol, opts);
        json j{{"kind", kind},
               {"eps", rat_to_string(tol)},
               {"yes", found.has_value()},
               {"partition", found ? partition_json(*found, names) : json(nullptr)}};
        emit(out, j);
        return found ? 0 : 1;
      }
      throw ValidationError("unknown --kind '" + kind +
                            "' (expected perturbed, transitive, or branching)");
    }

    if (c_quotient->parsed()) {
      ResolvedModel rm = resolve_models(files, {});
      const auto names = rm.m.state_names();
      Partition p = parse_partition(slurp(partition_path), names);
      QuotientPolicy pol;
      if (policy == "exact") {
        pol.kind = QuotientPolicy::exact;
      } else if (policy == "centroid") {
        if (eps_text.empty())
          throw ValidationError("--policy centroid requires --eps");
        pol.kind = QuotientPolicy::centroid;
        pol.eps = parse_rat_flag(eps_text, "--eps");
      } else {
        throw ValidationError("unknown --policy '" + policy +
                              "' (expected exact or centroid)");
      }
      Lmc q = quotient(rm.m, p, pol);
      std::string text = serialize_lmc(q);
      json j{{"states", q.size()}, {"policy", policy}};
      if (!out_base.empty()) {
        write_file(out_base, text);
        j["written"] = out_base;
      } else {
        j["model"] = text;
      }
      emit(out, j);
      return 0;
    }

    if (c_perturb->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, {});
      const auto names = rm.m.state_names();
      Partition p = parse_partition(slurp(partition_path), names);
      PerturbedReport rep = is_eps_perturbed_bisimulation(rm.m, p, eps);
      if (!rep.ok) {
        json j{{"ok", false}, {"reason", rep.reason}};
        j["witness"] = rep.witness ? witness_json(*rep.witness, names) : json(nullptr);
        emit(out, j);
        return 1;
      }
      Perturbation pert = synthesize_perturbation(rm.m, p, *rep.cert, eps);
      json j{{"ok", true},
             {"certificate", certificate_json(*rep.cert, names)},
             {"perturbation", perturbation_json(rm.m, pert)}};
      std::string text = serialize_lmc(apply_perturbation(rm.m, pert).first);
      if (!out_base.empty()) {
        write_file(out_base, text);
        j["written"] = out_base;
      } else {
        j["model"] = text;
      }
      emit(out, j);
      return 0;
    }

    if (c_bounds->parsed()) {
      Rat eps = parse_rat_flag(eps_text, "--eps");
      ResolvedModel rm = resolve_models(files, pair_names);
      const auto names = rm.m.state_names();
      std::size_t s = rm.pair->first, t = rm.pair->second;

      BoundReport rep;
      if (flavor_name == "finite") {
        if (trace_specs.empty())
          throw ValidationError("--flavor finite requires at least one --trace");
        if (!goal_ap.empty() || !f_ap.empty())
          throw ValidationError("--goal/--f apply to unbounded flavors only");
        std::vector<std::vector<std::set<std::string>>> traces;
        for (const auto& spec : trace_specs) traces.push_back(parse_trace(spec));
        rep = finite_horizon_report(rm.m, s, t, traces, eps);
      } else {
        BoundFlavor flavor;
        if (flavor_name == "step") {
          flavor = BoundFlavor::step;
        } else if (flavor_name == "class") {
          flavor = BoundFlavor::class_change;
        } else if (flavor_name == "label") {
          flavor = BoundFlavor::label_change;
        } else {
          throw ValidationError("unknown --flavor '" + flavor_name +
                                "' (expected finite, step, class, or label)");
        }
        if (!trace_specs.empty())
          throw ValidationError("--trace applies to --flavor finite only");
        if (goal_ap.empty())
          throw ValidationError("unbounded flavors require --goal");
        if (f_ap.empty())
          throw ValidationError("unbounded flavors require --f");
        std::optional<Partition> part;
        if (!partition_path.empty())
          part = parse_partition(slurp(partition_path), names);
        rep = unbounded_report(rm.m, s, t, eps, flavor, goal_ap, f_ap, part);
      }

      json j{{"flavor", bound_flavor_name(rep.flavor)},
             {"s", names[rep.s]},
             {"t", names[rep.t]},
             {"eps", rat_to_string(rep.eps)},
             {"lhs", rat_to_string(rep.lhs)},
             {"rhs", rep.rhs ? json(rat_to_string(*rep.rhs)) : json(nullptr)},
             {"tight", rep.tight},
             {"vacuous", rep.vacuous}};
      if (rep.flavor == BoundFlavor::finite_horizon) {
        j["horizon"] = rep.horizon;
      } else {
        j["expected_s"] =
            rep.expected_s ? json(rat_to_string(*rep.expected_s)) : json(nullptr);
        j["expected_t"] =
            rep.expected_t ? json(rat_to_string(*rep.expected_t)) : json(nullptr);
      }
      j["premise"] = json{{"relation_holds", rep.premise.relation_holds},
                          {"f_discipline_ok", rep.premise.f_discipline_ok},
                          {"note", rep.premise.note}};
      emit(out, j);
      bool certified = rep.premise.relation_holds &&
                       (rep.flavor == BoundFlavor::finite_horizon ||
                        rep.premise.f_discipline_ok);
      return certified ? 0 : 1;
    }

    if (c_gen->parsed() || c_reduce->parsed()) {
      bool reduce = c_reduce->parsed();
      if (!reduce && list_families) {
        json fams = json::array();
        for (const auto& name : gen_family_names()) fams.push_back(name);
        emit(out, json{{"families", std::move(fams)}});
        return 0;
      }
      std::string fam = reduce ? "subsetsum" : family;
      if (fam.empty())
        throw ValidationError("gen requires --family (or --list to enumerate)");
      GenParams params;
      CLI::App* src = reduce ? c_reduce : c_gen;
      if (!reduce) {
        if (src->count("--n")) params.n = n_param;
        if (!eps_text.empty()) params.eps = parse_rat_flag(eps_text, "--eps");
        if (!eps2_text.empty()) params.eps2 = parse_rat_flag(eps2_text, "--eps2");
        if (!p_text.empty()) params.p = parse_rat_flag(p_text, "--p");
        if (!delta_text.empty()) params.delta = parse_rat_flag(delta_text, "--delta");
      }
      if (src->count("--set")) params.set = parse_long_list(set_text, "--set");
      if (src->count("--target")) params.target = target_param;
      GenOutput gen = generate(fam, params);
      json j{{"family", fam}};
      json notes = json::object();
      for (const auto& [k, v] : gen.notes) notes[k] = v;
      j["notes"] = std::move(notes);
      if (!out_base.empty()) {
        json files_out = json::array();
        for (const auto& [suffix, model] : gen.models) {
          std::string path = out_base + suffix + ".lmc";
          write_file(path, serialize_lmc(model));
          files_out.push_back(path);
        }
        j["files"] = std::move(files_out);
      } else {
        json models = json::object();
        for (const auto& [suffix, model] : gen.models)
          models["model" + suffix] = serialize_lmc(model);
        j["models"] = std::move(models);
      }
      emit(out, j);
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  err << "error: no subcommand handled\n";
  return 2;
}

}  // namespace abst
