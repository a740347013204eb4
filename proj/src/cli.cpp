#include "exactbp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <sstream>

#include "exactbp/hmm.hpp"
#include "exactbp/io.hpp"
#include "exactbp/jtree.hpp"
#include "exactbp/oracle.hpp"
#include "exactbp/propagation.hpp"
#include "exactbp/sampling.hpp"

namespace exactbp {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation failed; the violations were already printed.
struct Rejected {};

std::string join_names(const DiscreteNetwork& net, const std::vector<VarId>& ids) {
  std::string s;
  for (VarId u : ids) {
    if (!s.empty()) s += ',';
    s += net.variable(u).name;
  }
  return s;
}

void print_report(const ValidationReport& report, std::ostream& err) {
  for (const Violation& v : report.violations) err << "violation: " << to_string(v.kind) << ": " << v.detail << "\n";
}

std::string load_text(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

struct Inputs {
  DiscreteNetwork net;
  EvidenceSet ev;
  std::optional<JunctionTree> jt;
};

Inputs load(const std::string& net_path, const std::string& ev_path, const std::string& jt_path, std::ostream& err) {
  Inputs in;
  in.net = io::parse_network(load_text(net_path));
  if (auto report = validate_network(in.net); !report.ok()) {
    print_report(report, err);
    throw Rejected{};
  }
  if (!ev_path.empty()) in.ev = io::parse_evidence(load_text(ev_path), in.net);
  if (!jt_path.empty()) {
    JunctionTree jt = io::parse_junction_tree(load_text(jt_path), in.net);
    if (jt.assignment.empty()) {
      ValidationReport report = validate_junction_tree(in.net, jt);
      if (!report.ok()) {
        print_report(report, err);
        throw Rejected{};
      }
      jt.assignment = assign_clusters(in.net, jt);
    }
    if (auto report = validate_junction_tree(in.net, jt); !report.ok()) {
      print_report(report, err);
      throw Rejected{};
    }
    in.jt = std::move(jt);
  }
  return in;
}

CompiledQuery compile(const Inputs& in) { return calibrated_query(in.net, in.ev, in.jt); }

bool impossible(const CompiledQuery& cq, std::ostream& out) {
  if (cq.log_evidence_probability() != -std::numeric_limits<double>::infinity()) return false;
  out << "log_p_evidence=-inf\n";
  return true;
}

std::vector<VarId> resolve_vars(const DiscreteNetwork& net, const std::vector<std::string>& names) {
  std::vector<VarId> ids;
  if (names.empty()) {
    for (VarId u = 0; u < net.size(); ++u) ids.push_back(u);
    return ids;
  }
  for (const auto& name : names) {
    auto u = net.find(name);
    if (!u) throw io::UnknownNameError("unknown variable \"" + name + "\"");
    ids.push_back(*u);
  }
  return ids;
}

std::vector<double> oracle_posterior(const Inputs& in, VarId u) {
  const double z = oracle::evidence_probability(in.net, in.ev);
  const Factor m = oracle::marginal(in.net, in.ev, {u});
  std::vector<double> p(m.size());
  for (std::size_t s = 0; s < p.size(); ++s) p[s] = m.linear(s) / z;
  return p;
}

int cmd_validate(const std::string& net_path, const std::string& ev_path, const std::string& jt_path,
                 std::ostream& out, std::ostream& err) {
  Inputs in = load(net_path, ev_path, jt_path, err);
  out << "ok variables=" << in.net.size() << "\n";
  return kExitOk;
}

int cmd_jtree(const std::string& net_path, bool emit_json, std::ostream& out, std::ostream& err) {
  Inputs in = load(net_path, "", "", err);
  const JunctionTree jt = build_junction_tree(in.net);
  if (emit_json) {
    out << io::serialize_junction_tree(jt, in.net);
    return kExitOk;
  }
  for (ClusterId j = 0; j < jt.size(); ++j)
    out << "cluster " << j << " {" << join_names(in.net, jt.clusters[j]) << "} owns {"
        << join_names(in.net, jt.owned(j)) << "}\n";
  for (const auto& [i, j] : jt.edges)
    out << "edge " << i << "-" << j << " separator {" << join_names(in.net, jt.separator(i, j)) << "}\n";
  out << "max_cluster_size=" << jt.max_cluster_size() << "\n";
  return kExitOk;
}

int cmd_logz(const Inputs& in, bool with_oracle, std::ostream& out) {
  const CompiledQuery cq = compile(in);
  const double log_z = cq.log_evidence_probability();
  out << "p_evidence=" << io::format_scientific(std::exp(log_z)) << "\n";
  out << "log_p_evidence=" << io::format_number(log_z) << "\n";
  if (with_oracle) {
    const double z = oracle::evidence_probability(in.net, in.ev);
    out << "oracle_p_evidence=" << io::format_scientific(z) << "\n";
    out << "oracle_log_p_evidence=" << io::format_number(std::log(z)) << "\n";
  }
  return kExitOk;
}

int cmd_marginals(const Inputs& in, const std::vector<std::string>& var_names, const std::string& format,
                  bool with_oracle, std::ostream& out) {
  const std::vector<VarId> vars = resolve_vars(in.net, var_names);
  const CompiledQuery cq = compile(in);
  if (impossible(cq, out)) return kExitOk;

  std::vector<std::vector<double>> engine, reference;
  for (VarId u : vars) {
    engine.push_back(cq.variable_posterior(u));
    if (with_oracle) reference.push_back(oracle_posterior(in, u));
  }

  if (format == "csv") {
    out << "variable,state,probability" << (with_oracle ? ",oracle_probability" : "") << "\n";
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const Variable& v = in.net.variable(vars[k]);
      for (std::size_t s = 0; s < v.cardinality(); ++s) {
        out << v.name << "," << v.states[s] << "," << io::format_number(engine[k][s]);
        if (with_oracle) out << "," << io::format_number(reference[k][s]);
        out << "\n";
      }
    }
    return kExitOk;
  }

  auto quote = [](const std::string& s) { return nlohmann::json(s).dump(); };
  out << "{\n";
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const Variable& v = in.net.variable(vars[k]);
    out << "  " << quote(v.name) << ": {";
    for (std::size_t s = 0; s < v.cardinality(); ++s) {
      out << (s ? ", " : "") << quote(v.states[s]) << ": ";
      if (with_oracle)
        out << "{\"probability\": " << io::format_number(engine[k][s])
            << ", \"oracle_probability\": " << io::format_number(reference[k][s]) << "}";
      else
        out << io::format_number(engine[k][s]);
    }
    out << "}" << (k + 1 < vars.size() ? "," : "") << "\n";
  }
  out << "}\n";
  return kExitOk;
}

int cmd_map(const Inputs& in, std::ostream& out) {
  CompiledQuery cq = compile(in);
  if (impossible(cq, out)) return kExitOk;
  cq.max_messages(cq.options().root);
  const MapResult best = cq.map_assignment();
  out << "p_map=" << io::format_scientific(std::exp(best.log_value)) << "\n";
  out << "log_p_map=" << io::format_number(best.log_value) << "\n";
  for (VarId u = 0; u < in.net.size(); ++u)
    out << in.net.variable(u).name << "=" << in.net.variable(u).states[best.assignment[u]] << "\n";
  return kExitOk;
}

int cmd_sample(const Inputs& in, std::size_t count, std::uint64_t seed, std::ostream& out) {
  const CompiledQuery cq = compile(in);
  if (impossible(cq, out)) return kExitOk;
  PosteriorSampler sampler(cq, cq.options().root, seed);
  std::vector<VarId> all(in.net.size());
  for (VarId u = 0; u < all.size(); ++u) all[u] = u;
  out << join_names(in.net, all) << "\n";
  for (std::size_t k = 0; k < count; ++k) {
    const Assignment x = sampler.draw();
    for (VarId u = 0; u < x.size(); ++u) out << (u ? "," : "") << in.net.variable(u).states[x[u]];
    out << "\n";
  }
  return kExitOk;
}

int cmd_hmm_demo(std::size_t days, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const hmm::HmmSpec spec = hmm::precipitation_model(days);
  const hmm::Trajectory t = hmm::simulate(spec, seed);
  const hmm::ForwardBackward fb = hmm::forward_backward(spec, t.observations);
  std::ostringstream csv;
  csv << "day,y,true_state,posterior_" << spec.states[0] << "\n";
  for (std::size_t i = 0; i < days; ++i)
    csv << i + 1 << "," << t.observations[i] << "," << spec.states[t.states[i]] << ","
        << io::format_number(hmm::posterior(fb, i)[0]) << "\n";
  if (out_path.empty()) {
    out << csv.str();
    return kExitOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw UsageError("cannot write " + out_path);
  file << csv.str();
  if (!file) throw UsageError("cannot write " + out_path);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact inference in discrete Bayesian networks by junction-tree message passing", "exactbp"};
  app.require_subcommand(1);

  std::string net_path, ev_path, jt_path, format = "csv", out_path;
  std::vector<std::string> var_names;
  bool emit_json = false, with_oracle = false;
  std::size_t count = 0, days = 100;
  std::uint64_t seed = 0;

  auto add_net = [&](CLI::App* sub) { sub->add_option("network", net_path, "network JSON file")->required(); };
  auto add_query = [&](CLI::App* sub) {
    add_net(sub);
    sub->add_option("--evidence", ev_path, "evidence JSON file");
    sub->add_option("--jtree", jt_path, "junction tree JSON file (built by min-fill when absent)");
  };

  auto* validate = app.add_subcommand("validate", "check a network (and optional evidence / junction tree)");
  add_query(validate);
  auto* jtree = app.add_subcommand("jtree", "build a junction tree by min-fill elimination");
  add_net(jtree);
  jtree->add_flag("--emit-json", emit_json, "print the tree as JSON");
  auto* logz = app.add_subcommand("logz", "probability of the evidence");
  add_query(logz);
  logz->add_flag("--oracle", with_oracle, "also print the brute-force value");
  auto* marginals = app.add_subcommand("marginals", "posterior marginal of each variable");
  add_query(marginals);
  marginals->add_option("--var", var_names, "restrict to these variables")->expected(1, -1);
  marginals->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  marginals->add_flag("--oracle", with_oracle, "also print brute-force values");
  auto* map = app.add_subcommand("map", "most probable joint assignment");
  add_query(map);
  auto* sample = app.add_subcommand("sample", "exact draws from the posterior");
  add_query(sample);
  sample->add_option("-n", count, "number of draws")->required();
  sample->add_option("--seed", seed, "random seed");
  auto* demo = app.add_subcommand("hmm-demo", "simulate the precipitation chain and print its posterior");
  demo->add_option("--days", days, "chain length")->check(CLI::PositiveNumber);
  demo->add_option("--seed", seed, "random seed");
  demo->add_option("--out", out_path, "write the CSV to this file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(net_path, ev_path, jt_path, out, err);
    if (jtree->parsed()) return cmd_jtree(net_path, emit_json, out, err);
    if (demo->parsed()) return cmd_hmm_demo(days, seed, out_path, out);
    const Inputs in = load(net_path, ev_path, jt_path, err);
    if (logz->parsed()) return cmd_logz(in, with_oracle, out);
    if (marginals->parsed()) return cmd_marginals(in, var_names, format, with_oracle, out);
    if (map->parsed()) return cmd_map(in, out);
    if (sample->parsed()) return cmd_sample(in, count, seed, out);
    return kExitUsage;
  } catch (const Rejected&) {
    return kExitInvalid;
  } catch (const InvalidModelError& e) {
    err << "error: " << e.what() << "\n";
    print_report(e.report(), err);
    return kExitInvalid;
  } catch (const CoveringError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const io::UnknownNameError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const oracle::OracleSizeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScopeOverflowError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace exactbp
