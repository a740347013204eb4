#include "exactbp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>

namespace exactbp::io {

using json = nlohmann::ordered_json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string message = e.what();
    if (auto pos = message.find(": "); pos != std::string::npos) message = message.substr(pos + 2);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message,
                     line, column);
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + " is missing \"" + key + "\"");
  return *it;
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + " must be a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array");
  return j;
}

std::size_t as_index(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) throw ParseError(where + " must be a non-negative integer");
  return j.get<std::size_t>();
}

VarId lookup_variable(const DiscreteNetwork& net, const std::string& name) {
  auto u = net.find(name);
  if (!u) throw UnknownNameError("unknown variable \"" + name + "\"");
  return *u;
}

std::size_t lookup_state(const DiscreteNetwork& net, VarId u, const std::string& label) {
  auto s = net.variable(u).state_index(label);
  if (!s) throw UnknownNameError("unknown state \"" + label + "\" of variable \"" + net.variable(u).name + "\"");
  return *s;
}

std::string trim_exponent(std::string s) {
  auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mantissa = s.substr(0, e + 1);
  std::size_t k = e + 1;
  if (s[k] == '-') mantissa += '-';
  if (s[k] == '+' || s[k] == '-') ++k;
  while (k + 1 < s.size() && s[k] == '0') ++k;
  return mantissa + s.substr(k);
}

std::string special(double x) {
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

ParseError::ParseError(const std::string& what, std::optional<std::size_t> line, std::optional<std::size_t> column)
    : std::runtime_error(what), line_(line), column_(column) {}

DiscreteNetwork parse_network(std::string_view text) {
  const json doc = parse_json(text);
  std::vector<Variable> vars;
  for (const json& v : as_array(field(doc, "variables", "network"), "\"variables\"")) {
    Variable var;
    var.name = as_string(field(v, "name", "variable"), "variable name");
    for (const json& s : as_array(field(v, "states", "variable " + var.name), "states of " + var.name))
      var.states.push_back(as_string(s, "state of " + var.name));
    vars.push_back(std::move(var));
  }
  const DiscreteNetwork names(vars, {});

  std::vector<Cpd> cpds;
  for (const json& c : as_array(field(doc, "cpds", "network"), "\"cpds\"")) {
    Cpd cpd;
    const std::string child = as_string(field(c, "child", "cpd"), "cpd child");
    const std::string where = "cpd of " + child;
    cpd.child = lookup_variable(names, child);
    if (auto p = c.find("parents"); c.is_object() && p != c.end())
      for (const json& name : as_array(*p, "parents in " + where))
        cpd.parents.push_back(lookup_variable(names, as_string(name, "parent in " + where)));
    for (const json& row : as_array(field(c, "table", where), "table in " + where)) {
      std::vector<double> values;
      for (const json& x : as_array(row, "table row in " + where)) {
        if (!x.is_number()) throw ParseError("table entries in " + where + " must be numbers");
        values.push_back(x.get<double>());
      }
      cpd.table.push_back(std::move(values));
    }
    cpds.push_back(std::move(cpd));
  }
  return DiscreteNetwork(std::move(vars), std::move(cpds));
}

std::string serialize_network(const DiscreteNetwork& net) {
  json vars = json::array();
  for (const Variable& v : net.variables()) vars.push_back({{"name", v.name}, {"states", v.states}});
  json cpds = json::array();
  for (const Cpd& c : net.cpds()) {
    json parents = json::array();
    for (VarId p : c.parents) parents.push_back(net.variable(p).name);
    cpds.push_back({{"child", net.variable(c.child).name}, {"parents", parents}, {"table", c.table}});
  }
  return json{{"variables", vars}, {"cpds", cpds}}.dump(2) + "\n";
}

EvidenceSet parse_evidence(std::string_view text, const DiscreteNetwork& net) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("evidence must be an object mapping variable names to states");
  EvidenceSet ev;
  for (const auto& [name, value] : doc.items()) {
    const VarId u = lookup_variable(net, name);
    std::vector<std::size_t> states;
    if (value.is_string()) {
      states.push_back(lookup_state(net, u, value.get<std::string>()));
    } else if (value.is_array()) {
      for (const json& s : value) states.push_back(lookup_state(net, u, as_string(s, "evidence state of " + name)));
    } else {
      throw ParseError("evidence for " + name + " must be a state or an array of states");
    }
    ev.allow(u, std::move(states));
  }
  return ev;
}

std::string serialize_evidence(const EvidenceSet& ev, const DiscreteNetwork& net) {
  json doc = json::object();
  for (const auto& [u, states] : ev.entries()) {
    json labels = json::array();
    for (std::size_t s : states) labels.push_back(net.variable(u).states.at(s));
    doc[net.variable(u).name] = labels;
  }
  return doc.dump(2) + "\n";
}

JunctionTree parse_junction_tree(std::string_view text, const DiscreteNetwork& net) {
  const json doc = parse_json(text);
  JunctionTree jt;
  for (const json& c : as_array(field(doc, "clusters", "junction tree"), "\"clusters\"")) {
    std::vector<VarId> members;
    for (const json& name : as_array(c, "cluster")) members.push_back(lookup_variable(net, as_string(name, "cluster member")));
    std::sort(members.begin(), members.end());
    jt.clusters.push_back(std::move(members));
  }
  for (const json& e : as_array(field(doc, "edges", "junction tree"), "\"edges\"")) {
    if (!e.is_array() || e.size() != 2) throw ParseError("each edge must be a pair of cluster indices");
    jt.edges.emplace_back(as_index(e[0], "edge endpoint"), as_index(e[1], "edge endpoint"));
  }
  if (auto a = doc.find("assignment"); a != doc.end()) {
    if (!a->is_object()) throw ParseError("\"assignment\" must map variable names to cluster indices");
    jt.assignment.assign(net.size(), 0);
    std::vector<bool> seen(net.size(), false);
    for (const auto& [name, idx] : a->items()) {
      const VarId u = lookup_variable(net, name);
      jt.assignment[u] = as_index(idx, "assignment of " + name);
      seen[u] = true;
    }
    for (VarId u = 0; u < net.size(); ++u)
      if (!seen[u]) throw ParseError("assignment is missing variable \"" + net.variable(u).name + "\"");
  }
  return jt;
}

std::string serialize_junction_tree(const JunctionTree& jt, const DiscreteNetwork& net) {
  json clusters = json::array();
  for (const auto& c : jt.clusters) {
    json names = json::array();
    for (VarId u : c) names.push_back(net.variable(u).name);
    clusters.push_back(names);
  }
  json edges = json::array();
  for (const auto& [i, j] : jt.edges) edges.push_back({i, j});
  json assignment = json::object();
  for (VarId u = 0; u < jt.assignment.size(); ++u) assignment[net.variable(u).name] = jt.assignment[u];
  return json{{"clusters", clusters}, {"edges", edges}, {"assignment", assignment}}.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return special(x);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
  if (ec != std::errc{}) throw std::system_error(std::make_error_code(ec));
  return trim_exponent(std::string(buf, end));
}

std::string format_scientific(double x) {
  if (!std::isfinite(x)) return special(x);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 9);
  if (ec != std::errc{}) throw std::system_error(std::make_error_code(ec));
  return trim_exponent(std::string(buf, end));
}

}  // namespace exactbp::io
