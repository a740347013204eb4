#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "exactbp/jtree.hpp"
#include "exactbp/model.hpp"

// JSON file formats for networks, evidence and junction trees, plus the
// locale-independent number formatting used by the command-line tool.
namespace exactbp::io {

/// Malformed JSON or a document that does not fit the schema.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt,
             std::optional<std::size_t> column = std::nullopt);
  std::optional<std::size_t> line() const { return line_; }
  std::optional<std::size_t> column() const { return column_; }

 private:
  std::optional<std::size_t> line_;
  std::optional<std::size_t> column_;
};

/// A well-formed document mentions a variable or state that does not exist.
class UnknownNameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// {"variables": [{"name", "states"}], "cpds": [{"child", "parents", "table"}]}.
/// The network is not validated; call validate_network on the result.
DiscreteNetwork parse_network(std::string_view text);
std::string serialize_network(const DiscreteNetwork& net);

/// Variable name -> state label, or -> array of labels for a subset.
EvidenceSet parse_evidence(std::string_view text, const DiscreteNetwork& net);
std::string serialize_evidence(const EvidenceSet& ev, const DiscreteNetwork& net);

/// {"clusters": [[names]], "edges": [[i, j]], "assignment": {name: i}}, indices 0-based.
/// A missing assignment is left empty.
JunctionTree parse_junction_tree(std::string_view text, const DiscreteNetwork& net);
std::string serialize_junction_tree(const JunctionTree& jt, const DiscreteNetwork& net);

/// Reads a whole file. Throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);

/// %.10g with '.' as decimal separator and a short exponent (1e-5, not 1e-05);
/// "inf", "-inf" and "nan" spelled out.
std::string format_number(double x);
/// %.9e with the exponent written without '+' or leading zeros, e.g. 1.632000000e-4.
std::string format_scientific(double x);

}  // namespace exactbp::io
