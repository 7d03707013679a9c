#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qtomo/topology.hpp"

namespace qtomo {

// Text format, one directive per line, fields separated by whitespace and
// '#' starting a comment:
//
//   root <node>
//   edge <parent> <child> <label>
//   receiver <node>          (order fixes R1..RN)
//   join <receiver> <label>  (optional, all or none)
//
// Edge lines may come in any order.
struct Topology {
  LogicalTree tree;
  std::optional<JoiningConfig> config;
};

// Throws ParseError carrying the offending line.
Topology parse_topology(std::string_view text);
std::string serialize_topology(const LogicalTree& tree,
                               const std::optional<JoiningConfig>& config = std::nullopt);

// Reads only `join` lines (and comments) against an existing tree; used for
// the per-source ground truths of the multi-source driver. The result is
// checked to lie on root paths but not for validity.
JoiningConfig parse_joins(std::string_view text, const LogicalTree& tree);

// File helpers; I/O failures throw std::runtime_error.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);
Topology load_topology(const std::string& path);

}  // namespace qtomo
