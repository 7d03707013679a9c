#include "qtomo/topology_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> fields;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::istringstream in{std::string(raw)};
    Line line{number, {}};
    for (std::string f; in >> f;) line.fields.push_back(std::move(f));
    if (!line.fields.empty()) out.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

void expect_fields(const Line& line, std::size_t count, const char* usage) {
  if (line.fields.size() != count) {
    throw ParseError(line.number, std::string("expected '") + usage + "'");
  }
}

struct JoinLine {
  std::size_t number;
  std::string receiver;
  std::string label;
};

// Resolves join lines against the tree. No join lines means no ground
// truth; otherwise every receiver needs exactly one.
std::optional<JoiningConfig> resolve_joins(const std::vector<JoinLine>& joins,
                                           const LogicalTree& tree, std::size_t last_line) {
  if (joins.empty()) return std::nullopt;
  const std::size_t n = tree.receiver_count();
  std::vector<EdgeId> edges(n, kNoNode);
  std::vector<std::size_t> line_of(n, 0);
  for (const JoinLine& j : joins) {
    auto r = tree.find_receiver(j.receiver);
    if (!r) throw ParseError(j.number, "unknown receiver " + j.receiver);
    if (edges[*r] != kNoNode) throw ParseError(j.number, "second join for " + j.receiver);
    auto e = tree.find_edge(j.label);
    if (!e) throw ParseError(j.number, "unknown edge label " + j.label);
    if (!tree.on_root_path(*e, *r)) {
      throw ParseError(j.number, "join " + j.label + " is off the root path of " + j.receiver);
    }
    edges[*r] = *e;
    line_of[*r] = j.number;
  }
  for (Receiver r = 0; r < n; ++r) {
    if (edges[r] == kNoNode) {
      throw ParseError(last_line, "no join for receiver " + tree.receiver_name(r));
    }
  }
  JoiningConfig config(edges);
  if (!is_valid_config(tree, config)) {
    // Name a receiver whose join is not the deepest one used on its path.
    std::vector<char> used(tree.node_count(), 0);
    for (EdgeId e : edges) used[e] = 1;
    std::vector<NodeId> deepest(tree.node_count(), kNoNode);
    for (NodeId v = 1; v < tree.node_count(); ++v) {
      deepest[v] = used[v] ? v : deepest[tree.parent(v)];
    }
    for (Receiver r = 0; r < n; ++r) {
      const NodeId d = deepest[tree.receiver_node(r)];
      if (d != edges[r]) {
        throw ParseError(line_of[r], "invalid configuration: join " +
                                         tree.edge_label(edges[r]).id + " of " +
                                         tree.receiver_name(r) + " lies above join " +
                                         tree.edge_label(d).id + " of another receiver");
      }
    }
  }
  return config;
}

}  // namespace

Topology parse_topology(std::string_view text) {
  const std::vector<Line> lines = tokenize(text);
  const std::size_t last_line = lines.empty() ? 1 : lines.back().number;

  std::optional<std::string> root;
  std::size_t root_line = 0;
  std::vector<TreeEdge> edges;
  std::vector<std::size_t> edge_line;
  std::unordered_map<std::string, std::size_t> label_line;
  std::unordered_map<std::string, std::size_t> child_edge;  // child -> edge index
  std::vector<std::string> receivers;
  std::vector<std::size_t> receiver_line;
  std::unordered_set<std::string> receiver_seen;
  std::vector<JoinLine> joins;

  for (const Line& line : lines) {
    const std::string& kind = line.fields[0];
    if (kind == "root") {
      expect_fields(line, 2, "root <node>");
      if (root) {
        throw ParseError(line.number,
                         "second root line (first at line " + std::to_string(root_line) + ")");
      }
      root = line.fields[1];
      root_line = line.number;
    } else if (kind == "edge") {
      expect_fields(line, 4, "edge <parent> <child> <label>");
      const std::string& parent = line.fields[1];
      const std::string& child = line.fields[2];
      const std::string& label = line.fields[3];
      if (parent == child) throw ParseError(line.number, "self loop at " + parent);
      if (auto [it, fresh] = label_line.try_emplace(label, line.number); !fresh) {
        throw ParseError(line.number, "duplicate edge label " + label + " (first at line " +
                                          std::to_string(it->second) + ")");
      }
      if (!child_edge.try_emplace(child, edges.size()).second) {
        throw ParseError(line.number, "node " + child + " has a second parent");
      }
      edges.push_back({parent, child, EdgeLabel{label}});
      edge_line.push_back(line.number);
    } else if (kind == "receiver") {
      expect_fields(line, 2, "receiver <node>");
      if (!receiver_seen.insert(line.fields[1]).second) {
        throw ParseError(line.number, "duplicate receiver " + line.fields[1]);
      }
      receivers.push_back(line.fields[1]);
      receiver_line.push_back(line.number);
    } else if (kind == "join") {
      expect_fields(line, 3, "join <receiver> <label>");
      joins.push_back({line.number, line.fields[1], line.fields[2]});
    } else {
      throw ParseError(line.number, "unknown directive '" + kind + "'");
    }
  }

  if (!root) throw ParseError(last_line, "missing root line");
  if (edges.empty()) throw ParseError(root_line, "root " + *root + " has no edges");
  if (auto it = child_edge.find(*root); it != child_edge.end()) {
    throw ParseError(edge_line[it->second], "edge into the root " + *root);
  }

  // Structure checks that need the whole edge list.
  std::unordered_map<std::string, std::vector<std::size_t>> out_edges;
  for (std::size_t k = 0; k < edges.size(); ++k) out_edges[edges[k].parent].push_back(k);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string& parent = edges[k].parent;
    if (parent != *root && !child_edge.contains(parent)) {
      throw ParseError(edge_line[k], "unknown node " + parent + " (no edge leads to it)");
    }
  }
  std::vector<char> reached(edges.size(), 0);
  std::vector<std::string> frontier{*root};
  while (!frontier.empty()) {
    const std::string v = std::move(frontier.back());
    frontier.pop_back();
    if (auto it = out_edges.find(v); it != out_edges.end()) {
      for (std::size_t k : it->second) {
        reached[k] = 1;
        frontier.push_back(edges[k].child);
      }
    }
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (!reached[k]) {
      throw ParseError(edge_line[k], "edge " + edges[k].label.id + " is not reachable from the root");
    }
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string& node = edges[k].parent;
    if (node != *root && out_edges[node].size() == 1) {
      throw ParseError(edge_line[k],
                       "relay node " + node + " has a single child; logical trees need two or more");
    }
  }
  for (std::size_t k = 0; k < receivers.size(); ++k) {
    const std::string& name = receivers[k];
    if (name == *root) throw ParseError(receiver_line[k], "the root cannot be a receiver");
    if (!child_edge.contains(name)) throw ParseError(receiver_line[k], "unknown node " + name);
    if (out_edges.contains(name)) throw ParseError(receiver_line[k], "receiver " + name + " is not a leaf");
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string& child = edges[k].child;
    if (!out_edges.contains(child) && !receiver_seen.contains(child)) {
      throw ParseError(edge_line[k], "leaf " + child + " has no receiver line");
    }
  }

  std::optional<LogicalTree> tree;
  try {
    tree.emplace(LogicalTree::from_edges(*root, edges, receivers));
  } catch (const Error& e) {
    throw ParseError(last_line, e.what());
  }
  auto config = resolve_joins(joins, *tree, last_line);
  return Topology{std::move(*tree), std::move(config)};
}

std::string serialize_topology(const LogicalTree& tree,
                               const std::optional<JoiningConfig>& config) {
  std::ostringstream out;
  out << "root " << tree.node_name(tree.root()) << '\n';
  for (NodeId v = 1; v < tree.node_count(); ++v) {
    out << "edge " << tree.node_name(tree.parent(v)) << ' ' << tree.node_name(v) << ' '
        << tree.edge_label(v).id << '\n';
  }
  for (Receiver r = 0; r < tree.receiver_count(); ++r) {
    out << "receiver " << tree.receiver_name(r) << '\n';
  }
  if (config) {
    check_joins_on_paths(tree, *config);
    for (Receiver r = 0; r < tree.receiver_count(); ++r) {
      out << "join " << tree.receiver_name(r) << ' ' << tree.edge_label(config->join(r)).id
          << '\n';
    }
  }
  return out.str();
}

JoiningConfig parse_joins(std::string_view text, const LogicalTree& tree) {
  const std::vector<Line> lines = tokenize(text);
  const std::size_t last_line = lines.empty() ? 1 : lines.back().number;
  const std::size_t n = tree.receiver_count();
  std::vector<EdgeId> edges(n, kNoNode);
  for (const Line& line : lines) {
    if (line.fields[0] != "join") {
      throw ParseError(line.number, "only join lines are allowed here");
    }
    expect_fields(line, 3, "join <receiver> <label>");
    auto r = tree.find_receiver(line.fields[1]);
    if (!r) throw ParseError(line.number, "unknown receiver " + line.fields[1]);
    if (edges[*r] != kNoNode) throw ParseError(line.number, "second join for " + line.fields[1]);
    auto e = tree.find_edge(line.fields[2]);
    if (!e) throw ParseError(line.number, "unknown edge label " + line.fields[2]);
    if (!tree.on_root_path(*e, *r)) {
      throw ParseError(line.number,
                       "join " + line.fields[2] + " is off the root path of " + line.fields[1]);
    }
    edges[*r] = *e;
  }
  for (Receiver r = 0; r < n; ++r) {
    if (edges[r] == kNoNode) {
      throw ParseError(last_line, "no join for receiver " + tree.receiver_name(r));
    }
  }
  return JoiningConfig(std::move(edges));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw std::runtime_error("error reading " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("error writing " + path);
}

Topology load_topology(const std::string& path) {
  return parse_topology(read_text_file(path));
}

}  // namespace qtomo
