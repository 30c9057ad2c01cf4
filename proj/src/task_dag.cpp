#include "eunsim/task_dag.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace eunsim {

TaskDag::TaskDag(std::vector<Subtask> nodes, std::vector<DagEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const int n = size();
  preds_.assign(static_cast<std::size_t>(n), {});
  succs_.assign(static_cast<std::size_t>(n), {});
  for (const DagEdge& e : edges_) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw DagValidationError(DagValidationError::Code::bad_structure,
                               "edge references a node that does not exist");
    }
    preds_[static_cast<std::size_t>(e.to)].push_back(e.from);
    succs_[static_cast<std::size_t>(e.from)].push_back(e.to);
  }
  for (auto& v : preds_) std::sort(v.begin(), v.end());
  for (auto& v : succs_) std::sort(v.begin(), v.end());

  for (int i = 0; i < n; ++i) {
    if (preds_[static_cast<std::size_t>(i)].empty()) {
      if (source_ < 0) source_ = i;
    }
    if (succs_[static_cast<std::size_t>(i)].empty()) {
      if (sink_ < 0) sink_ = i;
    }
  }
}

void TaskDag::validate() const {
  using Code = DagValidationError::Code;
  const int n = size();
  if (n < 2) {
    throw DagValidationError(Code::bad_structure,
                             "task graph needs at least a source and a sink");
  }
  for (const DagEdge& e : edges_) {
    if (e.from == e.to) {
      throw DagValidationError(Code::cycle_detected,
                               "self-loop on node " + std::to_string(node(e.from).id));
    }
  }

  int sources = 0, sinks = 0;
  for (int i = 0; i < n; ++i) {
    if (predecessors(i).empty()) ++sources;
    if (successors(i).empty()) ++sinks;
  }
  if (sources != 1) {
    throw DagValidationError(Code::multiple_sources,
                             "expected exactly one starting subtask, found " +
                                 std::to_string(sources));
  }
  if (sinks != 1) {
    throw DagValidationError(Code::multiple_sinks,
                             "expected exactly one terminal subtask, found " +
                                 std::to_string(sinks));
  }

  // Kahn: leftover nodes mean a cycle
  std::vector<int> indeg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) indeg[static_cast<std::size_t>(i)] = static_cast<int>(predecessors(i).size());
  std::vector<int> stack{source_};
  int seen = 0;
  std::vector<int> order;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++seen;
    for (int v : successors(u)) {
      if (--indeg[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
    }
  }
  if (seen != n) {
    throw DagValidationError(Code::cycle_detected, "task graph contains a cycle");
  }

  // every node must reach the sink and be reachable from the source
  auto reach = [&](int start, const auto& neighbours) {
    std::vector<char> vis(static_cast<std::size_t>(n), 0);
    std::vector<int> st{start};
    vis[static_cast<std::size_t>(start)] = 1;
    while (!st.empty()) {
      const int u = st.back();
      st.pop_back();
      for (int v : neighbours(u)) {
        if (!vis[static_cast<std::size_t>(v)]) {
          vis[static_cast<std::size_t>(v)] = 1;
          st.push_back(v);
        }
      }
    }
    return vis;
  };
  const auto from_source = reach(source_, [&](int u) { return successors(u); });
  const auto to_sink = reach(sink_, [&](int u) { return predecessors(u); });
  for (int i = 0; i < n; ++i) {
    if (!from_source[static_cast<std::size_t>(i)] || !to_sink[static_cast<std::size_t>(i)]) {
      throw DagValidationError(Code::orphan_node,
                               "node " + std::to_string(node(i).id) +
                                   " is not on any source-to-sink path");
    }
  }
}

std::vector<int> TaskDag::topological_order() const {
  const int n = size();
  std::vector<int> indeg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    indeg[static_cast<std::size_t>(i)] = static_cast<int>(predecessors(i).size());
  }
  // min-id-first ready set keeps the order deterministic
  std::vector<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const auto it = std::min_element(ready.begin(), ready.end());
    const int u = *it;
    ready.erase(it);
    order.push_back(u);
    for (int v : successors(u)) {
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  return order;
}

void TaskDag::propagate_data_sizes(double source_bits, double default_delta_cpb,
                                   double delta_multiplier) {
  validate();
  if (source_bits < 0.0) {
    throw std::invalid_argument("source data size must be >= 0");
  }
  for (int i : topological_order()) {
    Subtask& s = node(i);
    if (i == source_) {
      s.data_bits = source_bits;
    } else {
      double d = 0.0;
      for (int j : predecessors(i)) {
        d += node(j).data_bits * node(j).xi;
      }
      s.data_bits = d;
    }
    const double base_delta = s.delta_cpb > 0.0 ? s.delta_cpb : default_delta_cpb;
    s.cycles = s.data_bits * base_delta * delta_multiplier;
  }
  propagated_ = true;
}

// ---------------------------------------------------------------------------
// loader
// ---------------------------------------------------------------------------

TaskDag parse_dag(const std::string& text, const std::string& origin) {
  struct RawNode {
    double xi = 1.0;
    double delta = 0.0;
  };
  std::map<int, RawNode> raw;
  std::vector<std::pair<int, int>> raw_edges;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DagValidationError(DagValidationError::Code::bad_structure,
                             origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "node") {
      int id;
      if (!(ls >> id) || id <= 0) fail("node needs a positive integer id");
      if (raw.count(id)) fail("duplicate node id " + std::to_string(id));
      RawNode n;
      std::string attr;
      while (ls >> attr) {
        const auto eq = attr.find('=');
        if (eq == std::string::npos) fail("malformed attribute '" + attr + "'");
        const std::string key = attr.substr(0, eq);
        const double val = std::stod(attr.substr(eq + 1));
        if (key == "xi") {
          if (val <= 0.0 || val > 1.0) fail("xi must be in (0, 1]");
          n.xi = val;
        } else if (key == "delta") {
          if (val <= 0.0) fail("delta must be > 0");
          n.delta = val;
        } else {
          fail("unknown attribute '" + key + "'");
        }
      }
      raw[id] = n;
    } else if (kw == "edge") {
      int a, b;
      if (!(ls >> a >> b)) fail("edge needs two node ids");
      raw_edges.emplace_back(a, b);
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }

  std::map<int, int> index;
  std::vector<Subtask> nodes;
  for (const auto& [id, rn] : raw) {
    index[id] = static_cast<int>(nodes.size());
    Subtask s;
    s.id = id;
    s.xi = rn.xi;
    s.delta_cpb = rn.delta;
    nodes.push_back(s);
  }
  std::vector<DagEdge> edges;
  for (const auto& [a, b] : raw_edges) {
    if (!index.count(a) || !index.count(b)) {
      throw DagValidationError(DagValidationError::Code::bad_structure,
                               origin + ": edge references undeclared node");
    }
    edges.push_back({index[a], index[b]});
  }
  TaskDag dag(std::move(nodes), std::move(edges));
  dag.validate();
  return dag;
}

TaskDag load_dag(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open task graph file: " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dag(buf.str(), file.string());
}

namespace {

TaskDag make_dag(int n, double xi, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<Subtask> nodes;
  for (int i = 1; i <= n; ++i) {
    Subtask s;
    s.id = i;
    s.xi = xi;
    nodes.push_back(s);
  }
  std::vector<DagEdge> es;
  for (const auto& [a, b] : edges) {
    es.push_back({a - 1, b - 1});
  }
  TaskDag dag(std::move(nodes), std::move(es));
  dag.validate();
  return dag;
}

}  // namespace

TaskDag builtin_dag_phi1(double xi) {
  // source, four intermediates with a diamond, sink
  return make_dag(6, xi,
                  {{1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 6}, {5, 6}});
}

TaskDag builtin_dag_phi2(double xi) {
  // source, two intermediate layers (3 + 4), sink
  return make_dag(9, xi,
                  {{1, 2},
                   {1, 3},
                   {1, 4},
                   {2, 5},
                   {2, 6},
                   {3, 6},
                   {3, 7},
                   {4, 7},
                   {4, 8},
                   {5, 9},
                   {6, 9},
                   {7, 9},
                   {8, 9}});
}

}  // namespace eunsim
