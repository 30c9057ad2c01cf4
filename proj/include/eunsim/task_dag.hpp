#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace eunsim {

// One subtask: input data size D (bits), required CPU cycles C, data scaling
// factor xi in (0,1]. delta = C/D (cycles/bit) is the computation complexity;
// C is resolved as delta * D after data sizes have been propagated.
struct Subtask {
  int id = 0;                  // 1-based external id
  double data_bits = 0.0;      // D_i, filled by propagate_data_sizes
  double cycles = 0.0;         // C_i = delta_i * D_i
  double xi = 1.0;             // data scaling factor
  double delta_cpb = 0.0;      // cycles per bit; 0 means "use the task default"
};

struct DagEdge {
  int from = 0;  // node indices (0-based)
  int to = 0;
};

class DagValidationError : public std::runtime_error {
 public:
  enum class Code {
    cycle_detected,
    multiple_sources,
    multiple_sinks,
    orphan_node,
    bad_structure,
  };
  DagValidationError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Directed acyclic task graph with a unique source (index 0 after
// normalization) and a unique sink (last index). Every node must lie on some
// source-to-sink path.
class TaskDag {
 public:
  TaskDag(std::vector<Subtask> nodes, std::vector<DagEdge> edges);

  // Structural checks: acyclicity, unique source/sink, full connectivity.
  // Throws DagValidationError; cheap enough to call from loaders.
  void validate() const;

  int size() const { return static_cast<int>(nodes_.size()); }
  int source() const { return source_; }
  int sink() const { return sink_; }
  const Subtask& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  Subtask& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<DagEdge>& edges() const { return edges_; }
  const std::vector<int>& predecessors(int i) const {
    return preds_[static_cast<std::size_t>(i)];
  }
  const std::vector<int>& successors(int i) const {
    return succs_[static_cast<std::size_t>(i)];
  }

  // Deterministic topological order (Kahn, ties by node id).
  std::vector<int> topological_order() const;

  // Assigns D over the graph: the source gets source_bits, every other node
  // the sum over predecessors of D_j * xi_j. Also resolves C_i from delta
  // (per-node override or default_delta) once D_i is known. Requires a
  // validated dag.
  void propagate_data_sizes(double source_bits, double default_delta_cpb,
                            double delta_multiplier = 1.0);

  bool propagated() const { return propagated_; }

 private:
  std::vector<Subtask> nodes_;
  std::vector<DagEdge> edges_;
  std::vector<std::vector<int>> preds_, succs_;
  int source_ = -1;
  int sink_ = -1;
  bool propagated_ = false;
};

// Text format, one directive per line:
//   node <id> xi=<float> [delta=<float>]
//   edge <from-id> <to-id>
// '#' starts a comment. Node ids are arbitrary positive integers; they are
// mapped to dense indices in id order. The loader validates on read.
TaskDag load_dag(const std::filesystem::path& file);
TaskDag parse_dag(const std::string& text, const std::string& origin = "<string>");

// Shipped example graphs: a 6-subtask graph with a diamond in the middle, and
// a 9-subtask graph with two intermediate layers.
TaskDag builtin_dag_phi1(double xi = 0.8);
TaskDag builtin_dag_phi2(double xi = 0.8);

}  // namespace eunsim
