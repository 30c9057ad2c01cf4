#include <doctest.h>

#include "eunsim/task_dag.hpp"

using namespace eunsim;

namespace {

TaskDag chain(int n, double xi = 0.8) {
  std::vector<Subtask> nodes;
  for (int i = 1; i <= n; ++i) {
    Subtask s;
    s.id = i;
    s.xi = xi;
    nodes.push_back(s);
  }
  std::vector<DagEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return TaskDag(std::move(nodes), std::move(edges));
}

}  // namespace

TEST_CASE("validation") {
  SUBCASE("two-node chain is fine") { CHECK_NOTHROW(chain(2).validate()); }

  SUBCASE("self-loop is a cycle") {
    std::vector<Subtask> nodes(2);
    nodes[0].id = 1;
    nodes[1].id = 2;
    TaskDag dag(std::move(nodes), {{0, 1}, {1, 1}});
    CHECK_THROWS_AS(dag.validate(), DagValidationError);
    try {
      dag.validate();
    } catch (const DagValidationError& e) {
      CHECK(e.code() == DagValidationError::Code::cycle_detected);
    }
  }

  SUBCASE("longer cycle is caught") {
    std::vector<Subtask> nodes(4);
    for (int i = 0; i < 4; ++i) nodes[static_cast<std::size_t>(i)].id = i + 1;
    TaskDag dag(std::move(nodes), {{0, 1}, {1, 2}, {2, 1}, {2, 3}});
    CHECK_THROWS_AS(dag.validate(), DagValidationError);
  }

  SUBCASE("two sources") {
    std::vector<Subtask> nodes(3);
    for (int i = 0; i < 3; ++i) nodes[static_cast<std::size_t>(i)].id = i + 1;
    TaskDag dag(std::move(nodes), {{0, 2}, {1, 2}});
    try {
      dag.validate();
      FAIL("expected a validation error");
    } catch (const DagValidationError& e) {
      CHECK(e.code() == DagValidationError::Code::multiple_sources);
    }
  }

  SUBCASE("two sinks") {
    std::vector<Subtask> nodes(3);
    for (int i = 0; i < 3; ++i) nodes[static_cast<std::size_t>(i)].id = i + 1;
    TaskDag dag(std::move(nodes), {{0, 1}, {0, 2}});
    try {
      dag.validate();
      FAIL("expected a validation error");
    } catch (const DagValidationError& e) {
      CHECK(e.code() == DagValidationError::Code::multiple_sinks);
    }
  }

  SUBCASE("shipped graphs validate") {
    CHECK_NOTHROW(builtin_dag_phi1().validate());
    CHECK_NOTHROW(builtin_dag_phi2().validate());
    CHECK(builtin_dag_phi1().size() == 6);
    CHECK(builtin_dag_phi2().size() == 9);
  }
}

TEST_CASE("data size propagation") {
  SUBCASE("single-predecessor scaling") {
    TaskDag dag = chain(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    CHECK(dag.node(1).data_bits == doctest::Approx(0.8e6).epsilon(1e-15));
  }

  SUBCASE("two predecessors sum their scaled outputs") {
    std::vector<Subtask> nodes(4);
    for (int i = 0; i < 4; ++i) {
      nodes[static_cast<std::size_t>(i)].id = i + 1;
      nodes[static_cast<std::size_t>(i)].xi = 0.8;
    }
    TaskDag dag(std::move(nodes), {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    dag.propagate_data_sizes(1.0e6, 237.5);
    // each middle node carries 0.8 Mb, the join gets 2 * 0.8 * 0.8
    CHECK(dag.node(1).data_bits == doctest::Approx(0.8e6));
    CHECK(dag.node(3).data_bits == doctest::Approx(1.28e6));
  }

  SUBCASE("xi = 1 conserves data along a chain") {
    TaskDag dag = chain(5, 1.0);
    dag.propagate_data_sizes(2.5e6, 237.5);
    for (int i = 0; i < dag.size(); ++i) {
      CHECK(dag.node(i).data_bits == 2.5e6);
    }
  }

  SUBCASE("cycles resolve from delta after propagation") {
    TaskDag dag = chain(3, 0.8);
    dag.propagate_data_sizes(1.0e6, 200.0, 1.5);
    for (int i = 0; i < dag.size(); ++i) {
      CHECK(dag.node(i).cycles ==
            doctest::Approx(dag.node(i).data_bits * 300.0).epsilon(1e-12));
    }
  }

  SUBCASE("per-node delta override wins") {
    std::vector<Subtask> nodes(2);
    nodes[0].id = 1;
    nodes[0].xi = 1.0;
    nodes[1].id = 2;
    nodes[1].xi = 1.0;
    nodes[1].delta_cpb = 500.0;
    TaskDag dag(std::move(nodes), {{0, 1}});
    dag.propagate_data_sizes(1.0e6, 237.5);
    CHECK(dag.node(0).cycles == doctest::Approx(237.5e6));
    CHECK(dag.node(1).cycles == doctest::Approx(500.0e6));
  }
}

TEST_CASE("topological order") {
  SUBCASE("chain keeps natural order") {
    const TaskDag dag = chain(5);
    const std::vector<int> want{0, 1, 2, 3, 4};
    CHECK(dag.topological_order() == want);
  }

  SUBCASE("every edge goes forward, source first and sink last") {
    const TaskDag dag = builtin_dag_phi2();
    const auto order = dag.topological_order();
    std::vector<int> position(static_cast<std::size_t>(dag.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
      position[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    }
    for (const DagEdge& e : dag.edges()) {
      CHECK(position[static_cast<std::size_t>(e.from)] <
            position[static_cast<std::size_t>(e.to)]);
    }
    CHECK(order.front() == dag.source());
    CHECK(order.back() == dag.sink());
  }

  SUBCASE("diamond breaks ties by id") {
    std::vector<Subtask> nodes(4);
    for (int i = 0; i < 4; ++i) nodes[static_cast<std::size_t>(i)].id = i + 1;
    TaskDag dag(std::move(nodes), {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    const std::vector<int> want{0, 1, 2, 3};
    CHECK(dag.topological_order() == want);
  }
}

TEST_CASE("propagation is order-invariant") {
  // relabel the diamond so insertion order differs from topological order;
  // the propagated sizes must not care
  std::vector<Subtask> nodes(4);
  const int ids[4] = {4, 2, 3, 1};
  for (int i = 0; i < 4; ++i) {
    nodes[static_cast<std::size_t>(i)].id = ids[i];
    nodes[static_cast<std::size_t>(i)].xi = 0.5;
  }
  // edges by index: 3 is the source (id 1), 0 the sink (id 4)
  TaskDag dag(std::move(nodes), {{3, 1}, {3, 2}, {1, 0}, {2, 0}});
  dag.propagate_data_sizes(8.0e6, 100.0);
  CHECK(dag.node(3).data_bits == 8.0e6);
  CHECK(dag.node(1).data_bits == 4.0e6);
  CHECK(dag.node(2).data_bits == 4.0e6);
  CHECK(dag.node(0).data_bits == 4.0e6);  // 2 * 4 Mb * 0.5
}

TEST_CASE("dag file loader") {
  SUBCASE("round trip through the text format") {
    const std::string text = R"(# demo
node 1 xi=0.8
node 2 xi=0.5 delta=300
node 3 xi=1.0
edge 1 2
edge 1 3
edge 2 3
)";
    TaskDag dag = parse_dag(text);
    CHECK(dag.size() == 3);
    CHECK(dag.node(1).xi == 0.5);
    CHECK(dag.node(1).delta_cpb == 300.0);
    dag.propagate_data_sizes(1.0e6, 100.0);
    CHECK(dag.node(2).data_bits == doctest::Approx(1.2e6));
  }

  SUBCASE("bad input is rejected with location info") {
    CHECK_THROWS_AS(parse_dag("node 1 xi=2.0\n"), DagValidationError);
    CHECK_THROWS_AS(parse_dag("node 1 xi=0.5\nedge 1 7\n"), DagValidationError);
    CHECK_THROWS_AS(parse_dag("frobnicate\n"), DagValidationError);
    CHECK_THROWS_AS(parse_dag("node 1 xi=0.5\nnode 1 xi=0.5\n"),
                    DagValidationError);
  }
}
