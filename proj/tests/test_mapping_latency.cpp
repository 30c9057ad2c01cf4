#include <doctest.h>

#include "eunsim/mapping_latency.hpp"
#include "oracle_helpers.hpp"

using namespace eunsim;

namespace {

const ChannelParams kDefaults;

// N UAVs in a line, spacing apart_m, same height
WtegGraph line_graph(int n, double apart_m, double slot = 4.0) {
  std::vector<Eigen::Vector3d> pos;
  for (int i = 0; i < n; ++i) pos.emplace_back(apart_m * i, 0.0, 450.0);
  const std::vector<double> consumed(static_cast<std::size_t>(n), 0.0);
  return WtegGraph::assemble(build_slot_topology(pos, kDefaults, 0),
                             build_slot_topology(pos, kDefaults, 1), consumed,
                             slot);
}

TaskDag chain_dag(int n, double xi = 0.8) {
  std::vector<Subtask> nodes;
  for (int i = 1; i <= n; ++i) {
    Subtask s;
    s.id = i;
    s.xi = xi;
    nodes.push_back(s);
  }
  std::vector<DagEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  TaskDag dag(std::move(nodes), std::move(edges));
  dag.validate();
  return dag;
}

FleetCompute uniform_fleet(int n, double hz) {
  FleetCompute f;
  f.capacity_hz.assign(static_cast<std::size_t>(n), hz);
  return f;
}

}  // namespace

TEST_CASE("decision matrix decode") {
  TaskDag dag = chain_dag(3);
  const int n = 3;

  SUBCASE("valid single-slot mapping") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(2, 2, 0, true);
    const DecodeResult r = decode_mapping(x, dag);
    REQUIRE(r.ok());
    CHECK(r.assignment[0].uav == 0);
    CHECK_FALSE(r.assignment[0].cross_slot);
    CHECK(r.assignment[2].uav == 2);
  }

  SUBCASE("cross-slot replica accepted for an intermediate") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(1, 1, 1, true);
    x.set(2, 2, 1, true);
    const DecodeResult r = decode_mapping(x, dag);
    REQUIRE(r.ok());
    CHECK(r.assignment[1].cross_slot);
    CHECK(r.assignment[1].start() == NodeRef{1, 0});
    CHECK(r.assignment[1].end() == NodeRef{1, 1});
  }

  SUBCASE("empty row") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(2, 2, 0, true);
    const DecodeResult r = decode_mapping(x, dag);
    CHECK(r.error == MappingError::row_sum_invalid);
    CHECK(r.error_row == 1);
  }

  SUBCASE("three replicas") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(1, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(1, 1, 1, true);
    x.set(2, 2, 0, true);
    CHECK(decode_mapping(x, dag).error == MappingError::row_sum_invalid);
  }

  SUBCASE("replicas on different UAVs") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(1, 2, 1, true);
    x.set(2, 2, 0, true);
    CHECK(decode_mapping(x, dag).error == MappingError::replica_not_same_uav);
  }

  SUBCASE("start anchor violations") {
    DecisionMatrix x(3, n);
    x.set(0, 1, 0, true);  // wrong UAV
    x.set(1, 1, 0, true);
    x.set(2, 2, 0, true);
    CHECK(decode_mapping(x, dag).error == MappingError::start_anchor);

    DecisionMatrix y(3, n);
    y.set(0, 0, 1, true);  // wrong slot
    y.set(1, 1, 0, true);
    y.set(2, 2, 0, true);
    CHECK(decode_mapping(y, dag).error == MappingError::start_anchor);
  }

  SUBCASE("terminal anchor violation") {
    DecisionMatrix x(3, n);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(2, 1, 0, true);  // sink must sit on the receiver
    CHECK(decode_mapping(x, dag).error == MappingError::terminal_anchor);
  }
}

TEST_CASE("edge mapping against the brute-force path oracle") {
  const WtegGraph g = line_graph(3, 4000.0);
  TaskDag dag = chain_dag(3);
  dag.propagate_data_sizes(2.0e6, 237.5);

  SUBCASE("co-located producer and consumer have a trivial path") {
    std::vector<ReplicaSet> b{{0, 0, false}, {0, 0, false}, {2, 0, false}};
    const auto paths = map_edges(b, dag, g);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].path.delay == 0.0);
    CHECK(paths[0].path.nodes.size() == 1);
  }

  SUBCASE("cross-slot handover on one UAV is the single cache edge") {
    std::vector<ReplicaSet> b{{0, 0, false}, {1, 0, false}, {2, 1, false}};
    const auto paths = map_edges(b, dag, g);
    // edge 1 -> 2 goes from u1 slot 0 to u2 slot 1... via relay or cache;
    // check the oracle agrees on whatever is cheapest
    const auto want = oracle::enumerate_shortest_path(
        g, {1, 0}, {2, 1}, dag.node(1).data_bits * dag.node(1).xi);
    CHECK(paths[1].path.delay == want.cost);
    CHECK(paths[1].path.nodes == want.nodes);
  }

  SUBCASE("random instances match the enumeration oracle") {
    Rng rng(123);
    for (int round = 0; round < 50; ++round) {
      const WtegGraph wg = oracle::random_wteg(rng, 3);
      TaskDag d = chain_dag(3);
      d.propagate_data_sizes(rng.uniform(0.0, 5.0e6), 237.5);
      std::vector<ReplicaSet> b;
      b.push_back({0, 0, rng.uniform01() < 0.3});
      b.push_back({static_cast<int>(rng.uniform_int(3)),
                   static_cast<int>(rng.uniform_int(2)), false});
      b.push_back({2, static_cast<int>(rng.uniform_int(2)), false});
      const auto paths = map_edges(b, d, wg);
      for (const EdgePath& ep : paths) {
        const double payload = d.node(ep.from).data_bits * d.node(ep.from).xi;
        const auto want = oracle::enumerate_shortest_path(
            wg, b[static_cast<std::size_t>(ep.from)].end(),
            b[static_cast<std::size_t>(ep.to)].start(), payload);
        if (is_unreachable(want.cost)) {
          CHECK_FALSE(ep.path.reachable());
        } else {
          CHECK(ep.path.delay == want.cost);
        }
      }
    }
  }
}

TEST_CASE("latency evaluation") {
  SUBCASE("two-subtask chain on a single UAV, no transmission") {
    // 1 GHz, 1 Mb source, table delta and xi
    const WtegGraph g = line_graph(1, 0.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const FleetCompute fleet = uniform_fleet(1, 1.0e9);

    DecisionMatrix x(2, 1);
    x.set(0, 0, 0, true);
    x.set(1, 0, 0, true);
    const ScheduleEvaluation ev = compute_latency(x, dag, g, fleet);
    REQUIRE(ev.feasible);
    CHECK(ev.per_subtask[0].t_comp == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(ev.per_subtask[1].t_comp == doctest::Approx(0.152).epsilon(1e-12));
    CHECK(ev.total == doctest::Approx(0.342).epsilon(1e-12));
    // no transmission anywhere
    for (const EvaluatedEdge& e : ev.edge_paths) {
      CHECK(e.arrive == e.depart);
    }
  }

  SUBCASE("single predecessor: accumulation degenerates to that branch") {
    const WtegGraph g = line_graph(2, 1000.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const FleetCompute fleet = uniform_fleet(2, 1.0e9);
    DecisionMatrix x(2, 2);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    const ScheduleEvaluation ev = compute_latency(x, dag, g, fleet);
    REQUIRE(ev.feasible);
    const double tx = per_bit_delay(1000.0, kDefaults) * 0.8e6;
    CHECK(ev.per_subtask[1].t_accu ==
          doctest::Approx(ev.per_subtask[0].t_total + tx).epsilon(1e-12));
  }

  SUBCASE("forced cross-slot replica adds exactly the residual cache delay") {
    const WtegGraph g = line_graph(2, 1000.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const FleetCompute fleet = uniform_fleet(2, 1.0e9);

    DecisionMatrix base(2, 2);
    base.set(0, 0, 0, true);
    base.set(1, 1, 0, true);
    const ScheduleEvaluation ev0 = compute_latency(base, dag, g, fleet);

    DecisionMatrix crossed(2, 2);
    crossed.set(0, 0, 0, true);
    crossed.set(0, 0, 1, true);  // source holds a slot-2 replica
    crossed.set(1, 1, 1, true);
    const ScheduleEvaluation ev1 = compute_latency(crossed, dag, g, fleet);
    REQUIRE(ev0.feasible);
    REQUIRE(ev1.feasible);
    // the handover waits for the boundary: residual = slot - t_comp(source)
    const double residual = 4.0 - ev0.per_subtask[0].t_total;
    CHECK(ev1.total - ev0.total == doctest::Approx(residual).epsilon(1e-9));
    REQUIRE(!ev1.cache_events.empty());
    CHECK(ev1.cache_events[0].delay == doctest::Approx(residual).epsilon(1e-9));
  }

  SUBCASE("additivity invariant holds everywhere") {
    Rng rng(9);
    for (int round = 0; round < 40; ++round) {
      const WtegGraph g = oracle::random_wteg(rng, 3);
      TaskDag dag = oracle::random_dag(rng, 4);
      dag.propagate_data_sizes(rng.uniform(0.0, 4.0e6), 237.5);
      const FleetCompute fleet = oracle::random_fleet(rng, 3);
      const EnumerationResult all = enumerate_feasible(dag, g, fleet);
      for (std::size_t i = 0; i < all.evaluations.size(); ++i) {
        const ScheduleEvaluation& ev = all.evaluations[i];
        if (!ev.feasible) continue;
        for (const SubtaskTiming& st : ev.per_subtask) {
          CHECK(st.t_total - st.t_accu == doctest::Approx(st.t_comp).epsilon(1e-12));
        }
      }
    }
  }

  SUBCASE("infeasible when the graph is disconnected") {
    const WtegGraph g = line_graph(2, 7000.0);  // out of range
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const FleetCompute fleet = uniform_fleet(2, 1.0e9);
    DecisionMatrix x(2, 2);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    const ScheduleEvaluation ev = compute_latency(x, dag, g, fleet);
    CHECK_FALSE(ev.feasible);
    CHECK(ev.reason == InfeasibleReason::unreachable_edge);
  }

  SUBCASE("slot overrun demands a declared replica") {
    const WtegGraph g = line_graph(2, 1000.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(22.0e6, 237.5);  // source alone takes ~4.2 s
    const FleetCompute fleet = uniform_fleet(2, 1.0e9);
    DecisionMatrix x(2, 2);
    x.set(0, 0, 0, true);
    x.set(1, 1, 1, true);
    const ScheduleEvaluation bad = compute_latency(x, dag, g, fleet);
    CHECK_FALSE(bad.feasible);
    CHECK(bad.reason == InfeasibleReason::slot_overrun);
    CHECK(bad.offending_subtask == 0);

    x.set(0, 0, 1, true);  // declare the straddle
    const ScheduleEvaluation good = compute_latency(x, dag, g, fleet);
    REQUIRE(good.feasible);
    CHECK(good.per_subtask[0].t_total > 4.0);
  }

  SUBCASE("horizon overrun is infeasible") {
    const WtegGraph g = line_graph(2, 1000.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(60.0e6, 237.5);  // way past 8 s
    const FleetCompute fleet = uniform_fleet(2, 1.0e9);
    DecisionMatrix x(2, 2);
    x.set(0, 0, 0, true);
    x.set(0, 0, 1, true);
    x.set(1, 1, 1, true);
    const ScheduleEvaluation ev = compute_latency(x, dag, g, fleet);
    CHECK_FALSE(ev.feasible);
    CHECK(ev.reason == InfeasibleReason::horizon_overrun);
  }

  SUBCASE("monotone in source size and capacity") {
    const WtegGraph g = line_graph(3, 2000.0);
    DecisionMatrix x(3, 3);
    x.set(0, 0, 0, true);
    x.set(1, 1, 0, true);
    x.set(2, 2, 0, true);
    double prev = -1.0;
    for (double mb = 0.5; mb <= 2.5; mb += 0.5) {
      TaskDag dag = chain_dag(3, 0.8);
      dag.propagate_data_sizes(mb * 1.0e6, 237.5);
      const ScheduleEvaluation ev =
          compute_latency(x, dag, g, uniform_fleet(3, 1.0e9));
      REQUIRE(ev.feasible);
      CHECK(ev.total >= prev);
      prev = ev.total;
    }
    TaskDag dag = chain_dag(3, 0.8);
    dag.propagate_data_sizes(2.0e6, 237.5);
    const double slow = compute_latency(x, dag, g, uniform_fleet(3, 0.6e9)).total;
    const double fast = compute_latency(x, dag, g, uniform_fleet(3, 1.2e9)).total;
    CHECK(fast < slow);
  }
}

TEST_CASE("exhaustive enumeration") {
  SUBCASE("two subtasks, two UAVs: option count by hand") {
    // source: rooted placements {slot1} or {slot1+replica} -> 2
    // sink on the receiver: {slot1}, {slot1+replica}, {slot2} -> 3
    const WtegGraph g = line_graph(2, 1000.0);
    TaskDag dag = chain_dag(2, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const EnumerationResult all =
        enumerate_feasible(dag, g, uniform_fleet(2, 1.0e9));
    CHECK(all.matrices.size() == 6);
    CHECK(all.best_index >= 0);
  }

  SUBCASE("every enumerated matrix decodes cleanly") {
    Rng rng(31);
    const WtegGraph g = oracle::random_wteg(rng, 3);
    TaskDag dag = oracle::random_dag(rng, 4);
    dag.propagate_data_sizes(1.0e6, 237.5);
    const EnumerationResult all =
        enumerate_feasible(dag, g, oracle::random_fleet(rng, 3));
    for (const DecisionMatrix& x : all.matrices) {
      CHECK(decode_mapping(x, dag).ok());
    }
  }

  SUBCASE("size guard") {
    const WtegGraph g = line_graph(4, 1000.0);
    TaskDag dag = chain_dag(6, 0.8);
    dag.propagate_data_sizes(1.0e6, 237.5);
    CHECK_THROWS_AS(enumerate_feasible(dag, g, uniform_fleet(4, 1.0e9)),
                    std::invalid_argument);
  }
}

TEST_CASE("two-oracle cross-check on enumerable instances") {
  Rng rng(20260808);
  int compared = 0;
  for (int round = 0; round < 25; ++round) {
    const int n = 2 + static_cast<int>(rng.uniform_int(2));
    const int l = 3 + static_cast<int>(rng.uniform_int(2));
    const WtegGraph g = oracle::random_wteg(rng, n);
    TaskDag dag = oracle::random_dag(rng, l);
    dag.propagate_data_sizes(rng.uniform(0.0, 5.0e6), 237.5,
                             rng.uniform(0.5, 1.5));
    const FleetCompute fleet = oracle::random_fleet(rng, n);
    const EnumerationResult all = enumerate_feasible(dag, g, fleet);
    for (std::size_t i = 0; i < all.matrices.size(); ++i) {
      const ScheduleEvaluation& ev = all.evaluations[i];
      const oracle::OracleEval want =
          oracle::oracle_latency(all.matrices[i], dag, g, fleet);
      CHECK(ev.feasible == want.feasible);
      if (ev.feasible) {
        CHECK(std::abs(ev.total - want.total) <=
              1e-12 * std::max(1.0, std::abs(want.total)));
        for (int s = 0; s < dag.size(); ++s) {
          CHECK(std::abs(ev.per_subtask[static_cast<std::size_t>(s)].t_total -
                         want.finish[static_cast<std::size_t>(s)]) <=
                1e-12 * std::max(1.0, want.finish[static_cast<std::size_t>(s)]));
        }
        ++compared;
      }
    }
  }
  CHECK(compared > 500);
}
