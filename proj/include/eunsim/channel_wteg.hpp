#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

namespace eunsim {

// Sentinel for "no link / no path". Infinity compares exactly, so path
// comparisons never depend on an arbitrary large constant.
constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline bool is_unreachable(double w) { return std::isinf(w); }

// Air-to-air line-of-sight channel. All fields are linear SI units; dB/dBm
// inputs are converted once at configuration parse time.
struct ChannelParams {
  double transmit_power_w = 0.05;
  double gain_tx = 1.9952623149688795;  // 3 dB
  double gain_rx = 1.9952623149688795;  // 3 dB
  double carrier_hz = 2.4e9;
  double bandwidth_hz = 20.0e6;
  double noise_power_w = 1.0e-13;       // -100 dBm
  double xi_los = 1.0;                  // LoS attenuation factor, >= 1
  double max_range_m = 6000.0;

  static double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
  static double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
};

constexpr double kSpeedOfLight = 2.99792458e8;

double distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// 1 iff d <= max_range (boundary inclusive)
bool link_exists(double d, const ChannelParams& p);

// Seconds per bit over the free-space LoS link: path loss -> received power
// -> SNR -> Shannon capacity -> 1/R. Returns kUnreachable beyond max range.
// Below 1 m the far-field model diverges, so the SNR is capped at its 1 m
// value.
double per_bit_delay(double d, const ChannelParams& p);

// Per-slot snapshot: positions, pairwise distances and per-bit delays.
// Matrices are symmetric with zero diagonal; delay is kUnreachable where no
// link exists.
struct SlotTopology {
  int slot = 0;
  std::vector<Eigen::Vector3d> positions;
  Eigen::MatrixXd dist_m;
  Eigen::MatrixXd per_bit_s;

  int uav_count() const { return static_cast<int>(positions.size()); }
};

SlotTopology build_slot_topology(std::span<const Eigen::Vector3d> positions,
                                 const ChannelParams& p, int slot_index);

// Residual slot time available for buffering: slot_duration - consumed.
// Throws std::invalid_argument when consumed lies outside [0, slot_duration].
double cache_delay(double slot_duration, double consumed);

// Node of the two-slot expanded graph. slot is 0-based internally.
struct NodeRef {
  int uav = 0;
  int slot = 0;
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct CacheEvent {
  int uav = 0;
  double ready_time = 0.0;  // absolute time the data reaches the cache edge
  double delay = 0.0;       // residual wait until the slot boundary
};

// Two-slot weighted time-expanded graph: per-bit transmission edges within
// each slot, plus one virtual cache edge per UAV from slot 0 to slot 1. The
// assembled 2N x 2N matrix view has the slot-0 block upper-left, slot-1 block
// lower-right, cache delays on the upper-right diagonal and no edges from
// slot 1 back to slot 0. Immutable after assembly; concurrent queries are
// safe.
class WtegGraph {
 public:
  static WtegGraph assemble(const SlotTopology& slot0, const SlotTopology& slot1,
                            std::span<const double> consumed,
                            double slot_duration);

  int uav_count() const { return n_; }
  double slot_duration() const { return slot_dur_; }
  int node_count() const { return 2 * n_; }
  int index(NodeRef r) const { return r.slot * n_ + r.uav; }
  NodeRef node(int idx) const { return {idx % n_, idx / n_}; }

  const SlotTopology& slot(int k) const { return k == 0 ? slot0_ : slot1_; }
  double per_bit(int uav_a, int uav_b, int slot) const {
    return slot == 0 ? slot0_.per_bit_s(uav_a, uav_b) : slot1_.per_bit_s(uav_a, uav_b);
  }
  double cache_weight(int uav) const { return cache_[static_cast<std::size_t>(uav)]; }

  // Entry of the assembled matrix for a given payload: per-bit entries scale
  // with the payload, cache entries are fixed, absent edges are kUnreachable.
  double weight(int from_idx, int to_idx, double payload_bits) const;

  struct PathResult {
    double delay = kUnreachable;
    std::vector<NodeRef> nodes;
    bool reachable() const { return !is_unreachable(delay); }
  };

  // Minimum-delay path for a payload over the assembled (static) weights.
  // Between equal-delay paths the lexicographically smallest node sequence
  // wins. src == dst yields delay 0 and the single-node path.
  PathResult shortest_path(NodeRef src, NodeRef dst, double payload_bits) const;

  struct ArrivalResult {
    double arrival = kUnreachable;
    std::vector<NodeRef> nodes;
    std::vector<CacheEvent> cache_events;
    bool reachable() const { return !is_unreachable(arrival); }
  };

  // Departure-time-aware variant used by the latency evaluator: a
  // transmission must fit inside its slot window, and crossing the boundary
  // through a cache edge costs exactly the residual slot time at the moment
  // the data is ready (then releases at the boundary). Ties are broken by
  // predecessor node index.
  ArrivalResult earliest_arrival(NodeRef src, double depart_time, NodeRef dst,
                                 double payload_bits) const;

 private:
  int n_ = 0;
  double slot_dur_ = 0.0;
  SlotTopology slot0_, slot1_;
  std::vector<double> cache_;
};

}  // namespace eunsim
