#include "eunsim/channel_wteg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eunsim {

double distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a - b).norm();
}

bool link_exists(double d, const ChannelParams& p) {
  return d <= p.max_range_m;
}

double per_bit_delay(double d, const ChannelParams& p) {
  if (!link_exists(d, p)) {
    return kUnreachable;
  }
  const double d_eff = std::max(d, 1.0);
  const double ratio = 4.0 * M_PI * d_eff * p.carrier_hz / kSpeedOfLight;
  const double loss = ratio * ratio * p.xi_los;
  const double p_rx = p.transmit_power_w * p.gain_tx * p.gain_rx / loss;
  const double snr = p_rx / p.noise_power_w;
  const double rate = p.bandwidth_hz * std::log2(1.0 + snr);
  return 1.0 / rate;
}

SlotTopology build_slot_topology(std::span<const Eigen::Vector3d> positions,
                                 const ChannelParams& p, int slot_index) {
  const int n = static_cast<int>(positions.size());
  if (n < 1) {
    throw std::invalid_argument("slot topology needs at least one UAV");
  }
  SlotTopology t;
  t.slot = slot_index;
  t.positions.assign(positions.begin(), positions.end());
  t.dist_m = Eigen::MatrixXd::Zero(n, n);
  t.per_bit_s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(positions[i], positions[j]);
      const double w = per_bit_delay(d, p);
      t.dist_m(i, j) = t.dist_m(j, i) = d;
      t.per_bit_s(i, j) = t.per_bit_s(j, i) = w;
    }
  }
  return t;
}

double cache_delay(double slot_duration, double consumed) {
  if (consumed < 0.0 || consumed > slot_duration) {
    throw std::invalid_argument(
        "consumed slot time outside [0, slot_duration]: schedule infeasible");
  }
  return slot_duration - consumed;
}

WtegGraph WtegGraph::assemble(const SlotTopology& slot0, const SlotTopology& slot1,
                              std::span<const double> consumed,
                              double slot_duration) {
  if (slot0.uav_count() != slot1.uav_count()) {
    throw std::invalid_argument("slot topologies have different UAV counts");
  }
  if (static_cast<int>(consumed.size()) != slot0.uav_count()) {
    throw std::invalid_argument("consumed-time vector size mismatch");
  }
  WtegGraph g;
  g.n_ = slot0.uav_count();
  g.slot_dur_ = slot_duration;
  g.slot0_ = slot0;
  g.slot1_ = slot1;
  g.cache_.reserve(consumed.size());
  for (double c : consumed) {
    g.cache_.push_back(cache_delay(slot_duration, c));
  }
  return g;
}

double WtegGraph::weight(int from_idx, int to_idx, double payload_bits) const {
  const NodeRef a = node(from_idx), b = node(to_idx);
  if (a.slot == b.slot) {
    if (a.uav == b.uav) return 0.0;
    const double pb = per_bit(a.uav, b.uav, a.slot);
    if (is_unreachable(pb)) return kUnreachable;
    return payload_bits == 0.0 ? 0.0 : pb * payload_bits;
  }
  if (a.slot == 0 && b.slot == 1 && a.uav == b.uav) {
    return cache_weight(a.uav);
  }
  return kUnreachable;  // includes every slot-1 -> slot-0 pair
}

namespace {

bool lex_less(const std::vector<NodeRef>& a, const std::vector<NodeRef>& b,
              int n) {
  auto key = [n](NodeRef r) { return r.slot * n + r.uav; };
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [&](NodeRef x, NodeRef y) { return key(x) < key(y); });
}

}  // namespace

WtegGraph::PathResult WtegGraph::shortest_path(NodeRef src, NodeRef dst,
                                               double payload_bits) const {
  PathResult out;
  if (src.slot > dst.slot) {
    return out;  // temporal monotonicity: no paths back in time
  }
  const int nn = node_count();
  const int s = index(src), t = index(dst);

  // Dijkstra over <= 2N nodes carrying full paths so equal-delay ties resolve
  // to the lexicographically smallest node sequence (graphs here are tiny).
  std::vector<double> dist(static_cast<std::size_t>(nn), kUnreachable);
  std::vector<std::vector<NodeRef>> path(static_cast<std::size_t>(nn));
  std::vector<char> settled(static_cast<std::size_t>(nn), 0);
  dist[s] = 0.0;
  path[s] = {src};

  for (int round = 0; round < nn; ++round) {
    int u = -1;
    for (int i = 0; i < nn; ++i) {
      if (settled[i] || is_unreachable(dist[i])) continue;
      if (u < 0 || dist[i] < dist[u] ||
          (dist[i] == dist[u] && lex_less(path[i], path[u], n_))) {
        u = i;
      }
    }
    if (u < 0) break;
    settled[u] = 1;
    if (u == t) break;
    for (int v = 0; v < nn; ++v) {
      if (settled[v] || v == u) continue;
      const double w = weight(u, v, payload_bits);
      if (is_unreachable(w)) continue;
      const double alt = dist[u] + w;
      if (alt < dist[v] ||
          (alt == dist[v] && [&] {
             std::vector<NodeRef> cand = path[u];
             cand.push_back(node(v));
             return lex_less(cand, path[v], n_);
           }())) {
        dist[v] = alt;
        path[v] = path[u];
        path[v].push_back(node(v));
      }
    }
  }

  out.delay = dist[t];
  if (!is_unreachable(dist[t])) {
    out.nodes = path[t];
  }
  return out;
}

WtegGraph::ArrivalResult WtegGraph::earliest_arrival(NodeRef src,
                                                     double depart_time,
                                                     NodeRef dst,
                                                     double payload_bits) const {
  ArrivalResult out;
  if (src.slot > dst.slot) return out;
  const double slot_end0 = slot_dur_;
  const double slot_end1 = 2.0 * slot_dur_;
  if (src.slot == 0 && depart_time > slot_end0 + 1.0e-12) return out;
  if (depart_time > slot_end1) return out;

  const int nn = node_count();
  const int s = index(src), t = index(dst);
  std::vector<double> arr(static_cast<std::size_t>(nn), kUnreachable);
  std::vector<int> pred(static_cast<std::size_t>(nn), -1);
  std::vector<char> settled(static_cast<std::size_t>(nn), 0);
  arr[s] = depart_time;

  for (int round = 0; round < nn; ++round) {
    int u = -1;
    for (int i = 0; i < nn; ++i) {
      if (settled[i] || is_unreachable(arr[i])) continue;
      if (u < 0 || arr[i] < arr[u]) u = i;
    }
    if (u < 0) break;
    settled[u] = 1;
    if (u == t) break;
    const NodeRef un = node(u);
    const double slot_end = un.slot == 0 ? slot_end0 : slot_end1;
    for (int v = 0; v < nn; ++v) {
      if (settled[v] || v == u) continue;
      const NodeRef vn = node(v);
      double cand = kUnreachable;
      if (vn.slot == un.slot && vn.uav != un.uav) {
        const double pb = per_bit(un.uav, vn.uav, un.slot);
        if (!is_unreachable(pb)) {
          const double tx = payload_bits == 0.0 ? 0.0 : pb * payload_bits;
          // the whole transfer must fit inside the slot window
          if (arr[u] + tx <= slot_end + 1.0e-12) cand = arr[u] + tx;
        }
      } else if (un.slot == 0 && vn.slot == 1 && vn.uav == un.uav) {
        cand = slot_end0;  // buffer until the boundary
      }
      if (is_unreachable(cand)) continue;
      if (cand < arr[v] || (cand == arr[v] && pred[v] >= 0 && u < pred[v])) {
        arr[v] = cand;
        pred[v] = u;
      }
    }
  }

  if (is_unreachable(arr[t])) return out;
  out.arrival = arr[t];
  // reconstruct, collecting the cache crossings actually taken
  std::vector<int> chain;
  for (int v = t; v >= 0; v = pred[v]) {
    chain.push_back(v);
    if (v == s) break;
  }
  std::reverse(chain.begin(), chain.end());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out.nodes.push_back(node(chain[i]));
    if (i > 0) {
      const NodeRef a = node(chain[i - 1]), b = node(chain[i]);
      if (a.slot == 0 && b.slot == 1) {
        const double ready = arr[chain[i - 1]];
        out.cache_events.push_back({a.uav, ready, slot_end0 - ready});
      }
    }
  }
  return out;
}

}  // namespace eunsim
