#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gwla/rng.hpp"

namespace gwla {

/// Per-replica sampled hyperparameters. Draw order is fixed (entropy cost,
/// learning rate, embedding std) so a seeded stream replays identically.
struct ReplicaHypers {
  double entropy_cost = 0;
  double start_lr = 0;
  double embed_std = 0;
};

inline ReplicaHypers sample_replica_hyperparameters(RngStream& rng) {
  ReplicaHypers h;
  h.entropy_cost = rng.uniform(0.0005, 0.005);
  h.start_lr = rng.log_uniform(0.0001, 0.002);
  h.embed_std = rng.uniform(0.5, 1.0);
  return h;
}

struct ReplicaReport {
  ReplicaHypers hypers;
  std::vector<double> curve;  // learning-curve samples, shared cadence
  double final_score = 0;
};

struct ReplicaSummary {
  std::vector<double> mean;
  std::vector<double> stderr_;  // sample sd / sqrt(n)
  std::vector<size_t> selected;
  bool underfull = false;  // fewer than 5 reports were available
};

/// Pointwise mean +- standard error over the five replicas with the highest
/// final score (all of them, flagged, when fewer than five exist). Curves
/// are truncated to the shortest selected length.
inline ReplicaSummary summarize_replicas(const std::vector<ReplicaReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("summarize_replicas: no reports");
  ReplicaSummary out;
  std::vector<size_t> order(reports.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return reports[a].final_score > reports[b].final_score;
  });
  size_t take = std::min<size_t>(5, order.size());
  out.underfull = order.size() < 5;
  out.selected.assign(order.begin(), order.begin() + take);

  size_t len = reports[out.selected[0]].curve.size();
  for (size_t i : out.selected) len = std::min(len, reports[i].curve.size());
  out.mean.resize(len);
  out.stderr_.resize(len);
  for (size_t t = 0; t < len; ++t) {
    double m = 0;
    for (size_t i : out.selected) m += reports[i].curve[t];
    m /= static_cast<double>(take);
    double sq = 0;
    for (size_t i : out.selected) {
      double d = reports[i].curve[t] - m;
      sq += d * d;
    }
    double sd = take > 1 ? std::sqrt(sq / static_cast<double>(take - 1)) : 0.0;
    out.mean[t] = m;
    out.stderr_[t] = sd / std::sqrt(static_cast<double>(take));
  }
  return out;
}

}  // namespace gwla
