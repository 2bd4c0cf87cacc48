#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperrate::detail {

struct BaResult {
  std::vector<double> q;  // edge marginal
  double rate = 0.0;      // I(X;W) of the channel q_w / Q_x
  double upper = 0.0;     // -sum p log Q
  double lower = 0.0;     // dual bound
  std::size_t iterations = 0;
  double last_change = 0.0;
};

// min I(X;W) with p(w|x) > 0 only for w in edges_of[x].
BaResult restricted_ba(std::span<const double> p, const std::vector<std::vector<std::uint32_t>>& edges_of,
                       std::size_t edge_count, double tolerance, std::size_t max_iterations);

// p(w|x) = q_w / Q_x over edges_of[x], flattened per x in edges_of order.
std::vector<double> ba_channel(std::span<const double> q,
                               const std::vector<std::vector<std::uint32_t>>& edges_of);

}  // namespace hyperrate::detail
