#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hyperrate/detail/frontier.hpp"
#include "hyperrate/detail/program.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate::detail {

struct ScalarOutcome {
  Channel channel;
  double value = 0.0;
  Diagnostics diagnostics;
};

// Global scan of deterministic channels (when under the cap) followed by polishing from
// the best of them, the uniform channel and `restarts` random starts.
ScalarOutcome minimise(const Program& prog, const Objective& objective, const SolverOptions& opts,
                       std::size_t restarts);

using VertexFn = std::function<std::vector<std::array<double, 2>>(std::span<const double>)>;

struct RegionOutcome {
  std::vector<FrontierPoint> hull;  // source indexes `channels`
  std::vector<Channel> channels;
  Diagnostics diagnostics;
};

// Weighted sweep: per weight the best deterministic channel plus polished starts, then the
// lower-left hull of all resulting corner points.
RegionOutcome trace_region(const Program& prog, const VertexFn& vertices, const SolverOptions& opts);

struct BlockInfo {
  std::string name;
  std::vector<std::size_t> input_axes;
};

std::vector<TestChannel> to_test_channels(const Program& prog, const Channel& ch,
                                          const std::vector<BlockInfo>& info);

RateRegion assemble_region(const Program& prog, const RegionOutcome& out,
                           const std::vector<BlockInfo>& info, const SolverOptions& opts);

// allowed[x] = indices of edges containing x.
std::vector<std::vector<std::uint32_t>> edges_containing(const MaximalHypergraph& h);

// Scalar rate of a p2p or side_info instance over a given hypergraph.
RateResult rate_on(const ProblemInstance& inst, const MaximalHypergraph& h, const SolverOptions& opts);

}  // namespace hyperrate::detail
