#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperrate/hypergraph.hpp"
#include "hyperrate/model.hpp"
#include "hyperrate/parallel.hpp"

namespace hyperrate {

struct SolverOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
  std::size_t scalar_restarts = 16;
  std::size_t multiterminal_restarts = 32;
  std::uint64_t seed = 0;
  double enumeration_cap = 1e6;
  std::size_t weights = 33;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

// Conditional pmf from source tuples to hyperedge tuples, dense.
struct TestChannel {
  std::string name;
  std::vector<std::size_t> inputs;        // pmf axes read
  std::vector<std::size_t> input_shape;
  std::vector<std::size_t> output_shape;  // edge counts per output coordinate
  std::vector<double> probs;              // [input_flat * output_size + output_flat]
  std::vector<std::uint8_t> mask;         // 1 where every coordinate's edge contains its symbol

  std::size_t input_size() const;
  std::size_t output_size() const;
  double at(std::size_t in, std::size_t out) const { return probs[in * output_size() + out]; }
  std::vector<std::size_t> unflatten_output(std::size_t out) const;
};

struct Diagnostics {
  std::string method;            // "blahut-arimoto", "enumeration", "polish", "closed-form"
  std::size_t iterations = 0;
  double final_change = 0.0;
  std::size_t restart = 0;       // index of the winning start
  double enumerated = 0.0;       // deterministic channels scanned
  double lower_bound = 0.0;      // dual bound where one is available
};

struct RateResult {
  double rate = 0.0;
  std::vector<TestChannel> channels;
  std::vector<double> time_sharing{1.0};
  std::vector<MaximalHypergraph> hypergraphs;
  std::optional<HypergraphPair> pair;
  Diagnostics diagnostics;
};

struct RegionVertex {
  double r1 = 0.0;
  double r2 = 0.0;
  std::vector<TestChannel> channels;
};

struct RegionRow {
  double weight = 0.0;  // mu in mu*R1 + (1-mu)*R2
  double r1 = 0.0;
  double r2 = 0.0;
  double value = 0.0;
  std::size_t vertex = 0;
};

struct RateRegion {
  std::vector<RegionVertex> frontier;  // lower-left convex hull, R1 increasing
  std::vector<RegionRow> rows;         // one per weight, weight increasing
  bool closed = true;
  std::vector<MaximalHypergraph> hypergraphs;
  std::optional<HypergraphPair> pair;
  Diagnostics diagnostics;

  double min_sum_rate() const;
};

std::vector<double> weight_grid(std::size_t n);

// Restricted Blahut-Arimoto over an explicit edge list; p over symbols.
RateResult rate_over_edges(const std::vector<double>& p, const MaximalHypergraph& h,
                           const SolverOptions& opts = {});

RateResult rate_p2p(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});
RateResult rate_side_info(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});
RateResult rate_separation(const ProblemInstance& inst, double eps = 0.0);
RateResult rate_surrogate(const ProblemInstance& inst, const FunctionTable& g, double delta,
                          double eps, const SolverOptions& opts = {});
RateResult rate_lipschitz(const ProblemInstance& inst, double L, double eps,
                          const SolverOptions& opts = {});
// p2p or side_info depending on the instance.
RateResult rate_scalar(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});

RateResult sum_rate_distributed(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});
RateRegion region_distributed(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});
RateRegion region_independent(const ProblemInstance& inst, double eps, const SolverOptions& opts = {});
RateRegion region_mdc(const ProblemInstance& inst, double eps0, double eps1, double eps2,
                      const SolverOptions& opts = {});
RateRegion region_successive_refinement(const ProblemInstance& inst, double eps0, double eps1,
                                        const SolverOptions& opts = {});
RateRegion region_cascade(const ProblemInstance& inst, double eps1, double eps2,
                          const SolverOptions& opts = {});

struct CurvePoint {
  double eps = 0.0;
  double rate = 0.0;
  std::string fingerprint;
  std::string edges;
};

struct Curve {
  std::vector<CurvePoint> points;  // eps increasing
  std::vector<double> breakpoints;
};

Curve sweep_curve(const ProblemInstance& inst, std::vector<double> eps_list,
                  const SolverOptions& opts = {});

}  // namespace hyperrate
