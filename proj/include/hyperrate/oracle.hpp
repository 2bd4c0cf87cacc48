#pragma once

// Brute-force cross-checks. Nothing here calls the solver or the hypergraph builder.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hyperrate/geometry.hpp"
#include "hyperrate/hypergraph.hpp"
#include "hyperrate/markov.hpp"
#include "hyperrate/model.hpp"
#include "hyperrate/parallel.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate {

struct GridSpec {
  std::size_t m = 60;         // probabilities in multiples of 1/m
  std::size_t aux_cap = 0;    // auxiliary alphabet size; 0 means |X_i|
  double budget = 2e7;        // candidate evaluations
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

// Exact SEC radius by trying every support set of at most d+1 points.
double brute_radius(const std::vector<Point>& points);

MaximalHypergraph brute_maximal_edges(const ProblemInstance& inst, double eps);

struct GridResult {
  double value = 0.0;      // best objective found (an achievable rate)
  double lower = 0.0;      // certified lower bound on the true minimum
  double tolerance = 0.0;  // certified distance bound between value and the minimum
  double evaluated = 0.0;
  std::size_t m = 0;
};

// p2p/markov: grid over the edge marginal q; the optimal channel for a fixed q is q
// restricted to the edges containing x, and every q yields a dual lower bound.
// side_info: grid over channel rows, tolerance from entropy continuity.
GridResult grid_min_rate(const ProblemInstance& inst, double eps, const GridSpec& grid = {});

// Same q-grid for an explicit source pmf and edge lists.
GridResult grid_restricted(const std::vector<double>& p, const std::vector<std::vector<std::uint32_t>>& edges_of,
                           std::size_t edge_count, const GridSpec& grid);

// Per-type q-grid on the k-letter supersymbol problem; value/lower are per-symbol rates.
GridResult grid_ktile_rate(const MarkovModel& m, int k, const GridSpec& grid = {});

// Decoder that sees some channel output coordinates plus some source axes.
struct Decoder {
  std::size_t function = 0;
  double eps = 0.0;
  std::vector<std::size_t> sees;  // output coordinates, numbered across channels in order
  std::vector<std::size_t> side;  // pmf axes
  // observation (seen outputs, then side values) -> reconstruction; empty means SEC centers.
  std::map<std::vector<std::size_t>, Point> table;
};

struct Audit {
  bool ok = true;
  std::string failure;
  explicit operator bool() const { return ok; }
};

// Every tuple with positive probability under source x channels must be reconstructed
// within eps + 1e-9, and channels must put no mass outside their masks.
Audit verify_zero_distortion(const ProblemInstance& inst, const std::vector<TestChannel>& channels,
                             const std::vector<Decoder>& decoders);

// Solver outputs with the decoders their hypergraphs imply. eps is the target tolerance
// for function 0 (scalar and sum-rate results).
Audit verify_zero_distortion(const ProblemInstance& inst, const RateResult& r, double eps);
Audit verify_zero_distortion(const ProblemInstance& inst, const RateRegion& r);

struct AuxResult {
  double value = 0.0;        // best sum (or scalar) rate over feasible grid channels
  double certificate = 0.0;  // entropy-continuity bound for the grid, reported only
  double evaluated = 0.0;
  std::size_t m = 0;
  std::vector<std::size_t> aux_sizes;
  bool found = false;
};

// Grid-quantized general auxiliaries with SEC-center reconstruction.
// distributed: min I(X1X2;U1U2) over p(u1|x1)p(u2|x2). p2p / side_info: min I(X;U|Y).
double aux_search_count(const ProblemInstance& inst, const GridSpec& grid);
AuxResult general_aux_search(const ProblemInstance& inst, double eps, const GridSpec& grid = {});

}  // namespace hyperrate
