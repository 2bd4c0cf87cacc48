#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hyperrate/hypergraph.hpp"
#include "hyperrate/model.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate {

using Matrix = std::vector<std::vector<double>>;

inline constexpr double kSupersymbolCap = 1e4;

// Unique stationary law of an irreducible chain. Aperiodicity is checked unless waived
// (a periodic irreducible chain still has a unique stationary law).
std::vector<double> stationary(const Matrix& P, bool require_aperiodic = true);

struct MarkovModel {
  ProblemInstance instance;  // markov setting; pmf is the stationary law

  const Matrix& transition() const { return instance.markov->transition; }
  const std::vector<double>& pi() const { return instance.pmf.probs(); }
  std::size_t states() const { return instance.pmf.shape()[0]; }
  double eps() const { return instance.tolerance(); }
  int k() const { return instance.markov->k; }
};

MarkovModel markov_model(const ProblemInstance& inst, bool require_aperiodic = true);
// States labelled 1..n with f(x) = values[x].
MarkovModel markov_model(const Matrix& P, const std::vector<double>& values, double eps, int k = 1,
                         bool require_aperiodic = true);
MarkovModel with_eps(const MarkovModel& m, double eps);

// Tridiagonal chain on 1..n; boundary self-loops absorb the missing move. f is the identity.
MarkovModel birth_death(std::size_t n, double lambda, double mu, double eps = 0.0, int k = 1);

// H(X_{k+2} | X_1).
double cond_entropy_skip(const MarkovModel& m, int k);

struct TypeRate {
  std::size_t i = 0, j = 0;
  double weight = 0.0;  // Pr[X_1 = i, X_{k+2} = j]
  double rate = 0.0;    // per symbol
};

struct KtileResult {
  double rate = 0.0;  // per symbol
  std::vector<TypeRate> types;
  MaximalHypergraph hypergraph;
};

// Pr[x_2..x_{k+1} | X_1 = i, X_{k+2} = j] over supersymbols in row-major order.
std::vector<double> supersymbol_pmf(const MarkovModel& m, int k, std::size_t i, std::size_t j);
// edges_of[u] = tuple edges (row-major over edge indices) covering supersymbol u.
std::vector<std::vector<std::uint32_t>> tuple_edges(const MaximalHypergraph& h, int k);

KtileResult ktile_rate(const MarkovModel& m, int k, const SolverOptions& opts = {});

struct MarkovBound {
  int k = 1;
  double ktile = 0.0;  // R~_k
  double skip = 0.0;   // H(X_{k+2}|X_1)
  double bound = 0.0;  // k/(k+1) R~_k + skip/(k+1)
  KtileResult detail;
};

MarkovBound ub_markov(const MarkovModel& m, int k, const SolverOptions& opts = {});

struct SparsityReport {
  std::vector<std::size_t> assignment;  // symbol -> index into hypergraph.edges
  std::vector<SymbolSet> edges;         // distinct assigned edges
  std::size_t s = 0;
  int k = 1;
  double reduced_dimension = 0.0;  // (s |X|)^k
  double naive_dimension = 0.0;    // |X|^(2k)
  bool exhaustive = true;
  MaximalHypergraph hypergraph;
};

// Successor count of the edge process W_t = edge(assignment[X_t]).
std::size_t sparsity_of(const MarkovModel& m, const MaximalHypergraph& h,
                        const std::vector<std::size_t>& assignment);

// Assignment minimising s (ties: fewer distinct edges, then lexicographic); exhaustive up
// to 1e4 assignments, greedy beyond.
SparsityReport sparsity(const MarkovModel& m, int k);
SparsityReport sparsity(const MarkovModel& m, int k, const std::vector<std::size_t>& assignment);

}  // namespace hyperrate
