#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperrate/geometry.hpp"
#include "hyperrate/model.hpp"

namespace hyperrate {

// Bit i set <=> symbol i is a member.
using SymbolSet = std::uint32_t;

inline std::vector<std::size_t> members(SymbolSet w) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; w; ++i, w >>= 1)
    if (w & 1u) out.push_back(i);
  return out;
}
inline bool contains(SymbolSet w, std::size_t x) { return (w >> x) & 1u; }
inline SymbolSet singleton(std::size_t x) { return SymbolSet{1} << x; }
inline SymbolSet full_set(std::size_t n) {
  return n >= 32 ? ~SymbolSet{0} : (SymbolSet{1} << n) - 1;
}

// For each context c and symbol x, the value a decoder must approximate, or nothing if
// (x, c) never occurs. Validity of an edge is checked context by context.
struct ContextTable {
  std::size_t symbols = 0;
  std::vector<std::string> symbol_labels;
  std::vector<std::string> context_labels;
  std::vector<std::vector<std::optional<Point>>> contexts;  // [context][symbol]
};

// Function `fn` with pmf axis `edge_axis` as the symbol axis; its other domain axes
// form the contexts. One empty-label context when the domain is edge_axis alone.
ContextTable make_contexts(const ProblemInstance& inst, std::size_t fn, std::size_t edge_axis);

bool edge_valid(const ContextTable& table, SymbolSet w, double eps);
// p2p / side_info / markov form: function 0 over pmf axis 0.
bool edge_valid(SymbolSet w, const ProblemInstance& inst, double eps);

struct MaximalHypergraph {
  std::size_t symbols = 0;
  double eps = 0.0;
  std::vector<std::string> labels;
  std::vector<std::string> context_labels;
  std::vector<SymbolSet> edges;
  std::vector<std::vector<std::optional<Ball>>> balls;  // [edge][context]
};

// Canonical order: lexicographic on sorted member lists.
void sort_edges(std::vector<SymbolSet>& edges);

MaximalHypergraph maximal_edges(const ContextTable& table, double eps);
MaximalHypergraph maximal_edges(const ProblemInstance& inst, double eps);
// Hypergraph of function `fn` over its first domain axis.
MaximalHypergraph maximal_edges_for(const ProblemInstance& inst, std::size_t fn, double eps);

// Attach per-context SEC balls to an edge list.
MaximalHypergraph with_balls(const ContextTable& table, std::vector<SymbolSet> edges, double eps);

bool edges_overlap(const MaximalHypergraph& h);
bool is_antichain(const std::vector<SymbolSet>& edges);
bool is_cover(const std::vector<SymbolSet>& edges, std::size_t symbols);
std::string edge_string(const MaximalHypergraph& h, SymbolSet w);
std::string edges_string(const MaximalHypergraph& h);
std::string fingerprint(const MaximalHypergraph& h);

bool condition1_holds(const ProblemInstance& inst);

inline constexpr std::size_t kMaxPairFamily = 1024;

struct HypergraphPair {
  double eps = 0.0;
  std::array<MaximalHypergraph, 2> sides;  // balls against opponent singletons
  std::vector<std::vector<std::uint8_t>> admissible;  // [edge1][edge2]
  std::vector<std::vector<std::optional<Ball>>> pair_balls;

  bool is_admissible(std::size_t e1, std::size_t e2) const { return admissible[e1][e2] != 0; }
};

HypergraphPair maximal_pair(const ProblemInstance& inst, double eps);

// Values f(x1, x2) over probable tuples of w1 x w2.
std::vector<Point> pair_points(const ProblemInstance& inst, SymbolSet w1, SymbolSet w2);

}  // namespace hyperrate
