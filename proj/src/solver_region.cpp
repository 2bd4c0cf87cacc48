#include <algorithm>
#include <cmath>
#include <map>

#include "hyperrate/detail/ba.hpp"
#include "hyperrate/detail/solve.hpp"
#include "hyperrate/error.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate {

namespace {

using detail::Block;
using detail::mutual_information;
using detail::ProgramSpec;

void require(const ProblemInstance& inst, Setting s, const char* op) {
  if (inst.setting != s)
    throw ValidationError(std::string(op) + " needs a " + std::string(to_string(s)) + " instance");
}

// Per-terminal block: allowed[x_i] = side edges containing x_i.
Block terminal_block(std::size_t axis, std::size_t out, const MaximalHypergraph& h) {
  Block b;
  b.inputs = {axis};
  b.outputs = {out};
  b.allowed = {detail::edges_containing(h)};
  return b;
}

ProgramSpec distributed_spec(const ProblemInstance& inst, const HypergraphPair& pair) {
  ProgramSpec spec;
  spec.source_shape = inst.pmf.shape();
  spec.source_pmf = inst.pmf.probs();
  spec.aux_sizes = {pair.sides[0].edges.size(), pair.sides[1].edges.size()};
  spec.blocks = {terminal_block(0, 0, pair.sides[0]), terminal_block(1, 1, pair.sides[1])};
  // Coordinates: X1=0, X2=1, W1=2, W2=3.
  spec.quantities = {mutual_information({0}, {2}), mutual_information({1}, {3}),
                     mutual_information({0, 1}, {2, 3})};
  auto adm = pair.admissible;
  spec.admissible = [adm](std::span<const std::uint32_t> w) { return adm[w[0]][w[1]] != 0; };
  return spec;
}

const std::vector<detail::BlockInfo> kDistributedBlocks = {{"W1|X1", {0}}, {"W2|X2", {1}}};

// Joint block over all source axes; output k ranges over hs[k]'s edges containing the
// symbol on axis edge_axis[k].
Block joint_block(const std::vector<std::size_t>& shape, const std::vector<const MaximalHypergraph*>& hs,
                  const std::vector<std::size_t>& edge_axis) {
  Block b;
  std::size_t rows = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    b.inputs.push_back(i);
    rows *= shape[i];
  }
  b.allowed.resize(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) {
    b.outputs.push_back(k);
    auto of = detail::edges_containing(*hs[k]);
    b.allowed[k].resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t rem = r, digit = 0;
      for (std::size_t i = shape.size(); i-- > 0;) {
        if (i == edge_axis[k]) digit = rem % shape[i];
        rem /= shape[i];
      }
      b.allowed[k][r] = of[digit];
    }
  }
  return b;
}

RateRegion finish(const detail::Program& prog, const detail::VertexFn& vertices,
                  const std::vector<detail::BlockInfo>& info, const SolverOptions& opts) {
  auto out = detail::trace_region(prog, vertices, opts);
  return detail::assemble_region(prog, out, info, opts);
}

}  // namespace

RateResult sum_rate_distributed(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  require(inst, Setting::distributed, "sum_rate_distributed");
  auto pair = maximal_pair(inst, eps);
  detail::Program prog(distributed_spec(inst, pair));
  auto out = detail::minimise(prog, [](std::span<const double> q) { return q[2]; }, opts,
                              opts.multiterminal_restarts);
  RateResult r;
  r.rate = std::max(0.0, out.value);
  r.channels = detail::to_test_channels(prog, out.channel, kDistributedBlocks);
  r.hypergraphs = {pair.sides[0], pair.sides[1]};
  r.pair = std::move(pair);
  r.diagnostics = out.diagnostics;
  return r;
}

RateRegion region_distributed(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  require(inst, Setting::distributed, "region_distributed");
  auto pair = maximal_pair(inst, eps);
  detail::Program prog(distributed_spec(inst, pair));
  // Corner points of the polytope R1 >= I(X1;W1|W2), R2 >= I(X2;W2|W1), R1+R2 >= I(X1X2;W1W2).
  auto vertices = [](std::span<const double> q) {
    return std::vector<std::array<double, 2>>{{q[2] - q[1], q[1]}, {q[0], q[2] - q[0]}};
  };
  auto region = finish(prog, vertices, kDistributedBlocks, opts);
  region.hypergraphs = {pair.sides[0], pair.sides[1]};
  region.pair = std::move(pair);
  return region;
}

RateRegion region_independent(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  require(inst, Setting::distributed, "region_independent");
  auto p1 = marginal(inst.pmf, {0}).probs();
  auto p2 = marginal(inst.pmf, {1}).probs();
  const std::size_t n1 = p1.size(), n2 = p2.size();
  for (std::size_t a = 0; a < n1; ++a)
    for (std::size_t b = 0; b < n2; ++b) {
      std::size_t idx[2] = {a, b};
      if (std::abs(inst.pmf.prob(idx) - p1[a] * p2[b]) > 1e-12)
        throw ValidationError("sources are not independent");
    }

  auto pair = maximal_pair(inst, eps);
  const auto& h1 = pair.sides[0];
  const auto& h2 = pair.sides[1];
  const std::size_t e1 = h1.edges.size(), e2 = h2.edges.size();

  using Mask = std::vector<std::uint8_t>;
  struct Solved {
    double rate;
    TestChannel channel;
  };
  std::map<std::pair<int, Mask>, Solved> memo;
  auto solve = [&](int side, const Mask& use) -> const Solved& {
    auto key = std::make_pair(side, use);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const auto& h = side == 0 ? h1 : h2;
    const auto& p = side == 0 ? p1 : p2;
    std::vector<std::vector<std::uint32_t>> of(h.symbols);
    for (std::size_t e = 0; e < h.edges.size(); ++e)
      if (use[e])
        for (auto x : members(h.edges[e])) of[x].push_back(std::uint32_t(e));
    auto ba = detail::restricted_ba(p, of, h.edges.size(), opts.tolerance, opts.max_iterations);
    auto rows = detail::ba_channel(ba.q, of);
    TestChannel t;
    t.name = side == 0 ? "W1|X1" : "W2|X2";
    t.inputs = {std::size_t(side)};
    t.input_shape = {h.symbols};
    t.output_shape = {h.edges.size()};
    t.probs.assign(h.symbols * h.edges.size(), 0.0);
    t.mask.assign(t.probs.size(), 0);
    std::size_t k = 0;
    for (std::size_t x = 0; x < h.symbols; ++x)
      for (auto w : of[x]) {
        t.probs[x * h.edges.size() + w] = rows[k++];
        t.mask[x * h.edges.size() + w] = 1;
      }
    return memo.emplace(key, Solved{ba.rate, std::move(t)}).first->second;
  };

  auto covers = [](const MaximalHypergraph& h, const Mask& use) {
    SymbolSet u = 0;
    for (std::size_t e = 0; e < h.edges.size(); ++e)
      if (use[e]) u |= h.edges[e];
    return u == full_set(h.symbols);
  };

  std::vector<detail::FrontierPoint> pts;
  std::vector<std::array<const Solved*, 2>> sources;
  // Fix one side's edge set, give the other every edge compatible with all of it.
  for (int side = 0; side < 2; ++side) {
    const std::size_t ne = side == 0 ? e1 : e2, no = side == 0 ? e2 : e1;
    if (ne > 16) throw CapError("independent region: more than 16 edges on one side");
    const auto& mine = side == 0 ? h1 : h2;
    const auto& theirs = side == 0 ? h2 : h1;
    for (std::uint32_t s = 1; s < (1u << ne); ++s) {
      Mask use(ne), other(no, 1);
      for (std::size_t e = 0; e < ne; ++e) use[e] = (s >> e) & 1u;
      if (!covers(mine, use)) continue;
      for (std::size_t e = 0; e < ne; ++e)
        if (use[e])
          for (std::size_t f = 0; f < no; ++f)
            if (!(side == 0 ? pair.is_admissible(e, f) : pair.is_admissible(f, e))) other[f] = 0;
      if (!covers(theirs, other)) continue;
      const Solved& a = solve(side, use);
      const Solved& b = solve(1 - side, other);
      const Solved* s1 = side == 0 ? &a : &b;
      const Solved* s2 = side == 0 ? &b : &a;
      pts.push_back({s1->rate, s2->rate, sources.size()});
      sources.push_back({s1, s2});
    }
  }
  if (pts.empty()) throw SolverError("no jointly admissible pair of covers");

  RateRegion region;
  auto hull = detail::lower_left_hull(std::move(pts));
  for (const auto& p : hull)
    region.frontier.push_back({p.r1, p.r2, {sources[p.source][0]->channel, sources[p.source][1]->channel}});
  for (double mu : weight_grid(opts.weights)) {
    auto s = detail::support(hull, mu);
    region.rows.push_back({mu, hull[s.vertex].r1, hull[s.vertex].r2, s.value, s.vertex});
  }
  region.diagnostics.method = "blahut-arimoto";
  region.diagnostics.enumerated = double(sources.size());
  region.hypergraphs = {h1, h2};
  region.pair = std::move(pair);
  return region;
}

RateRegion region_mdc(const ProblemInstance& inst, double eps0, double eps1, double eps2,
                      const SolverOptions& opts) {
  require(inst, Setting::mdc, "region_mdc");
  std::vector<MaximalHypergraph> hs;
  const double eps[3] = {eps0, eps1, eps2};
  for (std::size_t i = 0; i < 3; ++i) hs.push_back(maximal_edges_for(inst, i, eps[i]));

  ProgramSpec spec;
  spec.source_shape = inst.pmf.shape();
  spec.source_pmf = inst.pmf.probs();
  for (const auto& h : hs) spec.aux_sizes.push_back(h.edges.size());
  spec.blocks = {joint_block(spec.source_shape, {&hs[0], &hs[1], &hs[2]},
                             {inst.function(0).axes.front(), inst.function(1).axes.front(),
                              inst.function(2).axes.front()})};
  // Coordinates: X=0, W0=1, W1=2, W2=3.
  auto sum = mutual_information({0}, {1, 2, 3});
  for (auto t : mutual_information({2}, {3})) sum.push_back(t);
  spec.quantities = {mutual_information({0}, {2}), mutual_information({0}, {3}), sum};
  detail::Program prog(std::move(spec));

  auto vertices = [](std::span<const double> q) {
    const double a = q[0], b = q[1], s = q[2];
    if (s >= a + b) return std::vector<std::array<double, 2>>{{a, s - a}, {s - b, b}};
    return std::vector<std::array<double, 2>>{{a, b}};
  };
  auto region = finish(prog, vertices, {{"W0,W1,W2|X", {0}}}, opts);
  region.hypergraphs = std::move(hs);
  return region;
}

RateRegion region_successive_refinement(const ProblemInstance& inst, double eps0, double eps1,
                                        const SolverOptions& opts) {
  require(inst, Setting::successive_refinement, "region_successive_refinement");
  std::vector<MaximalHypergraph> hs = {maximal_edges_for(inst, 0, eps0), maximal_edges_for(inst, 1, eps1)};

  ProgramSpec spec;
  spec.source_shape = inst.pmf.shape();
  spec.source_pmf = inst.pmf.probs();
  for (const auto& h : hs) spec.aux_sizes.push_back(h.edges.size());
  spec.blocks = {joint_block(spec.source_shape, {&hs[0], &hs[1]},
                             {inst.function(0).axes.front(), inst.function(1).axes.front()})};
  // Coordinates: X=0, W0=1, W1=2.
  spec.quantities = {mutual_information({0}, {2}), mutual_information({0}, {1, 2})};
  detail::Program prog(std::move(spec));

  auto vertices = [](std::span<const double> q) {
    const double a = q[0], s = std::max(q[0], q[1]);
    return std::vector<std::array<double, 2>>{{a, s - a}, {s, 0.0}};
  };
  auto region = finish(prog, vertices, {{"W0,W1|X", {0}}}, opts);
  region.hypergraphs = std::move(hs);
  return region;
}

RateRegion region_cascade(const ProblemInstance& inst, double eps1, double eps2, const SolverOptions& opts) {
  require(inst, Setting::cascade, "region_cascade");
  std::vector<MaximalHypergraph> hs = {maximal_edges_for(inst, 0, eps1), maximal_edges_for(inst, 1, eps2)};

  ProgramSpec spec;
  spec.source_shape = inst.pmf.shape();
  spec.source_pmf = inst.pmf.probs();
  for (const auto& h : hs) spec.aux_sizes.push_back(h.edges.size());
  spec.blocks = {joint_block(spec.source_shape, {&hs[0], &hs[1]},
                             {inst.function(0).axes.front(), inst.function(1).axes.front()})};
  // Coordinates: X1=0, X2=1, W1=2, W2=3.
  spec.quantities = {mutual_information({0, 1}, {2, 3}), mutual_information({0, 1}, {3})};
  detail::Program prog(std::move(spec));

  auto vertices = [](std::span<const double> q) { return std::vector<std::array<double, 2>>{{q[0], q[1]}}; };
  auto region = finish(prog, vertices, {{"W1,W2|X1,X2", {0, 1}}}, opts);
  region.hypergraphs = std::move(hs);
  return region;
}

}  // namespace hyperrate
