#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hyperrate/detail/ba.hpp"
#include "hyperrate/detail/solve.hpp"
#include "hyperrate/error.hpp"
#include "hyperrate/info.hpp"
#include "hyperrate/solver.hpp"

namespace hyperrate {

std::size_t TestChannel::input_size() const {
  std::size_t n = 1;
  for (auto s : input_shape) n *= s;
  return n;
}

std::size_t TestChannel::output_size() const {
  std::size_t n = 1;
  for (auto s : output_shape) n *= s;
  return n;
}

std::vector<std::size_t> TestChannel::unflatten_output(std::size_t out) const {
  std::vector<std::size_t> idx(output_shape.size());
  for (std::size_t k = output_shape.size(); k-- > 0;) {
    idx[k] = out % output_shape[k];
    out /= output_shape[k];
  }
  return idx;
}

double RateRegion::min_sum_rate() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : frontier) best = std::min(best, v.r1 + v.r2);
  return best;
}

std::vector<double> weight_grid(std::size_t n) {
  if (n == 0) throw ValidationError("weight grid is empty");
  if (n == 1) return {0.5};
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = double(k) / double(n - 1);
  return w;
}

RateResult rate_over_edges(const std::vector<double>& p, const MaximalHypergraph& h,
                           const SolverOptions& opts) {
  if (p.size() != h.symbols) throw ValidationError("pmf size does not match the hypergraph");
  auto edges_of = detail::edges_containing(h);
  for (std::size_t x = 0; x < p.size(); ++x)
    if (edges_of[x].empty()) throw ValidationError("hypergraph does not cover symbol " + std::to_string(x));
  auto ba = detail::restricted_ba(p, edges_of, h.edges.size(), opts.tolerance, opts.max_iterations);
  auto rows = detail::ba_channel(ba.q, edges_of);

  TestChannel t;
  t.name = "W|X";
  t.inputs = {0};
  t.input_shape = {h.symbols};
  t.output_shape = {h.edges.size()};
  t.probs.assign(h.symbols * h.edges.size(), 0.0);
  t.mask.assign(t.probs.size(), 0);
  std::size_t k = 0;
  for (std::size_t x = 0; x < h.symbols; ++x)
    for (auto w : edges_of[x]) {
      t.probs[x * h.edges.size() + w] = rows[k++];
      t.mask[x * h.edges.size() + w] = 1;
    }

  RateResult r;
  r.rate = ba.rate;
  r.channels.push_back(std::move(t));
  r.hypergraphs.push_back(h);
  r.diagnostics.method = "blahut-arimoto";
  r.diagnostics.iterations = ba.iterations;
  r.diagnostics.final_change = ba.last_change;
  r.diagnostics.lower_bound = ba.lower;
  return r;
}

namespace {

RateResult side_info_on(const ProblemInstance& inst, const MaximalHypergraph& h, const SolverOptions& opts) {
  const auto& shape = inst.pmf.shape();
  auto edges_of = detail::edges_containing(h);
  detail::ProgramSpec spec;
  spec.source_shape = shape;
  spec.source_pmf = inst.pmf.probs();
  spec.aux_sizes = {h.edges.size()};
  detail::Block blk;
  blk.inputs = {0};
  blk.outputs = {0};
  blk.allowed = {edges_of};
  spec.blocks = {blk};
  spec.quantities = {detail::mutual_information({0}, {2}, {1})};
  detail::Program prog(std::move(spec));
  auto out = detail::minimise(prog, [](std::span<const double> q) { return q[0]; }, opts,
                              opts.scalar_restarts);
  RateResult r;
  r.rate = std::max(0.0, out.value);
  r.channels = detail::to_test_channels(prog, out.channel, {{"W|X", {0}}});
  r.hypergraphs.push_back(h);
  r.diagnostics = out.diagnostics;
  return r;
}

void require_scalar(const ProblemInstance& inst) {
  switch (inst.setting) {
    case Setting::p2p:
    case Setting::side_info:
    case Setting::markov: return;
    default: throw ValidationError("scalar rate needs a p2p, side_info or markov instance");
  }
}

// Identity function on the first domain axis through the instance's embedding.
FunctionTable identity_function(const ProblemInstance& inst, const FunctionTable& f) {
  auto emb = domain_embedding(inst);
  const auto& pos = emb[f.axes.front()];
  if (pos.empty()) throw ValidationError("alphabet '" + inst.pmf.axis(f.axes.front()).name + "' has no numeric embedding");
  return tabulate(f.name + "_id", inst.pmf, f.axes, 1,
                  [&](std::span<const std::size_t> idx) { return std::vector<double>{pos[idx[0]]}; });
}

}  // namespace

namespace detail {

RateResult rate_on(const ProblemInstance& inst, const MaximalHypergraph& h, const SolverOptions& opts) {
  require_scalar(inst);
  if (inst.setting == Setting::side_info) return side_info_on(inst, h, opts);
  return rate_over_edges(marginal(inst.pmf, {0}).probs(), h, opts);
}

}  // namespace detail

RateResult rate_p2p(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  if (inst.setting != Setting::p2p && inst.setting != Setting::markov)
    throw ValidationError("rate_p2p needs a p2p instance");
  return detail::rate_on(inst, maximal_edges(inst, eps), opts);
}

RateResult rate_side_info(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  if (inst.setting != Setting::side_info) throw ValidationError("rate_side_info needs a side_info instance");
  return side_info_on(inst, maximal_edges(inst, eps), opts);
}

RateResult rate_scalar(const ProblemInstance& inst, double eps, const SolverOptions& opts) {
  require_scalar(inst);
  return detail::rate_on(inst, maximal_edges(inst, eps), opts);
}

RateResult rate_separation(const ProblemInstance& inst, double eps) {
  if (inst.setting != Setting::side_info) throw ValidationError("separation needs a side_info instance");
  if (eps != 0.0) throw ValidationError("separation is defined at zero tolerance only");
  if (!condition1_holds(inst))
    throw ValidationError("probability pattern condition fails; quantize-then-compress does not apply");
  auto h = maximal_edges(inst, 0.0);
  if (edges_overlap(h)) throw ValidationError("maximal edges overlap");

  const std::size_t nx = inst.pmf.shape()[0], ny = inst.pmf.shape()[1], ne = h.edges.size();
  std::vector<std::size_t> edge_of(nx);
  for (std::size_t e = 0; e < ne; ++e)
    for (auto x : members(h.edges[e])) edge_of[x] = e;
  std::vector<double> pwy(ne * ny, 0.0), py(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      std::size_t idx[2] = {x, y};
      double p = inst.pmf.prob(idx);
      pwy[edge_of[x] * ny + y] += p;
      py[y] += p;
    }

  TestChannel t;
  t.name = "W|X";
  t.inputs = {0};
  t.input_shape = {nx};
  t.output_shape = {ne};
  t.probs.assign(nx * ne, 0.0);
  t.mask.assign(nx * ne, 0);
  for (std::size_t x = 0; x < nx; ++x) {
    t.probs[x * ne + edge_of[x]] = 1.0;
    t.mask[x * ne + edge_of[x]] = 1;
  }

  RateResult r;
  r.rate = std::max(0.0, entropy(pwy) - entropy(py));
  r.channels.push_back(std::move(t));
  r.hypergraphs.push_back(std::move(h));
  r.diagnostics.method = "closed-form";
  return r;
}

RateResult rate_surrogate(const ProblemInstance& inst, const FunctionTable& g, double delta, double eps,
                          const SolverOptions& opts) {
  require_scalar(inst);
  if (!(delta >= 0.0) || delta > eps) throw ValidationError("surrogate needs 0 <= delta <= eps");
  const auto& f = inst.function();
  if (!is_delta_approximation(g, f, delta)) throw ValidationError("g is not a delta-approximation of f");

  ProblemInstance sub = inst;
  sub.functions[0] = g;
  auto hg = maximal_edges(sub, eps - delta);
  auto r = detail::rate_on(inst, hg, opts);

  // Decoder keeps g's centers; they must serve f at eps.
  auto tf = make_contexts(inst, 0, f.axes.front());
  for (std::size_t e = 0; e < hg.edges.size(); ++e)
    for (std::size_t c = 0; c < tf.contexts.size(); ++c) {
      const auto& ball = hg.balls[e][c];
      for (auto x : members(hg.edges[e])) {
        const auto& v = tf.contexts[c][x];
        if (v && ball && distance(*v, ball->center) > eps + kBoundaryTolerance)
          throw SolverError("surrogate reconstruction misses f's tolerance at edge " + edge_string(hg, hg.edges[e]));
      }
    }
  return r;
}

RateResult rate_lipschitz(const ProblemInstance& inst, double L, double eps, const SolverOptions& opts) {
  require_scalar(inst);
  if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("Lipschitz constant must be finite and >= 0");
  const auto& f = inst.function();
  if (!lipschitz_check(inst, f, L)) throw ValidationError("f is not L-Lipschitz in its first argument");

  ProblemInstance sub = inst;
  sub.functions[0] = identity_function(inst, f);
  const double scaled = L > 0.0 ? eps / L : std::numeric_limits<double>::max();
  auto hid = maximal_edges(sub, scaled);
  auto r = detail::rate_on(inst, hid, opts);

  // Re-centre on f so the decoder table is in f's image.
  auto recentred = with_balls(make_contexts(inst, 0, f.axes.front()), hid.edges, eps);
  for (std::size_t e = 0; e < recentred.edges.size(); ++e)
    for (const auto& ball : recentred.balls[e])
      if (ball && ball->radius > eps + kBoundaryTolerance)
        throw SolverError("identity-edge " + edge_string(recentred, recentred.edges[e]) +
                          " does not fit f within eps");
  r.hypergraphs = {std::move(recentred)};
  return r;
}

Curve sweep_curve(const ProblemInstance& inst, std::vector<double> eps_list, const SolverOptions& opts) {
  require_scalar(inst);
  if (eps_list.empty()) throw ValidationError("eps list is empty");
  for (double e : eps_list)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ValidationError("eps values must be finite and >= 0");
  std::sort(eps_list.begin(), eps_list.end());

  auto table = make_contexts(inst, 0, 0);
  std::vector<MaximalHypergraph> hs;
  for (double e : eps_list) hs.push_back(maximal_edges(table, e));

  // One solve per run of equal edge sets.
  std::vector<std::size_t> first;
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (i == 0 || hs[i].edges != hs[i - 1].edges) first.push_back(i);
  std::vector<double> rates(first.size());
  SolverOptions inner = opts;
  inner.policy = ExecutionPolicy::serial;
  const int nt = std::max(1, std::min<int>(threads_for(opts.policy), int(first.size())));
#pragma omp parallel for num_threads(nt) schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(first.size()); ++k)
    rates[std::size_t(k)] = detail::rate_on(inst, hs[first[std::size_t(k)]], inner).rate;

  Curve c;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (seg + 1 < first.size() && first[seg + 1] == i) ++seg;
    c.points.push_back({eps_list[i], rates[seg], fingerprint(hs[i]), edges_string(hs[i])});
    if (i > 0 && c.points[i].fingerprint != c.points[i - 1].fingerprint) c.breakpoints.push_back(eps_list[i]);
  }
  return c;
}

}  // namespace hyperrate
