#include "hyperrate/detail/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <omp.h>

#include "hyperrate/error.hpp"

namespace hyperrate::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(stream >> 32), std::uint32_t(tag)};
  return std::mt19937_64(seq);
}

struct Job {
  Channel start;
  Objective objective;
};

struct JobResult {
  Channel channel;
  PolishStats stats;
};

std::vector<JobResult> run_jobs(const Program& prog, const std::vector<Job>& jobs, const SolverOptions& opts) {
  std::vector<JobResult> out(jobs.size());
  const int nt = std::max(1, std::min<int>(threads_for(opts.policy), int(jobs.size())));
#pragma omp parallel for num_threads(nt) schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(jobs.size()); ++i) {
    auto& r = out[std::size_t(i)];
    r.channel = prog.polish(jobs[std::size_t(i)].start, jobs[std::size_t(i)].objective,
                            opts.max_iterations, opts.tolerance, &r.stats);
  }
  return out;
}

}  // namespace

ScalarOutcome minimise(const Program& prog, const Objective& objective, const SolverOptions& opts,
                       std::size_t restarts) {
  ScalarOutcome best;
  best.value = kInf;
  std::optional<Channel> det;
  double det_value = kInf;
  if (prog.deterministic_count() <= opts.enumeration_cap) {
    auto idx = prog.enumerate({[&](std::span<const double> q) {
                                return Program::Key{objective(q), 0.0, 0.0};
                              }},
                              opts.policy);
    best.diagnostics.enumerated = prog.deterministic_count();
    if (idx[0]) {
      det = prog.deterministic(*idx[0]);
      det_value = objective(prog.quantities(*det));
    }
  }
  std::optional<Channel> base = det;
  if (!base) base = prog.find_feasible_deterministic();
  if (!base) throw SolverError("no feasible channel satisfies the joint admissibility constraint");

  std::vector<Job> jobs;
  if (!prog.spec().admissible) jobs.push_back({prog.smoothed(*base, 1.0), objective});
  if (det) jobs.push_back({prog.smoothed(*det, 0.5), objective});
  for (std::size_t r = 0; r < restarts; ++r) {
    auto rng = seeded(opts.seed, r, 0x51);
    jobs.push_back({prog.random_start(*base, rng), objective});
  }
  auto results = run_jobs(prog, jobs, opts);
  for (std::size_t i = 0; i < results.size(); ++i) {
    double v = results[i].stats.value;
    if (v < best.value) {
      best.value = v;
      best.channel = results[i].channel;
      best.diagnostics.method = "polish";
      best.diagnostics.iterations = results[i].stats.iterations;
      best.diagnostics.final_change = results[i].stats.last_change;
      best.diagnostics.restart = i;
    }
  }
  if (det && det_value <= best.value + 1e-13) {
    best.value = det_value;
    best.channel = *det;
    best.diagnostics.method = "enumeration";
    best.diagnostics.iterations = 0;
    best.diagnostics.final_change = 0.0;
    best.diagnostics.restart = 0;
  }
  return best;
}

RegionOutcome trace_region(const Program& prog, const VertexFn& vertices, const SolverOptions& opts) {
  if (opts.weights < 2) throw SolverError("weight grid needs at least two weights");
  const auto mus = weight_grid(opts.weights);
  auto scalar = [&](double mu) {
    return [&vertices, mu](std::span<const double> q) {
      double best = kInf;
      for (auto v : vertices(q)) best = std::min(best, mu * v[0] + (1.0 - mu) * v[1]);
      return best;
    };
  };

  RegionOutcome out;
  std::vector<Channel> det_for(mus.size());
  if (prog.deterministic_count() <= opts.enumeration_cap) {
    std::vector<Program::KeyFn> keys;
    for (double mu : mus) {
      keys.push_back([&vertices, mu](std::span<const double> q) {
        Program::Key k{kInf, kInf, kInf};
        for (auto v : vertices(q)) {
          Program::Key c{mu * v[0] + (1.0 - mu) * v[1], (1.0 - mu) * v[0] + mu * v[1], v[0]};
          k = std::min(k, c);
        }
        return k;
      });
    }
    auto idx = prog.enumerate(keys, opts.policy);
    out.diagnostics.enumerated = prog.deterministic_count();
    std::map<std::uint64_t, std::size_t> seen;
    for (std::size_t k = 0; k < mus.size(); ++k) {
      if (!idx[k]) throw SolverError("no feasible channel satisfies the joint admissibility constraint");
      det_for[k] = prog.deterministic(*idx[k]);
      if (seen.emplace(*idx[k], out.channels.size()).second) out.channels.push_back(det_for[k]);
    }
  } else {
    auto base = prog.find_feasible_deterministic();
    if (!base) throw SolverError("no feasible channel satisfies the joint admissibility constraint");
    for (auto& d : det_for) d = *base;
    out.channels.push_back(*base);
  }

  std::vector<Job> jobs;
  for (std::size_t k = 0; k < mus.size(); ++k) jobs.push_back({prog.smoothed(det_for[k], 0.5), scalar(mus[k])});
  for (std::size_t r = 0; r < opts.multiterminal_restarts; ++r) {
    std::size_t k = r % mus.size();
    auto rng = seeded(opts.seed, r, 0x52);
    jobs.push_back({prog.random_start(det_for[k], rng), scalar(mus[k])});
  }
  auto results = run_jobs(prog, jobs, opts);
  std::size_t iters = 0;
  for (auto& r : results) {
    iters += r.stats.iterations;
    out.channels.push_back(std::move(r.channel));
  }

  std::vector<FrontierPoint> pts;
  for (std::size_t c = 0; c < out.channels.size(); ++c)
    for (auto v : vertices(prog.quantities(out.channels[c]))) pts.push_back({std::max(0.0, v[0]), std::max(0.0, v[1]), c});
  out.hull = lower_left_hull(std::move(pts));
  out.diagnostics.method = "enumeration+polish";
  out.diagnostics.iterations = iters;
  return out;
}

std::vector<TestChannel> to_test_channels(const Program& prog, const Channel& ch,
                                          const std::vector<BlockInfo>& info) {
  std::vector<TestChannel> out;
  const auto& spec = prog.spec();
  for (std::size_t b = 0; b < prog.block_count(); ++b) {
    const auto& blk = spec.blocks[b];
    TestChannel t;
    t.name = info.at(b).name;
    t.inputs = info.at(b).input_axes;
    for (auto i : blk.inputs) t.input_shape.push_back(spec.source_shape[i]);
    for (auto o : blk.outputs) t.output_shape.push_back(spec.aux_sizes[o]);
    const std::size_t nout = t.output_size();
    t.probs.assign(prog.row_count(b) * nout, 0.0);
    t.mask.assign(prog.row_count(b) * nout, 0);
    for (std::size_t r = 0; r < prog.row_count(b); ++r)
      for (std::size_t e = prog.entry_begin(b, r); e < prog.entry_end(b, r); ++e) {
        std::size_t flat = 0;
        auto outs = prog.entry_outputs(b, e);
        for (std::size_t k = 0; k < outs.size(); ++k) flat = flat * t.output_shape[k] + outs[k];
        t.probs[r * nout + flat] = ch.blocks[b][e];
        t.mask[r * nout + flat] = 1;
      }
    out.push_back(std::move(t));
  }
  return out;
}

RateRegion assemble_region(const Program& prog, const RegionOutcome& out,
                           const std::vector<BlockInfo>& info, const SolverOptions& opts) {
  RateRegion region;
  for (const auto& p : out.hull)
    region.frontier.push_back({p.r1, p.r2, to_test_channels(prog, out.channels[p.source], info)});
  for (double mu : weight_grid(opts.weights)) {
    auto s = support(out.hull, mu);
    const auto& v = out.hull[s.vertex];
    region.rows.push_back({mu, v.r1, v.r2, s.value, s.vertex});
  }
  region.diagnostics = out.diagnostics;
  return region;
}

std::vector<std::vector<std::uint32_t>> edges_containing(const MaximalHypergraph& h) {
  std::vector<std::vector<std::uint32_t>> out(h.symbols);
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    for (auto x : members(h.edges[e])) out[x].push_back(std::uint32_t(e));
  return out;
}

}  // namespace hyperrate::detail
