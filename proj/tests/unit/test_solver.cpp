#include <cmath>

#include "doctest.h"
#include "hyperrate/error.hpp"
#include "hyperrate/hypergraph.hpp"
#include "hyperrate/oracle.hpp"
#include "hyperrate/solver.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

namespace {

const double kLog3 = std::log2(3.0);

// H(W|Y) for the deterministic map x -> edge containing x (non-overlapping edges).
double quantized_conditional_entropy(const ProblemInstance& inst, const MaximalHypergraph& h) {
  const std::size_t nx = inst.pmf.shape()[0], ny = inst.pmf.shape()[1];
  std::vector<double> wy(h.edges.size() * ny, 0.0), py(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      std::size_t idx[2] = {x, y};
      double p = inst.pmf.prob(idx);
      py[y] += p;
      for (std::size_t e = 0; e < h.edges.size(); ++e)
        if (contains(h.edges[e], x)) wy[e * ny + y] += p;
    }
  return gen::entropy_of(wy) - gen::entropy_of(py);
}

FunctionTable scaled(const ProblemInstance& inst, double k) {
  return tabulate("g", inst.pmf, {0}, 1, [&](std::span<const std::size_t> i) {
    return std::vector<double>{k * inst.function().value(i[0])[0]};
  });
}

ProblemInstance constant_p2p(std::size_t n) {
  JointPmf pmf({numbered_alphabet("X", 0, n)}, std::vector<double>(n, 1.0 / double(n)));
  auto f = tabulate("c", pmf, {0}, 1, [](std::span<const std::size_t>) { return std::vector<double>{4.0}; });
  return make_instance(Setting::p2p, pmf, {f}, {0.0});
}

}  // namespace

TEST_CASE("weight grid") {
  CHECK_THROWS_AS(weight_grid(0), ValidationError);
  CHECK(weight_grid(1) == std::vector<double>{0.5});
  auto g = weight_grid(5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == 0.5);
}

TEST_CASE("point-to-point rates on the ternary identity") {
  auto inst = gen::fixture("ternary_half");
  CHECK(rate_p2p(inst, 0.0).rate == doctest::Approx(kLog3).epsilon(1e-9));
  auto half = rate_p2p(inst, 0.5);
  CHECK(half.rate == doctest::Approx(2.0 / 3).epsilon(1e-9));
  CHECK(half.diagnostics.lower_bound <= half.rate + 1e-12);
  CHECK(half.rate - half.diagnostics.lower_bound <= 1e-8);
  CHECK(rate_p2p(inst, 1.0).rate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rate_p2p(constant_p2p(4), 0.0).rate <= 1e-12);
  double total = 0.0;
  for (double v : half.time_sharing) total += v;
  CHECK(total == doctest::Approx(1.0));
  for (std::size_t r = 0; r < half.channels[0].input_size(); ++r) {
    double s = 0.0;
    for (std::size_t o = 0; o < half.channels[0].output_size(); ++o) s += half.channels[0].at(r, o);
    CHECK(std::abs(s - 1.0) <= 1e-10);
  }
}

TEST_CASE("side information on the parity table") {
  auto inst = gen::fixture("parity_side");
  auto h = maximal_edges(inst, 0.0);
  const double closed = quantized_conditional_entropy(inst, h);
  const double h13 = -(1.0 / 3) * std::log2(1.0 / 3) - (2.0 / 3) * std::log2(2.0 / 3);
  CHECK(closed == doctest::Approx(6.0 / 7 * h13).epsilon(1e-12));
  CHECK(std::abs(rate_side_info(inst, 0.0).rate - closed) <= 1e-4);
  CHECK(std::abs(rate_separation(inst).rate - closed) <= 1e-12);
  CHECK_THROWS(rate_separation(gen::fixture("greater_side")));
  CHECK_THROWS(rate_separation(inst, 0.5));
}

TEST_CASE("side information degenerates to the point-to-point rate") {
  gen::Rng rng(41);
  for (int t = 0; t < 10; ++t) {
    auto base = gen::p2p(rng, gen::uniform_int(rng, 2, 5), 1, gen::lattice_eps(rng));
    JointPmf joint = product(base.pmf, JointPmf({numbered_alphabet("Y", 0, 1)}, std::vector<double>{1.0}));
    auto f = tabulate("f", joint, {0, 1}, 1, [&](std::span<const std::size_t> i) {
      return std::vector<double>{base.function().value(i[0])[0]};
    });
    auto si = make_instance(Setting::side_info, joint, {f}, base.tolerances);
    CHECK(std::abs(rate_side_info(si, si.tolerance()).rate - rate_p2p(base, base.tolerance()).rate) <= 1e-6);
  }
}

TEST_CASE("side information with singleton edges gives H(X|Y)") {
  gen::Rng rng(42);
  for (int t = 0; t < 10; ++t) {
    std::size_t nx = gen::uniform_int(rng, 2, 4), ny = gen::uniform_int(rng, 1, 3);
    JointPmf pmf({numbered_alphabet("X", 1, nx), numbered_alphabet("Y", 1, ny)}, gen::joint(rng, nx, ny, 0.0));
    auto f = tabulate("x", pmf, {0, 1}, 1, [](std::span<const std::size_t> i) { return std::vector<double>{double(i[0])}; });
    auto inst = make_instance(Setting::side_info, pmf, {f}, {0.0});
    double hxy = gen::entropy_of(pmf.probs()) - gen::entropy_of(marginal(pmf, {1}).probs());
    CHECK(std::abs(rate_side_info(inst, 0.0).rate - hxy) <= 1e-8);
  }
}

TEST_CASE("surrogate and Lipschitz bounds") {
  auto inst = gen::fixture("ternary_half");
  CHECK(rate_surrogate(inst, inst.function(), 0.0, 0.5).rate == doctest::Approx(2.0 / 3).epsilon(1e-9));
  CHECK(rate_surrogate(inst, inst.function(), 0.25, 0.75).rate == doctest::Approx(2.0 / 3).epsilon(1e-9));
  auto flat = tabulate("g", inst.pmf, {0}, 1, [](std::span<const std::size_t>) { return std::vector<double>{2.0}; });
  CHECK(rate_surrogate(inst, flat, 1.0, 1.0).rate <= 1e-12);
  CHECK_THROWS(rate_surrogate(inst, inst.function(), 0.8, 0.5));
  CHECK_THROWS(rate_surrogate(inst, flat, 0.5, 0.5));

  CHECK(rate_lipschitz(inst, 1.0, 0.5).rate == doctest::Approx(rate_p2p(inst, 0.5).rate).epsilon(1e-9));
  auto doubled = make_instance(Setting::p2p, inst.pmf, {scaled(inst, 2.0)}, {1.0});
  CHECK(rate_lipschitz(doubled, 2.0, 1.0).rate == doctest::Approx(2.0 / 3).epsilon(1e-9));
  CHECK(rate_lipschitz(doubled, 2.0, 2.0).rate <= 1e-12);
  CHECK_THROWS(rate_lipschitz(doubled, 1.0, 1.0));
}

TEST_CASE("curve steps on the ternary identity") {
  auto inst = gen::fixture("ternary_half");
  auto c = sweep_curve(inst, {0.25, 0.5, 0.75, 1.0, 1.5});
  std::vector<double> expect = {kLog3, 2.0 / 3, 2.0 / 3, 0.0, 0.0};
  REQUIRE(c.points.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(c.points[i].rate - expect[i]) <= 1e-9);
  CHECK(c.breakpoints == std::vector<double>{0.5, 1.0});
  auto unsorted = sweep_curve(inst, {1.5, 0.0, 0.5});
  CHECK(unsorted.points.front().eps == 0.0);
}

TEST_CASE("distributed sum rate and regions on independent bits") {
  auto inst = gen::fixture("bit_pair");
  auto s = sum_rate_distributed(inst, 0.5);
  CHECK(std::abs(s.rate - 1.0) <= 1e-6);
  CHECK(verify_zero_distortion(inst, s, 0.5));
  CHECK(std::abs(sum_rate_distributed(inst, 0.0).rate - 2.0) <= 1e-6);
  CHECK(sum_rate_distributed(inst, 1.0).rate <= 1e-9);

  for (auto region : {region_distributed(inst, 0.5), region_independent(inst, 0.5)}) {
    REQUIRE(region.frontier.size() == 2);
    CHECK(std::abs(region.frontier.front().r1) <= 1e-3);
    CHECK(std::abs(region.frontier.front().r2 - 1.0) <= 1e-3);
    CHECK(std::abs(region.frontier.back().r1 - 1.0) <= 1e-3);
    CHECK(std::abs(region.frontier.back().r2) <= 1e-3);
    CHECK(std::abs(region.min_sum_rate() - 1.0) <= 1e-3);
    CHECK(verify_zero_distortion(inst, region));
  }
  auto wide = region_distributed(inst, 1.0);
  REQUIRE(wide.frontier.size() == 1);
  CHECK(wide.frontier[0].r1 + wide.frontier[0].r2 <= 1e-9);
}

TEST_CASE("independent region needs independent sources") {
  gen::Rng rng(43);
  auto inst = gen::distributed(rng, 2, 2, 0.5, 0.0);
  CHECK_THROWS_AS(region_independent(inst, 0.5), ValidationError);
}

TEST_CASE("property: distributed and independent regions coincide on product sources") {
  gen::Rng rng(44);
  for (int t = 0; t < 8; ++t) {
    std::size_t n1 = gen::uniform_int(rng, 2, 3), n2 = gen::uniform_int(rng, 2, 3);
    auto a = gen::simplex(rng, n1), b = gen::simplex(rng, n2);
    JointPmf pmf = product(JointPmf({numbered_alphabet("X1", 0, n1)}, a), JointPmf({numbered_alphabet("X2", 0, n2)}, b));
    std::vector<double> vals(n1 * n2);
    for (auto& v : vals) v = double(gen::uniform_int(rng, 0, 3));
    auto f = tabulate("f", pmf, {0, 1}, 1, [&](std::span<const std::size_t> i) { return std::vector<double>{vals[i[0] * n2 + i[1]]}; });
    auto inst = make_instance(Setting::distributed, pmf, {f}, {gen::lattice_eps(rng)});
    SolverOptions o;
    o.weights = 9;
    auto d = region_distributed(inst, inst.tolerance(), o);
    auto i = region_independent(inst, inst.tolerance(), o);
    CHECK(std::abs(d.min_sum_rate() - i.min_sum_rate()) <= 1e-3);
  }
}

TEST_CASE("property: rates never increase with tolerance") {
  gen::Rng rng(45);
  for (int t = 0; t < 30; ++t) {
    auto inst = t % 2 ? gen::p2p(rng, gen::uniform_int(rng, 2, 6), 2, 0.0)
                      : gen::side_info(rng, gen::uniform_int(rng, 2, 4), gen::uniform_int(rng, 1, 3), 1, 0.0);
    double prev = 1e9;
    for (double eps = 0.0; eps <= 2.5; eps += 0.25) {
      double r = rate_scalar(inst, eps).rate;
      CHECK(r <= prev + 1e-6);
      prev = r;
    }
  }
}

TEST_CASE("serial and parallel paths agree exactly") {
  gen::Rng rng(46);
  SolverOptions serial, parallel;
  serial.policy = ExecutionPolicy::serial;
  for (int t = 0; t < 6; ++t) {
    auto si = gen::side_info(rng, 4, 3, 1, gen::lattice_eps(rng));
    CHECK(rate_side_info(si, si.tolerance(), serial).rate == rate_side_info(si, si.tolerance(), parallel).rate);
    auto d = gen::distributed(rng, 3, 2, gen::lattice_eps(rng));
    auto a = region_distributed(d, d.tolerance(), serial), b = region_distributed(d, d.tolerance(), parallel);
    REQUIRE(a.frontier.size() == b.frontier.size());
    for (std::size_t i = 0; i < a.frontier.size(); ++i) {
      CHECK(a.frontier[i].r1 == b.frontier[i].r1);
      CHECK(a.frontier[i].r2 == b.frontier[i].r2);
    }
  }
}

TEST_CASE("regions: trivial tolerances") {
  auto mdc = gen::fixture("mdc_binary");
  auto r = region_mdc(mdc, 0.0, 0.0, 0.0);
  REQUIRE(r.frontier.size() == 1);
  CHECK(std::abs(r.frontier[0].r1 - 1.0) <= 1e-3);
  CHECK(std::abs(r.frontier[0].r2 - 1.0) <= 1e-3);
  auto loose = region_mdc(mdc, 0.0, 0.5, 0.5);
  CHECK(std::abs(loose.min_sum_rate() - 1.0) <= 1e-3);
  CHECK(region_mdc(mdc, 0.5, 0.5, 0.5).min_sum_rate() <= 1e-9);

  auto cascade = gen::fixture("cascade_binary");
  auto c = region_cascade(cascade, 0.0, 0.0);
  REQUIRE(c.frontier.size() == 1);
  CHECK(std::abs(c.frontier[0].r1 - 2.0) <= 1e-3);
  CHECK(std::abs(c.frontier[0].r2 - 1.0) <= 1e-3);
  CHECK(verify_zero_distortion(cascade, c));

  auto sr = gen::fixture("refinement");
  auto s = region_successive_refinement(sr, 0.0, 0.5);
  bool hit = false;
  for (const auto& v : s.frontier)
    hit = hit || (std::abs(v.r1 - 2.0 / 3) <= 1e-6 && std::abs(v.r2 - (kLog3 - 2.0 / 3)) <= 1e-6);
  CHECK(hit);
  CHECK(verify_zero_distortion(sr, s));
}
