#include <cmath>

#include "doctest.h"
#include "hyperrate/error.hpp"
#include "hyperrate/hypergraph.hpp"
#include "hyperrate/oracle.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

namespace {

SymbolSet set_of(std::initializer_list<std::size_t> xs) {
  SymbolSet w = 0;
  for (auto x : xs) w |= singleton(x);
  return w;
}

bool nested(const std::vector<SymbolSet>& small, const std::vector<SymbolSet>& large) {
  for (auto a : small) {
    bool inside = false;
    for (auto b : large) inside = inside || (a & ~b) == 0;
    if (!inside) return false;
  }
  return true;
}

void check_structure(const ProblemInstance& inst, const MaximalHypergraph& h) {
  CHECK(is_antichain(h.edges));
  CHECK(is_cover(h.edges, h.symbols));
  auto ctx = make_contexts(inst, 0, 0);
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    CHECK(edge_valid(ctx, h.edges[e], h.eps));
    for (std::size_t x = 0; x < h.symbols; ++x)
      if (!contains(h.edges[e], x)) CHECK_FALSE(edge_valid(ctx, h.edges[e] | singleton(x), h.eps));
    for (std::size_t c = 0; c < ctx.contexts.size(); ++c)
      for (std::size_t x = 0; x < h.symbols; ++x) {
        const auto& v = ctx.contexts[c][x];
        if (!contains(h.edges[e], x) || !v) continue;
        REQUIRE(h.balls[e][c]);
        double s = 0.0;
        for (std::size_t i = 0; i < v->size(); ++i) s += std::pow((*v)[i] - h.balls[e][c]->center[i], 2);
        CHECK(std::sqrt(s) <= h.eps + 1e-9);
      }
  }
}

}  // namespace

TEST_CASE("edge validity on the ternary fixtures") {
  auto exact = gen::fixture("ternary_exact");
  auto gap = gen::fixture("ternary_gap");
  CHECK_FALSE(edge_valid(set_of({0, 1}), exact, 0.0));
  CHECK(edge_valid(set_of({0, 1}), gap, 0.0));
  for (std::size_t x = 0; x < 3; ++x) CHECK(edge_valid(singleton(x), exact, 0.0));
}

TEST_CASE("maximal edges on the fixtures") {
  auto exact = maximal_edges(gen::fixture("ternary_exact"), 0.0);
  CHECK(exact.edges == std::vector<SymbolSet>{set_of({0}), set_of({1}), set_of({2})});
  CHECK_FALSE(edges_overlap(exact));

  auto gap = maximal_edges(gen::fixture("ternary_gap"), 0.0);
  CHECK(gap.edges == std::vector<SymbolSet>{set_of({0, 1}), set_of({1, 2})});
  CHECK(edges_overlap(gap));

  auto half = gen::fixture("ternary_half");
  CHECK(edges_string(maximal_edges(half, 0.5)) == "{1,2} {2,3}");
  // Radius exactly 1 is admitted, so one edge covers everything at eps = 1.
  CHECK(edges_string(maximal_edges(half, 1.0)) == "{1,2,3}");

  auto parity = gen::fixture("parity_side");
  auto hp = maximal_edges(parity, 0.0);
  CHECK(edges_string(hp) == "{1,3} {2}");
  CHECK_FALSE(edges_overlap(hp));
  CHECK(condition1_holds(parity));
  check_structure(parity, hp);

  auto greater = gen::fixture("greater_side");
  auto hg = maximal_edges(greater, 0.0);
  CHECK(edges_string(hg) == "{1,2} {2,3}");
  CHECK(edges_overlap(hg));
  CHECK_FALSE(condition1_holds(greater));
  check_structure(greater, hg);
}

TEST_CASE("alphabet over the cap") {
  JointPmf big({numbered_alphabet("X", 0, 25)}, std::vector<double>(25, 1.0 / 25));
  auto f = tabulate("f", big, {0}, 1, [](std::span<const std::size_t> i) { return std::vector<double>{double(i[0])}; });
  CHECK_THROWS(make_instance(Setting::p2p, big, {f}, {0.0}));
  gen::Rng rng(30);
  CHECK_THROWS_AS(brute_maximal_edges(gen::p2p(rng, 17, 1, 0.0), 0.0), CapError);
}

TEST_CASE("pair on independent bits with identity into the plane") {
  auto inst = gen::fixture("bit_pair");
  auto pair = maximal_pair(inst, 0.5);
  for (const auto& side : pair.sides)
    CHECK(side.edges == std::vector<SymbolSet>{set_of({0}), set_of({0, 1}), set_of({1})});
  CHECK_FALSE(pair.is_admissible(1, 1));
  CHECK(pair.is_admissible(0, 1));
  CHECK(pair.is_admissible(1, 0));
  CHECK(sec(pair_points(inst, set_of({0, 1}), set_of({0, 1}))).radius == doctest::Approx(std::sqrt(0.5)));

  auto wide = maximal_pair(inst, 1.0);
  CHECK(wide.sides[0].edges == std::vector<SymbolSet>{set_of({0, 1})});
  CHECK(wide.is_admissible(0, 0));
  auto tight = maximal_pair(inst, 0.0);
  CHECK(tight.sides[1].edges == std::vector<SymbolSet>{set_of({0}), set_of({1})});
}

TEST_CASE("property: pair admissibility matches its definition and covers every tuple") {
  gen::Rng rng(31);
  for (int t = 0; t < 80; ++t) {
    auto inst = gen::distributed(rng, gen::uniform_int(rng, 1, 4), gen::uniform_int(rng, 1, 4), gen::lattice_eps(rng), 0.2);
    auto pair = maximal_pair(inst, inst.tolerance());
    const auto& s1 = pair.sides[0].edges;
    const auto& s2 = pair.sides[1].edges;
    for (std::size_t a = 0; a < s1.size(); ++a)
      for (std::size_t b = 0; b < s2.size(); ++b) {
        auto pts = pair_points(inst, s1[a], s2[b]);
        bool fits = pts.empty() || brute_radius(pts) <= inst.tolerance() + 1e-9;
        CHECK(pair.is_admissible(a, b) == fits);
      }
    for (std::size_t x1 = 0; x1 < inst.pmf.shape()[0]; ++x1)
      for (std::size_t x2 = 0; x2 < inst.pmf.shape()[1]; ++x2) {
        std::size_t idx[2] = {x1, x2};
        if (!(inst.pmf.prob(idx) > 0.0)) continue;
        bool found = false;
        for (std::size_t a = 0; a < s1.size(); ++a)
          for (std::size_t b = 0; b < s2.size(); ++b)
            found = found || (contains(s1[a], x1) && contains(s2[b], x2) && pair.is_admissible(a, b));
        CHECK(found);
      }
  }
}

TEST_CASE("property: builder equals the brute-force oracle") {
  gen::Rng rng(32);
  for (int t = 0; t < 300; ++t) {
    ProblemInstance inst;
    if (t % 2 == 0)
      inst = gen::p2p(rng, gen::uniform_int(rng, 1, 12), gen::uniform_int(rng, 1, 3), gen::lattice_eps(rng));
    else
      inst = gen::side_info(rng, gen::uniform_int(rng, 1, 8), gen::uniform_int(rng, 1, 3), gen::uniform_int(rng, 1, 2),
                            gen::lattice_eps(rng));
    auto h = maximal_edges(inst, inst.tolerance());
    CHECK(h.edges == brute_maximal_edges(inst, inst.tolerance()).edges);
    check_structure(inst, h);
  }
}

TEST_CASE("property: edges nest as the tolerance grows") {
  gen::Rng rng(33);
  for (int t = 0; t < 150; ++t) {
    auto inst = gen::side_info(rng, gen::uniform_int(rng, 2, 7), gen::uniform_int(rng, 1, 3), 2, 0.0);
    std::vector<SymbolSet> prev;
    for (double eps = 0.0; eps <= 3.0; eps += 0.25) {
      auto h = maximal_edges(inst, eps);
      if (!prev.empty()) CHECK(nested(prev, h.edges));
      prev = h.edges;
    }
  }
}

TEST_CASE("property: the non-overlap condition forbids overlapping edges at zero tolerance") {
  gen::Rng rng(34);
  int hits = 0;
  for (int t = 0; t < 300; ++t) {
    auto inst = gen::side_info(rng, gen::uniform_int(rng, 2, 6), gen::uniform_int(rng, 1, 4), 1, 0.0, 0.3, 1);
    if (!condition1_holds(inst)) continue;
    ++hits;
    CHECK_FALSE(edges_overlap(maximal_edges(inst, 0.0)));
  }
  CHECK(hits > 20);
}

TEST_CASE("full-support side information satisfies the non-overlap condition") {
  gen::Rng rng(35);
  for (int t = 0; t < 30; ++t) CHECK(condition1_holds(gen::side_info(rng, 4, 3, 1, 0.0, 0.0)));
}

TEST_CASE("fingerprints separate edge sets") {
  auto half = gen::fixture("ternary_half");
  CHECK(fingerprint(maximal_edges(half, 0.5)) == fingerprint(maximal_edges(half, 0.75)));
  CHECK(fingerprint(maximal_edges(half, 0.5)) != fingerprint(maximal_edges(half, 1.0)));
}
