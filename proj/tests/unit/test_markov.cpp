#include <cmath>

#include "doctest.h"
#include "hyperrate/error.hpp"
#include "hyperrate/markov.hpp"
#include "hyperrate/oracle.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

namespace {

double h2(double p) { return gen::entropy_of({p, 1.0 - p}); }

Matrix iid(const std::vector<double>& q) { return Matrix(q.size(), q); }

Matrix cycle(std::size_t n) {
  Matrix P(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) P[i][(i + 1) % n] = 1.0;
  return P;
}

std::vector<double> identity_values(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = double(i + 1);
  return v;
}

}  // namespace

TEST_CASE("stationary laws") {
  auto pi = stationary({{0.9, 0.1}, {0.1, 0.9}});
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<double> q = {0.2, 0.5, 0.3};
  auto row = stationary(iid(q));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(row[i] - q[i]) <= 1e-10);
  auto bd = birth_death(6, 0.3, 0.3);
  for (double v : bd.pi()) CHECK(std::abs(v - 1.0 / 6) <= 1e-10);
  CHECK_THROWS_AS(stationary({{1.0, 0.0}, {0.5, 0.5}}), ValidationError);
  CHECK_THROWS_AS(stationary(cycle(3)), ValidationError);
  CHECK(stationary(cycle(3), false)[1] == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(stationary({{0.5, 0.4}, {0.5, 0.5}}), ValidationError);
}

TEST_CASE("property: stationary law is invariant") {
  gen::Rng rng(51);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = gen::uniform_int(rng, 1, 7);
    Matrix P(n);
    for (auto& r : P) r = gen::simplex(rng, n);
    auto pi = stationary(P);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += pi[i] * P[i][j];
      CHECK(std::abs(s - pi[j]) <= 1e-10);
      CHECK(pi[j] > 0.0);
    }
  }
}

TEST_CASE("birth-death construction") {
  auto two = birth_death(2, 0.2, 0.4);
  CHECK(two.transition()[0][1] == doctest::Approx(0.2));
  CHECK(two.transition()[1][0] == doctest::Approx(0.4));
  auto six = birth_death(6, 0.3, 0.3, 0.5);
  CHECK(six.transition()[2][2] == doctest::Approx(0.4));
  CHECK(six.transition()[0][0] == doctest::Approx(0.7));
  CHECK_THROWS_AS(birth_death(1, 0.3, 0.3), ValidationError);
  CHECK_THROWS_AS(birth_death(4, 0.7, 0.7), ValidationError);
  CHECK_THROWS_AS(birth_death(4, 0.0, 0.3), ValidationError);
}

TEST_CASE("skip entropy") {
  CHECK(cond_entropy_skip(markov_model({{0.9, 0.1}, {0.1, 0.9}}, {0, 1}, 0.0), 1) ==
        doctest::Approx(h2(0.18)).epsilon(1e-12));
  CHECK(h2(0.18) == doctest::Approx(0.6801).epsilon(1e-4));
  std::vector<double> q = {0.5, 0.25, 0.25};
  CHECK(cond_entropy_skip(markov_model(iid(q), identity_values(3), 0.0), 2) == doctest::Approx(1.5));
  CHECK(cond_entropy_skip(markov_model(cycle(4), identity_values(4), 0.0, 1, false), 3) == doctest::Approx(0.0));
}

TEST_CASE("k-letter rate and bound on i.i.d. chains") {
  std::vector<double> q = {0.5, 0.3, 0.2};
  auto exact = markov_model(iid(q), identity_values(3), 0.0);
  for (int k = 1; k <= 3; ++k) {
    CHECK(std::abs(ktile_rate(exact, k).rate - gen::entropy_of(q)) <= 1e-6);
    CHECK(std::abs(ub_markov(exact, k).bound - gen::entropy_of(q)) <= 1e-6);
  }
  auto coarse = with_eps(exact, 0.5);
  const double single = rate_p2p(coarse.instance, 0.5).rate;
  for (int k = 1; k <= 3; ++k) {
    auto b = ub_markov(coarse, k);
    CHECK(std::abs(b.ktile - single) <= 1e-6);
    CHECK(b.bound >= single - 1e-9);
    CHECK(std::abs(b.bound - (k * single + gen::entropy_of(q)) / (k + 1)) <= 1e-6);
  }
  auto wide = with_eps(exact, 1.0);
  CHECK(ktile_rate(wide, 2).rate <= 1e-12);
  CHECK(std::abs(ub_markov(wide, 2).bound - gen::entropy_of(q) / 3) <= 1e-9);
}

TEST_CASE("deterministic cycle costs nothing") {
  auto m = markov_model(cycle(3), identity_values(3), 0.0, 1, false);
  for (int k = 1; k <= 3; ++k) CHECK(ub_markov(m, k).bound <= 1e-9);
  auto s = sparsity(m, 1);
  CHECK(s.s == 1);
}

TEST_CASE("supersymbol pmfs are normalised and tuple edges cover") {
  auto m = birth_death(4, 0.3, 0.3, 0.5);
  auto h = maximal_edges(m.instance, 0.5);
  auto tuples = tuple_edges(h, 2);
  CHECK(tuples.size() == 16);
  for (const auto& t : tuples) CHECK_FALSE(t.empty());
  double total = 0.0;
  for (double v : supersymbol_pmf(m, 2, 0, 3)) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k-letter rate against the supersymbol grid oracle") {
  auto m = birth_death(4, 0.3, 0.3, 0.5);
  GridSpec g;
  g.m = 16;
  auto grid = grid_ktile_rate(m, 2, g);
  double r = ktile_rate(m, 2).rate;
  CHECK(r >= grid.lower - 1e-9);
  CHECK(r <= grid.value + 1e-9);
  CHECK(grid.value - r <= 1e-2);
}

TEST_CASE("sparsity of the six-state birth-death chain") {
  auto m = birth_death(6, 0.3, 0.3, 0.5, 2);
  auto s = sparsity(m, 2);
  CHECK(edges_string(s.hypergraph) == "{1,2} {2,3} {3,4} {4,5} {5,6}");
  CHECK(s.s == 3);
  CHECK(s.reduced_dimension == 324.0);
  CHECK(s.naive_dimension == 1296.0);
  // Each symbol x mapped to {x, x+1} (the last to {5,6}): edge {x,x+1} is reached
  // from x-1, x, x+1 only, so the process is still 3-sparse.
  auto shifted = sparsity(m, 2, {0, 1, 2, 3, 4, 4});
  CHECK(shifted.s == 3);
  CHECK_THROWS_AS(sparsity(m, 2, {0, 0, 0, 0, 0, 0}), ValidationError);
  std::vector<double> q = {0.25, 0.25, 0.5};
  CHECK(sparsity(markov_model(iid(q), identity_values(3), 0.0), 1).s == 3);
}

TEST_CASE("property: reduced dimension never exceeds naive when s <= |X|") {
  gen::Rng rng(52);
  for (int t = 0; t < 40; ++t) {
    std::size_t n = gen::uniform_int(rng, 2, 6);
    auto m = birth_death(n, gen::uniform(rng, 0.05, 0.45), gen::uniform(rng, 0.05, 0.45), gen::lattice_eps(rng),
                         int(gen::uniform_int(rng, 1, 3)));
    auto s = sparsity(m, m.k());
    CHECK(s.s <= n);
    CHECK(s.reduced_dimension <= s.naive_dimension);
  }
}

TEST_CASE("caps") {
  auto m = birth_death(11, 0.3, 0.3, 0.0);
  CHECK_THROWS_AS(ktile_rate(m, 4), CapError);
}
