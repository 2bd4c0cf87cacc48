// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperrate/error.hpp"
#include "hyperrate/hypergraph.hpp"
#include "hyperrate/markov.hpp"
#include "hyperrate/oracle.hpp"
#include "hyperrate/solver.hpp"
#include "../support/generators.hpp"

using namespace hyperrate;

namespace {

const double kLog3 = std::log2(3.0);

// Collects failed sub-checks for one criterion.
struct Ledger {
  std::vector<std::string> failures;
  std::ostringstream info;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

double h2(double p) { return (p <= 0.0 || p >= 1.0) ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

int failed = 0;

void criterion(int id, double limit_s, const std::function<void(Ledger&)>& body) {
  Ledger L;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(L);
  } catch (const std::exception& e) {
    L.failures.push_back(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) L.failures.push_back("runtime " + std::to_string(secs) + " s over limit");
  const bool ok = L.failures.empty();
  if (!ok) ++failed;
  std::printf("%s criterion %d (%.2f s)%s%s", ok ? "PASS" : "FAIL", id, secs, L.info.str().empty() ? "" : ": ",
              L.info.str().c_str());
  for (const auto& f : L.failures) std::printf(" [%s]", f.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

FunctionTable constant(const JointPmf& pmf, std::vector<std::size_t> axes, const char* name) {
  return tabulate(name, pmf, std::move(axes), 1, [](std::span<const std::size_t>) { return std::vector<double>{0.0}; });
}

FunctionTable identity_of(const JointPmf& pmf, std::size_t axis, const char* name) {
  return tabulate(name, pmf, {axis}, 1, [](std::span<const std::size_t> i) { return std::vector<double>{double(i[0])}; });
}

bool has_point(const RateRegion& r, double r1, double r2, double tol) {
  for (const auto& v : r.frontier)
    if (near(v.r1, r1, tol) && near(v.r2, r2, tol)) return true;
  return false;
}

}  // namespace

int main() {
  criterion(1, 1.0, [](Ledger& L) {
    auto inst = gen::fixture("ternary_exact");
    for (double e : {0.0, 0.25, 0.49}) L.expect(near(rate_p2p(inst, e).rate, kLog3, 1e-4), "log2 3 at " + std::to_string(e));
    for (double e : {0.5, 0.75, 0.99}) L.expect(near(rate_p2p(inst, e).rate, 2.0 / 3, 1e-4), "2/3 at " + std::to_string(e));
    for (double e : {1.0, 1.5}) L.expect(near(rate_p2p(inst, e).rate, 0.0, 1e-9), "0 at " + std::to_string(e));
    auto c = sweep_curve(inst, {0.0, 0.25, 0.49, 0.5, 0.75, 0.99, 1.0, 1.5});
    L.expect(c.breakpoints == std::vector<double>{0.5, 1.0}, "breakpoints");
    L.info << c.breakpoints.size() << " breakpoints";
  });

  criterion(2, 30.0, [](Ledger& L) {
    L.expect(edges_string(maximal_edges(gen::fixture("parity_side"), 0.0)) == "{1,3} {2}", "parity fixture");
    L.expect(edges_string(maximal_edges(gen::fixture("greater_side"), 0.0)) == "{1,2} {2,3}", "greater fixture");
    gen::Rng rng(2);
    int agree = 0;
    for (int t = 0; t < 200; ++t) {
      const std::size_t d = gen::uniform_int(rng, 1, 2);
      const double eps = gen::uniform(rng, 0.0, 2.5);
      ProblemInstance inst = t % 2 ? gen::p2p(rng, gen::uniform_int(rng, 1, 10), d, eps)
                                   : gen::side_info(rng, gen::uniform_int(rng, 1, 10), gen::uniform_int(rng, 1, 3), d,
                                                    eps, 0.3);
      bool same = maximal_edges(inst, eps).edges == brute_maximal_edges(inst, eps).edges;
      agree += same;
      L.expect(same, "random instance " + std::to_string(t));
    }
    L.info << agree << "/200 random instances agree";
  });

  criterion(3, 0.0, [](Ledger& L) {
    auto parity = gen::fixture("parity_side");
    L.expect(condition1_holds(parity), "condition holds on the parity table");
    L.expect(edges_string(maximal_edges(parity, 0.0)) == "{1,3} {2}", "parity edges");
    // W = 1{x in {1,3}}; given Y the pair (W, Y) has P(W=1|Y) of 1/3 on two of the
    // three side values and 0 on the third, which carries weight 1/7.
    const double closed = 6.0 / 7.0 * h2(1.0 / 3.0);
    const double r = rate_side_info(parity, 0.0).rate;
    L.expect(near(r, closed, 1e-4), "rate vs H(W|Y)");
    L.info << "rate " << r << " vs H(W|Y) " << closed;
    auto greater = gen::fixture("greater_side");
    L.expect(!condition1_holds(greater), "condition fails on the comparison table");
    L.expect(edges_overlap(maximal_edges(greater, 0.0)), "comparison edges overlap");
  });

  criterion(4, 0.0, [](Ledger& L) {
    auto inst = gen::fixture("bit_pair");
    auto r = region_distributed(inst, 0.5);
    L.expect(has_point(r, 1.0, 0.0, 1e-3), "corner (1,0)");
    L.expect(has_point(r, 0.0, 1.0, 1e-3), "corner (0,1)");
    L.expect(near(r.min_sum_rate(), 1.0, 1e-3), "sum rate");
    if (!r.pair) {
      L.expect(false, "no pair hypergraph");
      return;
    }
    const auto& pr = *r.pair;
    bool marked = false;
    for (std::size_t a = 0; a < pr.sides[0].edges.size(); ++a)
      for (std::size_t b = 0; b < pr.sides[1].edges.size(); ++b)
        if (pr.sides[0].edges[a] == 0b11u && pr.sides[1].edges[b] == 0b11u) marked = !pr.is_admissible(a, b);
    L.expect(marked, "({0,1},{0,1}) inadmissible");
    L.info << "sum rate " << r.min_sum_rate() << ", " << r.frontier.size() << " vertices";
  });

  criterion(5, 300.0, [](Ledger& L) {
    gen::Rng rng(5);
    GridSpec g;
    g.m = 12;
    double worst = 0.0, cert = 0.0;
    int done = 0;
    while (done < 10) {
      auto inst = gen::distributed(rng, gen::uniform_int(rng, 2, 3), gen::uniform_int(rng, 2, 3), 0.0, 0.0, 2);
      const double eps = 0.5 * double(gen::uniform_int(rng, 0, 2));
      if (aux_search_count(inst, g) > g.budget) continue;
      auto s = sum_rate_distributed(inst, eps).rate;
      auto o = general_aux_search(inst, eps, g);
      L.expect(s <= o.value + 1e-6, "solver above oracle on instance " + std::to_string(done));
      L.expect(o.value - s <= 0.05, "gap over 0.05 on instance " + std::to_string(done));
      worst = std::max(worst, o.value - s);
      cert = std::max(cert, o.certificate);
      ++done;
    }
    L.info << "max oracle - solver " << worst << " over 10 instances (continuity certificate up to " << cert << ")";
  });

  criterion(6, 0.0, [](Ledger& L) {
    int audited = 0;
    for (const char* name : {"ternary_exact", "ternary_gap", "ternary_half", "parity_side", "greater_side", "bit_pair",
                             "refinement", "mdc_binary", "cascade_binary", "birth_death6"}) {
      auto inst = gen::fixture(name);
      auto audit = [&](const Audit& a, const std::string& what) {
        ++audited;
        L.expect(bool(a), std::string(name) + " " + what + ": " + a.failure);
      };
      switch (inst.setting) {
        case Setting::p2p:
        case Setting::side_info:
        case Setting::markov:
          for (double e : {0.0, inst.tolerance(), 0.5, 1.0})
            audit(verify_zero_distortion(inst, rate_scalar(inst, e), e), "rate");
          break;
        case Setting::distributed:
          audit(verify_zero_distortion(inst, sum_rate_distributed(inst, inst.tolerance()), inst.tolerance()), "sum");
          audit(verify_zero_distortion(inst, region_distributed(inst, inst.tolerance())), "region");
          audit(verify_zero_distortion(inst, region_independent(inst, inst.tolerance())), "independent");
          break;
        case Setting::mdc:
          audit(verify_zero_distortion(inst, region_mdc(inst, 0.0, 0.0, 0.0)), "mdc");
          audit(verify_zero_distortion(inst, region_mdc(inst, 0.0, 0.5, 0.5)), "mdc loose");
          break;
        case Setting::successive_refinement:
          audit(verify_zero_distortion(inst, region_successive_refinement(inst, 0.0, 0.5)), "sr");
          break;
        case Setting::cascade:
          audit(verify_zero_distortion(inst, region_cascade(inst, 0.0, 0.0)), "cascade");
          break;
      }
    }
    L.info << audited << " solver outputs audited";
  });

  criterion(7, 0.0, [](Ledger& L) {
    gen::Rng rng(7);
    const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    for (int t = 0; t < 100; ++t) {
      ProblemInstance inst = t % 2 ? gen::p2p(rng, gen::uniform_int(rng, 2, 6), gen::uniform_int(rng, 1, 2), 0.0)
                                   : gen::side_info(rng, gen::uniform_int(rng, 2, 4), gen::uniform_int(rng, 1, 3), 1,
                                                    0.0, 0.3);
      double prev = 1e300;
      MaximalHypergraph prev_h;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = rate_scalar(inst, grid[i]).rate;
        L.expect(r <= prev + 1e-6, "rate increased on instance " + std::to_string(t));
        prev = r;
        auto h = maximal_edges(inst, grid[i]);
        if (i > 0)
          for (auto w : prev_h.edges) {
            bool inside = false;
            for (auto v : h.edges) inside = inside || (w & ~v) == 0;
            L.expect(inside, "edge not nested on instance " + std::to_string(t));
          }
        prev_h = std::move(h);
      }
    }
    L.info << "100 instances x " << grid.size() << " tolerances";
  });

  criterion(8, 120.0, [](Ledger& L) {
    // i.i.d. chain: the k-tile rate is additive, so ub(k) = R + (H(X) - R)/(k+1), which
    // equals R only when R = H(X). Check equality there and the exact gap otherwise.
    Matrix P(3, std::vector<double>{0.2, 0.5, 0.3});
    for (double eps : {0.0, 0.5}) {
      auto m = markov_model(P, {1.0, 2.0, 3.0}, eps);
      const double R = rate_p2p(m.instance, eps).rate;
      const double H = gen::entropy_of({0.2, 0.5, 0.3});
      for (int k : {1, 2, 3}) {
        const double ub = ub_markov(m, k).bound;
        L.expect(near(ub, R + (H - R) / (k + 1), 1e-6), "i.i.d. bound at eps " + std::to_string(eps));
        if (eps == 0.0) L.expect(near(ub, R, 1e-6), "i.i.d. equality at k=" + std::to_string(k));
      }
    }
    auto bd = birth_death(6, 0.3, 0.3, 0.5, 2);
    auto s = sparsity(bd, 2);
    L.expect(edges_string(s.hypergraph) == "{1,2} {2,3} {3,4} {4,5} {5,6}", "birth-death edges");
    L.expect(s.s == 3, "sparsity 3");
    L.expect(s.reduced_dimension == 324.0 && s.naive_dimension == 1296.0, "dimensions");
    auto ub = ub_markov(bd, 2);
    GridSpec g;
    g.m = 8;
    GridResult grid;
    for (;; g.m /= 2) {
      try {
        grid = grid_ktile_rate(bd, 2, g);
        break;
      } catch (const CapError&) {
        if (g.m <= 2) throw;
      }
    }
    L.expect(ub.ktile >= grid.lower - 1e-9, "k-tile rate below the grid lower bound");
    const double ref = (2.0 * grid.lower + ub.skip) / 3.0;
    L.expect(ub.bound >= ref - 1e-9, "bound below the oracle reference");
    L.info << "ub(2) " << ub.bound << " vs reference " << ref << " (grid m=" << grid.m << ")";
  });

  criterion(9, 0.0, [](Ledger& L) {
    auto mdc = gen::fixture("mdc_binary");
    auto m0 = region_mdc(mdc, 0.0, 0.0, 0.0);
    L.expect(m0.frontier.size() == 1 && has_point(m0, 1.0, 1.0, 1e-3), "mdc identity corner (1,1)");
    L.expect(near(region_mdc(mdc, 0.0, 0.5, 0.5).min_sum_rate(), 1.0, 1e-3), "mdc loose sides sum H(X)");
    auto c3 = constant(mdc.pmf, {0}, "c");
    auto mdc_const = make_instance(Setting::mdc, mdc.pmf, {c3, c3, c3}, {0.0, 0.0, 0.0});
    auto mc = region_mdc(mdc_const, 0.0, 0.0, 0.0);
    L.expect(mc.frontier.size() == 1 && has_point(mc, 0.0, 0.0, 1e-3), "mdc constant");

    auto sr = gen::fixture("refinement");
    const double Rfine = rate_p2p(make_instance(Setting::p2p, sr.pmf, {sr.function(0)}, {0.0}), 0.0).rate;
    L.expect(has_point(region_successive_refinement(sr, 0.0, 0.0), Rfine, 0.0, 1e-3), "sr equal tolerances");
    L.expect(has_point(region_successive_refinement(sr, 0.0, 1.0), 0.0, Rfine, 1e-3), "sr wide coarse");
    L.expect(has_point(region_successive_refinement(sr, 0.0, 0.5), 2.0 / 3, kLog3 - 2.0 / 3, 1e-3), "sr coupling");

    auto cas = gen::fixture("cascade_binary");
    auto cc = region_cascade(cas, 0.0, 0.0);
    L.expect(cc.frontier.size() == 1 && has_point(cc, 2.0, 1.0, 1e-3), "cascade corner (2,1)");
    L.expect(has_point(region_cascade(cas, 0.0, 0.5), 1.0, 0.0, 1e-3), "cascade wide second");
    auto cas_const = make_instance(Setting::cascade, cas.pmf, {constant(cas.pmf, {0}, "a"), constant(cas.pmf, {1}, "b")},
                                   {0.0, 0.0});
    L.expect(has_point(region_cascade(cas_const, 0.0, 0.0), 0.0, 0.0, 1e-3), "cascade constant");

    // Outer-bound sanity on random refinement instances.
    gen::Rng rng(9);
    int points = 0;
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = gen::uniform_int(rng, 2, 4);
      JointPmf pmf({numbered_alphabet("X", 0, n)}, gen::simplex(rng, n));
      auto f0 = identity_of(pmf, 0, "fine");
      const double e0 = 0.5 * double(gen::uniform_int(rng, 0, 1)), e1 = e0 + 0.5 * double(gen::uniform_int(rng, 0, 2));
      auto inst = make_instance(Setting::successive_refinement, pmf, {f0, f0}, {e0, e1});
      auto p2p = [&](double e) { return rate_p2p(make_instance(Setting::p2p, pmf, {f0}, {e}), e).rate; };
      const double R0 = p2p(e0), R1 = p2p(e1);
      for (const auto& v : region_successive_refinement(inst, e0, e1).frontier) {
        ++points;
        L.expect(v.r1 >= R1 - 1e-6, "R1 below R[eps1]");
        L.expect(v.r1 + v.r2 >= R0 - 1e-6, "sum below R[eps0]");
      }
    }
    L.info << points << " refinement frontier points checked";
  });

  std::printf("%s\n", failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED");
  return failed ? 1 : 0;
}
