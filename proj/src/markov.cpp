#include "hyperrate/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "hyperrate/detail/ba.hpp"
#include "hyperrate/detail/solve.hpp"
#include "hyperrate/error.hpp"
#include "hyperrate/info.hpp"

namespace hyperrate {

namespace {

void check_transition(const Matrix& P) {
  const std::size_t n = P.size();
  if (n == 0) throw ValidationError("transition matrix is empty");
  for (const auto& row : P) {
    if (row.size() != n) throw ValidationError("transition matrix must be square");
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("transition has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kPmfTolerance) throw ValidationError("transition row does not sum to 1");
  }
}

std::vector<int> bfs_levels(const Matrix& P, bool reverse) {
  const std::size_t n = P.size();
  std::vector<int> level(n, -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    auto u = queue[h];
    for (std::size_t v = 0; v < n; ++v) {
      double p = reverse ? P[v][u] : P[u][v];
      if (p > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return level;
}

Eigen::MatrixXd to_eigen(const Matrix& P) {
  const std::size_t n = P.size();
  Eigen::MatrixXd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(Eigen::Index(i), Eigen::Index(j)) = P[i][j];
  return M;
}

Eigen::MatrixXd power(const Matrix& P, int e) {
  Eigen::MatrixXd M = to_eigen(P);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(M.rows(), M.cols());
  for (int i = 0; i < e; ++i) R = R * M;
  return R;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

std::vector<double> stationary(const Matrix& P, bool require_aperiodic) {
  check_transition(P);
  const std::size_t n = P.size();
  auto fwd = bfs_levels(P, false);
  auto bwd = bfs_levels(P, true);
  for (std::size_t i = 0; i < n; ++i)
    if (fwd[i] < 0 || bwd[i] < 0) throw ValidationError("transition matrix is reducible");
  if (require_aperiodic) {
    int g = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v)
        if (P[u][v] > 0.0) g = std::gcd(g, std::abs(fwd[u] + 1 - fwd[v]));
    if (g != 1) throw ValidationError("transition matrix is periodic (period " + std::to_string(g) + ")");
  }

  Eigen::MatrixXd A = to_eigen(P).transpose() - Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
  A.row(Eigen::Index(n - 1)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(n));
  b(Eigen::Index(n - 1)) = 1.0;
  Eigen::VectorXd x = A.fullPivLu().solve(b);

  std::vector<double> pi(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pi[i] = std::max(0.0, x(Eigen::Index(i)));
    total += pi[i];
  }
  for (auto& v : pi) v /= total;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += pi[i] * P[i][j];
    if (std::abs(s - pi[j]) > 1e-10) throw SolverError("stationary solve did not converge");
  }
  return pi;
}

MarkovModel markov_model(const ProblemInstance& inst, bool require_aperiodic) {
  if (inst.setting != Setting::markov || !inst.markov) throw ValidationError("needs a markov instance");
  validate(inst);
  auto pi = stationary(inst.markov->transition, require_aperiodic);
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (std::abs(pi[i] - inst.pmf.prob(i)) > 1e-10) throw ValidationError("pmf is not the stationary law");
  return MarkovModel{inst};
}

MarkovModel markov_model(const Matrix& P, const std::vector<double>& values, double eps, int k,
                         bool require_aperiodic) {
  if (values.size() != P.size()) throw ValidationError("need one function value per state");
  auto pi = stationary(P, require_aperiodic);
  JointPmf pmf({numbered_alphabet("X", 1, P.size())}, pi);
  auto f = tabulate("f", pmf, {0}, 1, [&](std::span<const std::size_t> i) {
    return std::vector<double>{values[i[0]]};
  });
  ProblemInstance inst;
  inst.setting = Setting::markov;
  inst.pmf = std::move(pmf);
  inst.functions = {std::move(f)};
  inst.tolerances = {eps};
  inst.markov = MarkovSpec{P, k};
  validate(inst);
  return MarkovModel{std::move(inst)};
}

MarkovModel with_eps(const MarkovModel& m, double eps) { return MarkovModel{with_tolerance(m.instance, eps)}; }

MarkovModel birth_death(std::size_t n, double lambda, double mu, double eps, int k) {
  if (n < 2) throw ValidationError("birth-death chain needs n >= 2");
  if (!(lambda > 0.0) || !(mu > 0.0) || lambda + mu > 1.0 + 1e-15)
    throw ValidationError("birth-death needs lambda, mu > 0 and lambda + mu <= 1");
  Matrix P(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double stay = 1.0;
    if (i + 1 < n) {
      P[i][i + 1] = lambda;
      stay -= lambda;
    }
    if (i > 0) {
      P[i][i - 1] = mu;
      stay -= mu;
    }
    P[i][i] = std::max(0.0, stay);
  }
  std::vector<double> values(n);
  std::iota(values.begin(), values.end(), 1.0);
  return markov_model(P, values, eps, k);
}

double cond_entropy_skip(const MarkovModel& m, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  auto R = power(m.transition(), k + 1);
  double h = 0.0;
  for (std::size_t i = 0; i < m.states(); ++i) {
    std::vector<double> row(m.states());
    for (std::size_t j = 0; j < m.states(); ++j) row[j] = R(Eigen::Index(i), Eigen::Index(j));
    h += m.pi()[i] * entropy(row);
  }
  return h;
}

std::vector<double> supersymbol_pmf(const MarkovModel& m, int k, std::size_t i, std::size_t j) {
  const std::size_t n = m.states();
  const std::size_t count = ipow(n, k);
  const auto& P = m.transition();
  std::vector<double> out(count, 0.0);
  std::vector<std::size_t> u(static_cast<std::size_t>(k), 0);
  double total = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t r = t;
    for (int c = k; c-- > 0;) {
      u[std::size_t(c)] = r % n;
      r /= n;
    }
    double p = P[i][u[0]];
    for (int c = 1; c < k && p > 0.0; ++c) p *= P[u[std::size_t(c - 1)]][u[std::size_t(c)]];
    p *= P[u[std::size_t(k - 1)]][j];
    out[t] = p;
    total += p;
  }
  if (!(total > 0.0)) throw SolverError("type (i, j) has zero probability");
  for (auto& v : out) v /= total;
  return out;
}

std::vector<std::vector<std::uint32_t>> tuple_edges(const MaximalHypergraph& h, int k) {
  const std::size_t n = h.symbols, ne = h.edges.size();
  auto per = detail::edges_containing(h);
  const std::size_t count = ipow(n, k);
  std::vector<std::vector<std::uint32_t>> out(count);
  std::vector<std::size_t> u(static_cast<std::size_t>(k));
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t r = t;
    for (int c = k; c-- > 0;) {
      u[std::size_t(c)] = r % n;
      r /= n;
    }
    std::vector<std::uint32_t> acc{0};
    for (int c = 0; c < k; ++c) {
      std::vector<std::uint32_t> next;
      for (auto a : acc)
        for (auto w : per[u[std::size_t(c)]]) next.push_back(std::uint32_t(a * ne + w));
      acc.swap(next);
    }
    out[t] = std::move(acc);
  }
  return out;
}

KtileResult ktile_rate(const MarkovModel& m, int k, const SolverOptions& opts) {
  if (k < 1) throw ValidationError("k must be >= 1");
  const std::size_t n = m.states();
  if (std::pow(double(n), k) > kSupersymbolCap)
    throw CapError("|X|^k = " + std::to_string(std::pow(double(n), k)) + " exceeds the supersymbol cap");
  KtileResult res;
  res.hypergraph = maximal_edges(m.instance, m.eps());
  const double tuples = std::pow(double(res.hypergraph.edges.size()), k);
  if (tuples > 1e6) throw CapError("tuple edge alphabet exceeds 1e6");
  auto edges_of = tuple_edges(res.hypergraph, k);

  auto R = power(m.transition(), k + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double w = m.pi()[i] * R(Eigen::Index(i), Eigen::Index(j));
      if (w > 0.0) res.types.push_back({i, j, w, 0.0});
    }

  const int nt = std::max(1, std::min<int>(threads_for(opts.policy), int(res.types.size())));
#pragma omp parallel for num_threads(nt) schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < std::ptrdiff_t(res.types.size()); ++t) {
    auto& ty = res.types[std::size_t(t)];
    auto p = supersymbol_pmf(m, k, ty.i, ty.j);
    auto ba = detail::restricted_ba(p, edges_of, std::size_t(tuples), opts.tolerance, opts.max_iterations);
    ty.rate = ba.rate / double(k);
  }
  for (const auto& ty : res.types) res.rate += ty.weight * ty.rate;
  return res;
}

MarkovBound ub_markov(const MarkovModel& m, int k, const SolverOptions& opts) {
  MarkovBound b;
  b.k = k;
  b.detail = ktile_rate(m, k, opts);
  b.ktile = b.detail.rate;
  b.skip = cond_entropy_skip(m, k);
  b.bound = double(k) / double(k + 1) * b.ktile + b.skip / double(k + 1);
  return b;
}

std::size_t sparsity_of(const MarkovModel& m, const MaximalHypergraph& h,
                        const std::vector<std::size_t>& assignment) {
  const std::size_t n = m.states();
  std::vector<std::set<std::size_t>> succ(h.edges.size());
  for (std::size_t x = 0; x < n; ++x) {
    if (!(m.pi()[x] > 0.0)) continue;
    for (std::size_t y = 0; y < n; ++y)
      if (m.transition()[x][y] > 0.0) succ[assignment[x]].insert(assignment[y]);
  }
  std::size_t s = 0;
  for (const auto& v : succ) s = std::max(s, v.size());
  return s;
}

namespace {

SparsityReport report(const MarkovModel& m, int k, MaximalHypergraph h, std::vector<std::size_t> a,
                      bool exhaustive) {
  SparsityReport r;
  r.k = k;
  r.s = sparsity_of(m, h, a);
  std::set<std::size_t> used(a.begin(), a.end());
  for (auto e : used) r.edges.push_back(h.edges[e]);
  const double n = double(m.states());
  r.reduced_dimension = std::pow(double(r.s) * n, k);
  r.naive_dimension = std::pow(n, 2 * k);
  r.assignment = std::move(a);
  r.exhaustive = exhaustive;
  r.hypergraph = std::move(h);
  return r;
}

std::size_t distinct(const std::vector<std::size_t>& a) { return std::set<std::size_t>(a.begin(), a.end()).size(); }

}  // namespace

SparsityReport sparsity(const MarkovModel& m, int k) {
  auto h = maximal_edges(m.instance, m.eps());
  auto of = detail::edges_containing(h);
  const std::size_t n = m.states();
  double count = 1.0;
  for (const auto& l : of) count *= double(l.size());

  std::vector<std::size_t> best;
  std::size_t best_s = 0, best_d = 0;
  if (count <= 1e4) {
    std::vector<std::size_t> digit(n, 0), a(n);
    for (;;) {
      for (std::size_t x = 0; x < n; ++x) a[x] = of[x][digit[x]];
      std::size_t s = sparsity_of(m, h, a), d = distinct(a);
      if (best.empty() || s < best_s || (s == best_s && d < best_d)) {
        best = a;
        best_s = s;
        best_d = d;
      }
      std::size_t x = n;
      while (x-- > 0) {
        if (++digit[x] < of[x].size()) break;
        digit[x] = 0;
      }
      if (x == std::size_t(-1)) break;
    }
    return report(m, k, std::move(h), std::move(best), true);
  }

  // Greedy: symbols in order, each to the containing edge that keeps s smallest so far.
  std::vector<std::size_t> a(n);
  for (std::size_t x = 0; x < n; ++x) a[x] = of[x][0];
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t pick = a[x], pick_s = 0;
    bool first = true;
    for (auto e : of[x]) {
      a[x] = e;
      std::size_t s = sparsity_of(m, h, a);
      if (first || s < pick_s) {
        pick = e;
        pick_s = s;
        first = false;
      }
    }
    a[x] = pick;
  }
  return report(m, k, std::move(h), std::move(a), false);
}

SparsityReport sparsity(const MarkovModel& m, int k, const std::vector<std::size_t>& assignment) {
  auto h = maximal_edges(m.instance, m.eps());
  if (assignment.size() != m.states()) throw ValidationError("assignment needs one edge per symbol");
  for (std::size_t x = 0; x < assignment.size(); ++x)
    if (assignment[x] >= h.edges.size() || !contains(h.edges[assignment[x]], x))
      throw ValidationError("assignment puts symbol " + std::to_string(x) + " in an edge that lacks it");
  return report(m, k, std::move(h), assignment, true);
}

}  // namespace hyperrate
