#include "hyperrate/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "hyperrate/error.hpp"

namespace hyperrate {

namespace {

double dist(const Point& a, const Point& b) { return distance(a, b); }

bool inside(const Ball& b, const Point& p) {
  if (b.radius < 0) return false;
  return dist(b.center, p) <= b.radius + 1e-12 * (1.0 + b.radius);
}

// Ball with every point of r on its boundary, centred in their affine hull.
// Returns radius < 0 when r is affinely dependent.
Ball circumball(const std::vector<const Point*>& r) {
  const std::size_t d = r.front()->size();
  if (r.size() == 1) return {*r.front(), 0.0};
  const std::size_t m = r.size() - 1;
  Eigen::MatrixXd A(d, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < d; ++i) A(i, j) = (*r[j + 1])[i] - (*r[0])[i];
  Eigen::MatrixXd G = 2.0 * A.transpose() * A;
  Eigen::VectorXd rhs(m);
  for (std::size_t j = 0; j < m; ++j) rhs(j) = A.col(j).squaredNorm();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  lu.setThreshold(1e-12);
  if (lu.rank() < static_cast<Eigen::Index>(m)) return {{}, -1.0};
  Eigen::VectorXd lambda = lu.solve(rhs);
  Point c = *r[0];
  Eigen::VectorXd off = A * lambda;
  for (std::size_t i = 0; i < d; ++i) c[i] += off(i);
  double rad = 0.0;
  for (const Point* p : r) rad = std::max(rad, dist(c, *p));
  return {std::move(c), rad};
}

// Smallest ball enclosing a tiny set, by trying every affinely independent subset.
Ball brute_small(const std::vector<const Point*>& r) {
  Ball best{{}, std::numeric_limits<double>::infinity()};
  const std::size_t n = r.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<const Point*> sub;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) sub.push_back(r[i]);
    Ball b = circumball(sub);
    if (b.radius < 0 || b.radius >= best.radius) continue;
    double rad = 0.0;
    for (const Point* p : r) rad = std::max(rad, dist(b.center, *p));
    if (rad <= b.radius + 1e-12 * (1.0 + b.radius)) best = {b.center, rad};
  }
  return best;
}

Ball ball_from(const std::vector<const Point*>& r) {
  if (r.empty()) return {{}, -1.0};
  Ball b = circumball(r);
  if (b.radius >= 0) return b;
  return brute_small(r);
}

Ball welzl(std::vector<const Point*>& pts, std::size_t n, std::vector<const Point*>& r,
           std::size_t d) {
  if (n == 0 || r.size() == d + 1) return ball_from(r);
  const Point* p = pts[n - 1];
  Ball b = welzl(pts, n - 1, r, d);
  if (inside(b, *p)) return b;
  r.push_back(p);
  b = welzl(pts, n - 1, r, d);
  r.pop_back();
  return b;
}

std::uint64_t hash_points(const std::vector<Point>& pts) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : pts)
    for (double v : p) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
  return h;
}

}  // namespace

Ball sec(std::span<const Point> points) {
  if (points.empty()) throw ValidationError("sec: empty point set");
  const std::size_t d = points.front().size();
  if (d == 0 || d > kMaxDimension) throw ValidationError("sec: dimension must be 1..8");
  for (const auto& p : points)
    if (p.size() != d) throw ValidationError("sec: dimension mismatch");

  if (d == 1) {
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const Point& a, const Point& b) { return a[0] < b[0]; });
    double c = 0.5 * ((*lo)[0] + (*hi)[0]);
    return {{c}, 0.5 * ((*hi)[0] - (*lo)[0])};
  }

  std::vector<Point> uniq(points.begin(), points.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() == 1) return {uniq.front(), 0.0};

  std::vector<const Point*> ptrs;
  for (const auto& p : uniq) ptrs.push_back(&p);
  std::mt19937_64 rng(hash_points(uniq));
  std::shuffle(ptrs.begin(), ptrs.end(), rng);
  std::vector<const Point*> support;
  Ball b = welzl(ptrs, ptrs.size(), support, d);

  // Radius is the true max distance, so enclosure holds exactly for the returned center.
  double rad = 0.0;
  for (const auto& p : uniq) rad = std::max(rad, dist(b.center, p));
  b.radius = rad;
  return b;
}

bool radius_leq(std::span<const Point> points, double eps) {
  return sec(points).radius <= eps + kBoundaryTolerance;
}

bool is_delta_approximation(const FunctionTable& g, const FunctionTable& f, double delta) {
  if (g.shape != f.shape || g.axes != f.axes || g.dim != f.dim)
    throw ValidationError("is_delta_approximation: domain mismatch");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.is_defined(i) || !g.is_defined(i)) continue;
    if (distance(f.value(i), g.value(i)) > delta + kBoundaryTolerance) return false;
  }
  return true;
}

bool lipschitz_check(const ProblemInstance& inst, const FunctionTable& f, double L) {
  auto emb = domain_embedding(inst);
  const std::size_t xaxis = f.axes.front();
  if (emb[xaxis].empty())
    throw ValidationError("lipschitz_check: alphabet '" + inst.pmf.axis(xaxis).name +
                          "' has no numeric embedding");
  const auto& pos = emb[xaxis];
  auto m = marginal(inst.pmf, f.axes);
  const std::size_t nx = f.shape.front();
  const std::size_t rest = f.size() / nx;
  for (std::size_t c = 0; c < rest; ++c)
    for (std::size_t a = 0; a < nx; ++a)
      for (std::size_t b = a + 1; b < nx; ++b) {
        std::size_t fa = a * rest + c, fb = b * rest + c;
        if (!(m.prob(fa) > 0.0) || !(m.prob(fb) > 0.0)) continue;
        double lhs = distance(f.value(fa), f.value(fb));
        if (lhs > L * std::abs(pos[a] - pos[b]) + kBoundaryTolerance) return false;
      }
  return true;
}

}  // namespace hyperrate
