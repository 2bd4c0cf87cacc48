#include "hyperrate/detail/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hyperrate::detail {

namespace {
constexpr double kTie = 1e-12;
}

std::vector<FrontierPoint> lower_left_hull(std::vector<FrontierPoint> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.r1 != b.r1) return a.r1 < b.r1;
    return a.r2 < b.r2;
  });
  std::vector<FrontierPoint> pareto;
  double best_r2 = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.r2 < best_r2 - kTie) {
      pareto.push_back(p);
      best_r2 = p.r2;
    }
  }
  std::vector<FrontierPoint> hull;
  for (const auto& c : pareto) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      double cross = (b.r1 - a.r1) * (c.r2 - a.r2) - (b.r2 - a.r2) * (c.r1 - a.r1);
      if (cross > kTie) break;
      hull.pop_back();
    }
    hull.push_back(c);
  }
  return hull;
}

Support support(const std::vector<FrontierPoint>& hull, double mu) {
  Support best{std::numeric_limits<double>::infinity(), 0};
  double best_alt = 0.0, best_r1 = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& p = hull[i];
    double v = mu * p.r1 + (1.0 - mu) * p.r2;
    double alt = (1.0 - mu) * p.r1 + mu * p.r2;
    bool take = false;
    if (v < best.value - kTie) take = true;
    else if (std::abs(v - best.value) <= kTie) {
      if (alt < best_alt - kTie) take = true;
      else if (std::abs(alt - best_alt) <= kTie && p.r1 < best_r1) take = true;
    }
    if (take) {
      best = {v, i};
      best_alt = alt;
      best_r1 = p.r1;
    }
  }
  return best;
}

}  // namespace hyperrate::detail
