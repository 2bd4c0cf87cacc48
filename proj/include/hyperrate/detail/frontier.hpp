#pragma once

#include <cstddef>
#include <vector>

namespace hyperrate::detail {

struct FrontierPoint {
  double r1 = 0.0;
  double r2 = 0.0;
  std::size_t source = 0;  // caller's tag
};

// Pareto-efficient part of the convex hull of pts (upward closed region), R1 increasing.
std::vector<FrontierPoint> lower_left_hull(std::vector<FrontierPoint> pts);

struct Support {
  double value = 0.0;
  std::size_t vertex = 0;
};

// min over hull vertices of mu*R1 + (1-mu)*R2; ties by (1-mu)*R1 + mu*R2, then R1.
Support support(const std::vector<FrontierPoint>& hull, double mu);

}  // namespace hyperrate::detail
