#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hyperrate/model.hpp"

namespace hyperrate {

using Point = std::vector<double>;

inline constexpr double kBoundaryTolerance = 1e-9;
inline constexpr std::size_t kMaxDimension = 8;

struct Ball {
  Point center;
  double radius = 0.0;
};

// Smallest enclosing ball. Output depends only on the point multiset.
Ball sec(std::span<const Point> points);

// sec(points).radius <= eps + kBoundaryTolerance.
bool radius_leq(std::span<const Point> points, double eps);

// |f - g| <= delta + tol at every tuple where both are specified.
bool is_delta_approximation(const FunctionTable& g, const FunctionTable& f, double delta);

// f(x, rest) is L-Lipschitz in its first domain axis over probable tuples sharing the rest.
bool lipschitz_check(const ProblemInstance& inst, const FunctionTable& f, double L);

}  // namespace hyperrate
