#pragma once

#include <cmath>
#include <span>

namespace hyperrate {

// Entropy in bits with 0 log 0 = 0.
inline double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h += entropy_term(v);
  return h;
}

inline double binary_entropy(double p) { return entropy_term(p) + entropy_term(1.0 - p); }

}  // namespace hyperrate
