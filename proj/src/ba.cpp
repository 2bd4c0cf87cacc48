#include "hyperrate/detail/ba.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hyperrate::detail {

namespace {

struct Eval {
  double upper = 0.0;
  double lower = 0.0;
};

Eval evaluate(std::span<const double> p, const std::vector<std::vector<std::uint32_t>>& edges_of,
              const std::vector<double>& q, std::vector<double>& Q, std::vector<double>& S) {
  Eval ev;
  std::fill(S.begin(), S.end(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (!(p[x] > 0.0)) continue;
    double s = 0.0;
    for (auto w : edges_of[x]) s += q[w];
    Q[x] = s;
    ev.upper -= p[x] * std::log2(s);
    for (auto w : edges_of[x]) S[w] += p[x] / s;
  }
  double top = 0.0;
  for (double v : S) top = std::max(top, v);
  ev.lower = ev.upper - std::numbers::log2e * (top - 1.0);
  return ev;
}

}  // namespace

BaResult restricted_ba(std::span<const double> p, const std::vector<std::vector<std::uint32_t>>& edges_of,
                       std::size_t edge_count, double tolerance, std::size_t max_iterations) {
  std::vector<double> q(edge_count, 0.0), Q(p.size(), 0.0), S(edge_count, 0.0);
  std::size_t live = 0;
  for (std::size_t x = 0; x < p.size(); ++x)
    if (p[x] > 0.0)
      for (auto w : edges_of[x]) q[w] = 1.0;
  for (double v : q) live += v > 0.0;
  for (auto& v : q) v /= double(std::max<std::size_t>(live, 1));

  BaResult r;
  Eval ev = evaluate(p, edges_of, q, Q, S);
  double prev = ev.upper;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    if (ev.upper - ev.lower <= tolerance) break;
    double total = 0.0;
    for (std::size_t w = 0; w < edge_count; ++w) {
      q[w] *= S[w];
      total += q[w];
    }
    for (auto& v : q) v /= total;
    ev = evaluate(p, edges_of, q, Q, S);
    r.last_change = prev - ev.upper;
    prev = ev.upper;
    if (std::abs(r.last_change) < 1e-15) {
      ++it;
      break;
    }
  }
  r.iterations = it;
  r.upper = ev.upper;
  r.lower = std::max(0.0, ev.lower);

  // Exact I(X;W) of the induced channel.
  std::vector<double> out(edge_count, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (!(p[x] > 0.0)) continue;
    for (auto w : edges_of[x]) out[w] += p[x] * q[w] / Q[x];
  }
  double mi = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (!(p[x] > 0.0)) continue;
    for (auto w : edges_of[x]) {
      double c = q[w] / Q[x];
      if (c > 0.0) mi += p[x] * c * std::log2(c / out[w]);
    }
  }
  r.rate = std::max(0.0, mi);
  r.q = std::move(q);
  return r;
}

std::vector<double> ba_channel(std::span<const double> q,
                               const std::vector<std::vector<std::uint32_t>>& edges_of) {
  std::vector<double> out;
  for (const auto& ws : edges_of) {
    double s = 0.0;
    for (auto w : ws) s += q[w];
    for (auto w : ws) out.push_back(s > 0.0 ? q[w] / s : 1.0 / double(ws.size()));
  }
  return out;
}

}  // namespace hyperrate::detail
