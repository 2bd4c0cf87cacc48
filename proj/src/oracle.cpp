#include "hyperrate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <unordered_map>

#include <Eigen/Dense>

#include "hyperrate/error.hpp"
#include "hyperrate/info.hpp"

namespace hyperrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

// Compositions of m into k parts.
double composition_count(std::size_t m, std::size_t k) { return k == 0 ? 0.0 : binomial(m + k - 1, k - 1); }

bool next_composition(std::vector<int>& c) {
  const std::ptrdiff_t k = std::ptrdiff_t(c.size());
  std::ptrdiff_t i = k - 2;
  while (i >= 0 && c[std::size_t(i)] == 0) --i;
  if (i < 0) return false;
  int tail = c[std::size_t(k - 1)];
  c[std::size_t(i)] -= 1;
  c[std::size_t(k - 1)] = 0;
  c[std::size_t(i + 1)] = tail + 1;
  return true;
}

std::vector<std::vector<int>> all_compositions(int m, std::size_t k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k, 0);
  c[0] = m;
  do out.push_back(c);
  while (next_composition(c));
  return out;
}

double euclid(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Context view built straight from the tables: ctx[c][x] is f at (x, c) when probable.
struct Contexts {
  std::size_t symbols = 0;
  std::vector<std::vector<std::optional<Point>>> at;
};

Contexts scalar_contexts(const ProblemInstance& inst) {
  const auto& f = inst.function();
  auto m = marginal(inst.pmf, f.axes);
  Contexts c;
  c.symbols = f.shape[0];
  const std::size_t rest = f.size() / c.symbols;
  c.at.assign(rest, std::vector<std::optional<Point>>(c.symbols));
  for (std::size_t x = 0; x < c.symbols; ++x)
    for (std::size_t r = 0; r < rest; ++r) {
      std::size_t flat = x * rest + r;
      if (m.prob(flat) > 0.0 && f.is_defined(flat)) {
        auto v = f.value(flat);
        c.at[r][x] = Point(v.begin(), v.end());
      }
    }
  return c;
}

bool fits(const std::vector<Point>& pts, double eps) {
  return pts.size() <= 1 || brute_radius(pts) <= eps + kBoundaryTolerance;
}

double entropy_bound(double t, double alphabet) {
  if (t <= 0.0) return 0.0;
  if (t > 0.5 || alphabet <= 1.0) return std::log2(std::max(alphabet, 2.0));
  return t * std::log2(std::max(alphabet - 1.0, 1.0)) + binary_entropy(t);
}

void require_scalar(const ProblemInstance& inst) {
  switch (inst.setting) {
    case Setting::p2p:
    case Setting::side_info:
    case Setting::markov: return;
    default: throw ValidationError("oracle needs a p2p, side_info or markov instance");
  }
}

}  // namespace

double brute_radius(const std::vector<Point>& input) {
  if (input.empty()) throw ValidationError("brute_radius: no points");
  std::vector<Point> pts = input;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size(), d = pts[0].size();
  if (n == 1) return 0.0;
  double best = kInf;
  std::vector<std::size_t> pick;
  // Circumcentre of each affinely independent subset within its own hull.
  auto try_subset = [&]() {
    const std::size_t k = pick.size();
    Point c = pts[pick[0]];
    if (k > 1) {
      Eigen::MatrixXd G(k - 1, k - 1);
      Eigen::VectorXd b(k - 1);
      for (std::size_t i = 1; i < k; ++i) {
        for (std::size_t j = 1; j < k; ++j) {
          double s = 0.0;
          for (std::size_t t = 0; t < d; ++t)
            s += (pts[pick[i]][t] - pts[pick[0]][t]) * (pts[pick[j]][t] - pts[pick[0]][t]);
          G(Eigen::Index(i - 1), Eigen::Index(j - 1)) = s;
        }
        b(Eigen::Index(i - 1)) = 0.5 * G(Eigen::Index(i - 1), Eigen::Index(i - 1));
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
      if (lu.rank() < Eigen::Index(k - 1)) return;
      Eigen::VectorXd lam = lu.solve(b);
      for (std::size_t i = 1; i < k; ++i)
        for (std::size_t t = 0; t < d; ++t)
          c[t] += lam(Eigen::Index(i - 1)) * (pts[pick[i]][t] - pts[pick[0]][t]);
    }
    double r = 0.0;
    for (const auto& p : pts) r = std::max(r, euclid(c, p));
    best = std::min(best, r);
  };
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (!pick.empty()) try_subset();
    if (pick.size() == d + 1) return;
    for (std::size_t i = from; i < n; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

MaximalHypergraph brute_maximal_edges(const ProblemInstance& inst, double eps) {
  require_scalar(inst);
  auto ctx = scalar_contexts(inst);
  const std::size_t n = ctx.symbols;
  if (n > 16) throw CapError("brute_maximal_edges: alphabet over 16");
  const std::uint32_t total = std::uint32_t(1) << n;
  std::vector<std::uint8_t> valid(total, 0);
  for (std::uint32_t w = 1; w < total; ++w) {
    bool ok = true;
    for (const auto& row : ctx.at) {
      std::vector<Point> pts;
      for (std::size_t x = 0; x < n; ++x)
        if (((w >> x) & 1u) && row[x]) pts.push_back(*row[x]);
      if (!fits(pts, eps)) {
        ok = false;
        break;
      }
    }
    valid[w] = ok;
  }
  MaximalHypergraph h;
  h.symbols = n;
  h.eps = eps;
  h.labels = inst.pmf.axis(0).labels;
  for (std::uint32_t w = 1; w < total; ++w) {
    if (!valid[w]) continue;
    bool maximal = true;
    const std::uint32_t free = (total - 1) & ~w;
    for (std::uint32_t s = free; s && maximal; s = (s - 1) & free)
      if (valid[w | s]) maximal = false;
    if (maximal) h.edges.push_back(w);
  }
  sort_edges(h.edges);
  return h;
}

GridResult grid_restricted(const std::vector<double>& p, const std::vector<std::vector<std::uint32_t>>& edges_of,
                           std::size_t edge_count, const GridSpec& grid) {
  // Only edges reachable from a probable symbol get a coordinate.
  std::vector<int> coord(edge_count, -1);
  std::vector<std::uint32_t> live;
  for (std::size_t x = 0; x < p.size(); ++x)
    if (p[x] > 0.0)
      for (auto w : edges_of[x])
        if (coord[w] < 0) {
          coord[w] = int(live.size());
          live.push_back(w);
        }
  const std::size_t k = live.size();
  GridResult res;
  res.m = grid.m;
  if (k == 0) return res;
  if (composition_count(grid.m, k) > grid.budget)
    throw CapError("grid of " + std::to_string(composition_count(grid.m, k)) + " points exceeds budget");
  res.evaluated = composition_count(grid.m, k);

  std::vector<std::vector<int>> local(p.size());
  for (std::size_t x = 0; x < p.size(); ++x)
    if (p[x] > 0.0)
      for (auto w : edges_of[x]) local[x].push_back(coord[w]);

  const int m = int(grid.m);
  const double inv = 1.0 / double(m);
  double best_upper = kInf, best_lower = 0.0;
  const int nt = std::max(1, std::min(threads_for(grid.policy), m + 1));
#pragma omp parallel num_threads(nt)
  {
    double up = kInf, lo = 0.0;
    std::vector<double> S(k);
    std::vector<int> c(k);
#pragma omp for schedule(dynamic)
    for (int first = 0; first <= m; ++first) {
      std::vector<int> tail(k - 1, 0);
      if (k > 1) tail[0] = m - first;
      else if (first != m) continue;
      do {
        c[0] = first;
        for (std::size_t i = 1; i < k; ++i) c[i] = tail[i - 1];
        double F = 0.0;
        bool finite = true;
        std::fill(S.begin(), S.end(), 0.0);
        for (std::size_t x = 0; x < p.size() && finite; ++x) {
          if (!(p[x] > 0.0)) continue;
          int Q = 0;
          for (int w : local[x]) Q += c[std::size_t(w)];
          if (Q == 0) {
            finite = false;
            break;
          }
          double q = Q * inv;
          F -= p[x] * std::log2(q);
          for (int w : local[x]) S[std::size_t(w)] += p[x] / q;
        }
        if (!finite) continue;
        double top = *std::max_element(S.begin(), S.end());
        up = std::min(up, F);
        lo = std::max(lo, F - std::numbers::log2e * (top - 1.0));
      } while (k > 1 && next_composition(tail));
    }
#pragma omp critical
    {
      best_upper = std::min(best_upper, up);
      best_lower = std::max(best_lower, lo);
    }
  }
  res.value = std::max(0.0, best_upper);
  res.lower = std::min(res.value, best_lower);
  res.tolerance = res.value - res.lower;
  return res;
}

namespace {

GridResult grid_side_info(const ProblemInstance& inst, double eps, const GridSpec& grid) {
  auto h = brute_maximal_edges(inst, eps);
  const std::size_t nx = inst.pmf.shape()[0], ny = inst.pmf.shape()[1], ne = h.edges.size();
  std::vector<std::vector<std::size_t>> of(nx);
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t x = 0; x < nx; ++x)
      if (contains(h.edges[e], x)) of[x].push_back(e);
  auto px = marginal(inst.pmf, {0}).probs();
  auto py = marginal(inst.pmf, {1}).probs();

  std::vector<std::vector<std::vector<int>>> rows(nx);
  double count = 1.0;
  for (std::size_t x = 0; x < nx; ++x) {
    rows[x] = px[x] > 0.0 ? all_compositions(int(grid.m), of[x].size()) : std::vector<std::vector<int>>{{}};
    count *= double(rows[x].size());
  }
  if (count > grid.budget) throw CapError("side-information channel grid exceeds budget");

  GridResult res;
  res.m = grid.m;
  res.evaluated = count;
  const std::uint64_t total = std::uint64_t(count);
  const double inv = 1.0 / double(grid.m);
  double best = kInf;
  const int nt = std::max(1, std::min<int>(threads_for(grid.policy), int(std::min<std::uint64_t>(total, 1024))));
#pragma omp parallel num_threads(nt)
  {
    double mine = kInf;
    std::vector<double> wy(ne * ny);
#pragma omp for schedule(static)
    for (std::int64_t idx = 0; idx < std::int64_t(total); ++idx) {
      std::uint64_t r = std::uint64_t(idx);
      std::fill(wy.begin(), wy.end(), 0.0);
      double cond = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        const auto& row = rows[x][r % rows[x].size()];
        r /= rows[x].size();
        if (!(px[x] > 0.0)) continue;
        std::vector<double> c(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) c[j] = row[j] * inv;
        cond += px[x] * entropy(c);
        for (std::size_t y = 0; y < ny; ++y) {
          std::size_t i2[2] = {x, y};
          double p = inst.pmf.prob(i2);
          for (std::size_t j = 0; j < row.size(); ++j) wy[of[x][j] * ny + y] += p * c[j];
        }
      }
      mine = std::min(mine, entropy(wy) - entropy(py) - cond);
    }
#pragma omp critical
    best = std::min(best, mine);
  }
  res.value = std::max(0.0, best);

  // Nearest grid row is within total variation (deg-1)/m of any row.
  double T = 0.0, cond_tol = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    double t = of[x].size() > 1 ? double(of[x].size() - 1) / double(grid.m) : 0.0;
    T = std::max(T, t);
    cond_tol += px[x] * entropy_bound(t, double(of[x].size()));
  }
  res.tolerance = entropy_bound(T, double(ne * ny)) + cond_tol;
  res.lower = std::max(0.0, res.value - res.tolerance);
  return res;
}

}  // namespace

GridResult grid_min_rate(const ProblemInstance& inst, double eps, const GridSpec& grid) {
  require_scalar(inst);
  if (grid.m < 2) throw ValidationError("grid resolution must be >= 2");
  if (inst.setting == Setting::side_info) return grid_side_info(inst, eps, grid);
  auto h = brute_maximal_edges(inst, eps);
  std::vector<std::vector<std::uint32_t>> of(h.symbols);
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    for (std::size_t x = 0; x < h.symbols; ++x)
      if (contains(h.edges[e], x)) of[x].push_back(std::uint32_t(e));
  return grid_restricted(marginal(inst.pmf, {0}).probs(), of, h.edges.size(), grid);
}

GridResult grid_ktile_rate(const MarkovModel& m, int k, const GridSpec& grid) {
  auto h = brute_maximal_edges(m.instance, m.eps());
  auto edges_of = tuple_edges(h, k);
  const std::size_t tuples = std::size_t(std::pow(double(h.edges.size()), k));
  const std::size_t n = m.states();
  const auto& P = m.transition();

  // Pr[X_1 = i, X_{k+2} = j] by direct path sums.
  std::vector<double> reach(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    for (int s = 0; s < k + 1; ++s) {
      std::vector<double> nv(n, 0.0);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) nv[b] += v[a] * P[a][b];
      v.swap(nv);
    }
    for (std::size_t j = 0; j < n; ++j) reach[i * n + j] = m.pi()[i] * v[j];
  }
  std::size_t types = 0;
  for (double w : reach) types += w > 0.0;

  GridSpec per = grid;
  per.budget = grid.budget / double(std::max<std::size_t>(types, 1));
  GridResult res;
  res.m = grid.m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double w = reach[i * n + j];
      if (!(w > 0.0)) continue;
      auto g = grid_restricted(supersymbol_pmf(m, k, i, j), edges_of, tuples, per);
      res.value += w * g.value / double(k);
      res.lower += w * g.lower / double(k);
      res.evaluated += g.evaluated;
    }
  res.tolerance = res.value - res.lower;
  return res;
}

Audit verify_zero_distortion(const ProblemInstance& inst, const std::vector<TestChannel>& channels,
                             const std::vector<Decoder>& decoders) {
  const auto& pmf = inst.pmf;
  std::vector<std::size_t> coord_base;
  std::size_t coords = 0;
  for (const auto& ch : channels) {
    coord_base.push_back(coords);
    coords += ch.output_shape.size();
    if (ch.probs.size() != ch.input_size() * ch.output_size() || ch.mask.size() != ch.probs.size())
      return {false, "channel '" + ch.name + "' has inconsistent dimensions"};
    for (std::size_t k = 0; k < ch.inputs.size(); ++k)
      if (ch.inputs[k] >= pmf.rank() || ch.input_shape[k] != pmf.shape()[ch.inputs[k]])
        return {false, "channel '" + ch.name + "' does not match the source axes"};
  }
  for (const auto& d : decoders)
    for (auto c : d.sees)
      if (c >= coords) return {false, "decoder reads a missing output coordinate"};

  std::vector<std::map<std::vector<std::size_t>, std::vector<Point>>> groups(decoders.size());
  std::vector<std::size_t> out(coords);

  for (std::size_t s = 0; s < pmf.size(); ++s) {
    if (!(pmf.prob(s) > 0.0)) continue;
    auto idx = pmf.unflatten(s);
    std::vector<std::size_t> row(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto& ch = channels[c];
      std::size_t r = 0;
      for (std::size_t k = 0; k < ch.inputs.size(); ++k) r = r * ch.input_shape[k] + idx[ch.inputs[k]];
      row[c] = r;
      double total = 0.0;
      for (std::size_t o = 0; o < ch.output_size(); ++o) {
        double v = ch.at(r, o);
        if (v < 0.0) return {false, "channel '" + ch.name + "' has a negative entry"};
        if (v > 0.0 && !ch.mask[r * ch.output_size() + o])
          return {false, "channel '" + ch.name + "' puts mass outside its support mask"};
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) return {false, "channel '" + ch.name + "' row does not sum to 1"};
    }

    std::vector<double> fvals;
    std::function<Audit(std::size_t)> walk = [&](std::size_t c) -> Audit {
      if (c == channels.size()) {
        for (std::size_t d = 0; d < decoders.size(); ++d) {
          const auto& dec = decoders[d];
          const auto& f = inst.function(dec.function);
          std::vector<std::size_t> dom;
          for (auto a : f.axes) dom.push_back(idx[a]);
          std::size_t fl = f.flatten(dom);
          if (!f.is_defined(fl)) continue;
          auto v = f.value(fl);
          Point val(v.begin(), v.end());
          std::vector<std::size_t> obs;
          for (auto k : dec.sees) obs.push_back(out[k]);
          for (auto a : dec.side) obs.push_back(idx[a]);
          if (dec.table.empty()) {
            groups[d][obs].push_back(std::move(val));
            continue;
          }
          auto it = dec.table.find(obs);
          if (it == dec.table.end()) return {false, "decoder for '" + f.name + "' has no reconstruction for a reachable observation"};
          if (euclid(it->second, val) > dec.eps + kBoundaryTolerance)
            return {false, "'" + f.name + "' reconstructed outside tolerance"};
        }
        return {};
      }
      const auto& ch = channels[c];
      for (std::size_t o = 0; o < ch.output_size(); ++o) {
        if (!(ch.at(row[c], o) > 0.0)) continue;
        auto digits = ch.unflatten_output(o);
        for (std::size_t k = 0; k < digits.size(); ++k) out[coord_base[c] + k] = digits[k];
        auto a = walk(c + 1);
        if (!a) return a;
      }
      return {};
    };
    auto a = walk(0);
    if (!a) return a;
  }
  for (std::size_t d = 0; d < decoders.size(); ++d)
    for (const auto& [obs, pts] : groups[d])
      if (!fits(pts, decoders[d].eps))
        return {false, "no reconstruction of '" + inst.function(decoders[d].function).name + "' fits a reachable observation"};
  return {};
}

namespace {

// Output k of ch must be an edge of h containing the channel's symbol on pmf axis `axis`.
Audit check_membership(const TestChannel& ch, std::size_t k, std::size_t axis, const MaximalHypergraph& h) {
  auto pos = std::find(ch.inputs.begin(), ch.inputs.end(), axis);
  if (pos == ch.inputs.end()) return {false, "channel '" + ch.name + "' does not read the edge axis"};
  const std::size_t ip = std::size_t(pos - ch.inputs.begin());
  if (ch.output_shape[k] != h.edges.size()) return {false, "channel '" + ch.name + "' output size mismatch"};
  for (std::size_t r = 0; r < ch.input_size(); ++r) {
    std::size_t rem = r, sym = 0;
    for (std::size_t i = ch.inputs.size(); i-- > 0;) {
      if (i == ip) sym = rem % ch.input_shape[i];
      rem /= ch.input_shape[i];
    }
    for (std::size_t o = 0; o < ch.output_size(); ++o)
      if (ch.at(r, o) > 0.0 && !contains(h.edges[ch.unflatten_output(o)[k]], sym))
        return {false, "channel '" + ch.name + "' maps a symbol to an edge that lacks it"};
  }
  return {};
}

// Decoder reading output coordinate `coord`, reconstructing with h's ball centers. With
// several contexts (side information on `side_axis`) the key is (edge, context).
Decoder edge_decoder(std::size_t fn, double eps, std::size_t coord, const MaximalHypergraph& h,
                     std::optional<std::size_t> side_axis) {
  Decoder d;
  d.function = fn;
  d.eps = eps;
  d.sees = {coord};
  if (side_axis) d.side = {*side_axis};
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    for (std::size_t c = 0; c < h.balls[e].size(); ++c) {
      if (!h.balls[e][c]) continue;
      std::vector<std::size_t> key{e};
      if (side_axis) key.push_back(c);
      d.table[key] = h.balls[e][c]->center;
    }
  return d;
}

Decoder pair_decoder(double eps, const HypergraphPair& pair) {
  Decoder d;
  d.function = 0;
  d.eps = eps;
  d.sees = {0, 1};
  for (std::size_t a = 0; a < pair.pair_balls.size(); ++a)
    for (std::size_t b = 0; b < pair.pair_balls[a].size(); ++b)
      if (pair.pair_balls[a][b]) d.table[{a, b}] = pair.pair_balls[a][b]->center;
  return d;
}

Audit distributed_audit(const ProblemInstance& inst, const std::vector<TestChannel>& chs,
                        const HypergraphPair& pair) {
  if (chs.size() != 2) return {false, "distributed result needs two channels"};
  for (int i = 0; i < 2; ++i) {
    auto a = check_membership(chs[std::size_t(i)], 0, std::size_t(i), pair.sides[std::size_t(i)]);
    if (!a) return a;
  }
  return verify_zero_distortion(inst, chs, {pair_decoder(pair.eps, pair)});
}

// Joint channel whose output k serves function k through hypergraph k.
Audit joint_audit(const ProblemInstance& inst, const std::vector<TestChannel>& chs,
                  const std::vector<MaximalHypergraph>& hs, const std::vector<std::size_t>& functions) {
  if (chs.size() != 1) return {false, "joint result needs one channel"};
  std::vector<Decoder> decs;
  for (std::size_t k = 0; k < functions.size(); ++k) {
    const auto& f = inst.function(functions[k]);
    auto a = check_membership(chs[0], k, f.axes.front(), hs[k]);
    if (!a) return a;
    if (hs[k].balls.empty() || hs[k].balls[0].size() != 1) {
      Decoder d;
      d.function = functions[k];
      d.eps = hs[k].eps;
      d.sees = {k};
      decs.push_back(d);
    } else {
      decs.push_back(edge_decoder(functions[k], hs[k].eps, k, hs[k], std::nullopt));
    }
  }
  return verify_zero_distortion(inst, chs, decs);
}

}  // namespace

Audit verify_zero_distortion(const ProblemInstance& inst, const RateResult& r, double eps) {
  if (inst.setting == Setting::distributed) {
    if (!r.pair) return {false, "distributed result carries no hypergraph pair"};
    return distributed_audit(inst, r.channels, *r.pair);
  }
  require_scalar(inst);
  if (r.channels.size() != 1 || r.hypergraphs.size() != 1) return {false, "scalar result needs one channel and one hypergraph"};
  const auto& h = r.hypergraphs[0];
  auto a = check_membership(r.channels[0], 0, 0, h);
  if (!a) return a;
  std::optional<std::size_t> side;
  if (inst.function().axes.size() > 1) side = inst.function().axes[1];
  return verify_zero_distortion(inst, r.channels, {edge_decoder(0, eps, 0, h, side)});
}

Audit verify_zero_distortion(const ProblemInstance& inst, const RateRegion& r) {
  for (std::size_t v = 0; v < r.frontier.size(); ++v) {
    const auto& chs = r.frontier[v].channels;
    Audit a;
    switch (inst.setting) {
      case Setting::distributed:
        if (!r.pair) return {false, "distributed region carries no hypergraph pair"};
        a = distributed_audit(inst, chs, *r.pair);
        break;
      case Setting::mdc: a = joint_audit(inst, chs, r.hypergraphs, {0, 1, 2}); break;
      case Setting::successive_refinement:
      case Setting::cascade: a = joint_audit(inst, chs, r.hypergraphs, {0, 1}); break;
      default: return {false, "region audit needs a multiterminal instance"};
    }
    if (!a) {
      a.failure = "frontier vertex " + std::to_string(v) + ": " + a.failure;
      return a;
    }
  }
  return {};
}

namespace {

struct Candidate {
  std::vector<int> cells;  // row-major [x][u], in units of 1/m
  std::uint32_t pattern = 0;
  double cond = 0.0;       // sum_x p(x) H(U | X = x)
};

// Canonical channels (columns in non-increasing lexicographic order) over n rows, a outputs.
std::vector<Candidate> terminal_candidates(const std::vector<double>& px, std::size_t a, std::size_t m) {
  auto rows = all_compositions(int(m), a);
  const std::size_t n = px.size();
  std::vector<Candidate> out;
  std::vector<std::size_t> digit(n, 0);
  const double inv = 1.0 / double(m);
  for (;;) {
    Candidate c;
    c.cells.resize(n * a);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t u = 0; u < a; ++u) c.cells[x * a + u] = rows[digit[x]][u];
    bool canonical = true;
    for (std::size_t u = 0; u + 1 < a && canonical; ++u)
      for (std::size_t x = 0; x < n; ++x) {
        int l = c.cells[x * a + u], r = c.cells[x * a + u + 1];
        if (l != r) {
          canonical = l > r;
          break;
        }
      }
    if (canonical) {
      for (std::size_t i = 0; i < n * a; ++i)
        if (c.cells[i] > 0) c.pattern |= std::uint32_t(1) << i;
      for (std::size_t x = 0; x < n; ++x) {
        double h = 0.0;
        for (std::size_t u = 0; u < a; ++u) h += entropy_term(c.cells[x * a + u] * inv);
        c.cond += px[x] * h;
      }
      out.push_back(std::move(c));
    }
    std::size_t x = n;
    while (x-- > 0) {
      if (++digit[x] < rows.size()) break;
      digit[x] = 0;
    }
    if (x == std::size_t(-1)) break;
  }
  return out;
}

double canonical_estimate(std::size_t n, std::size_t a, std::size_t m) {
  double f = 1.0;
  for (std::size_t i = 2; i <= a; ++i) f *= double(i);
  return std::pow(composition_count(m, a), double(n)) / f;
}

std::size_t aux_size(const GridSpec& g, std::size_t n) { return g.aux_cap ? g.aux_cap : n; }

}  // namespace

double aux_search_count(const ProblemInstance& inst, const GridSpec& grid) {
  if (inst.setting == Setting::distributed) {
    const auto& s = inst.pmf.shape();
    return canonical_estimate(s[0], aux_size(grid, s[0]), grid.m) *
           canonical_estimate(s[1], aux_size(grid, s[1]), grid.m);
  }
  const std::size_t n = inst.pmf.shape()[0];
  return canonical_estimate(n, aux_size(grid, n), grid.m);
}

AuxResult general_aux_search(const ProblemInstance& inst, double eps, const GridSpec& grid) {
  if (grid.m < 2) throw ValidationError("grid resolution must be >= 2");
  if (aux_search_count(inst, grid) > grid.budget)
    throw CapError("auxiliary search of ~" + std::to_string(aux_search_count(inst, grid)) + " candidates exceeds budget");
  const double inv = 1.0 / double(grid.m);
  AuxResult res;
  res.m = grid.m;

  if (inst.setting == Setting::distributed) {
    const std::size_t n1 = inst.pmf.shape()[0], n2 = inst.pmf.shape()[1];
    const std::size_t a1 = aux_size(grid, n1), a2 = aux_size(grid, n2);
    if (n1 * a1 > 32 || n2 * a2 > 32) throw CapError("auxiliary alphabets too large for the pattern index");
    res.aux_sizes = {a1, a2};
    auto p1 = marginal(inst.pmf, {0}).probs(), p2 = marginal(inst.pmf, {1}).probs();
    auto G1 = terminal_candidates(p1, a1, grid.m), G2 = terminal_candidates(p2, a2, grid.m);
    res.evaluated = double(G1.size()) * double(G2.size());

    // Feasibility depends on supports only.
    auto pattern_ids = [](const std::vector<Candidate>& G, std::vector<std::uint32_t>& pats) {
      std::unordered_map<std::uint32_t, std::size_t> id;
      std::vector<std::size_t> of(G.size());
      for (std::size_t i = 0; i < G.size(); ++i) {
        auto [it, fresh] = id.emplace(G[i].pattern, pats.size());
        if (fresh) pats.push_back(G[i].pattern);
        of[i] = it->second;
      }
      return of;
    };
    std::vector<std::uint32_t> pats1, pats2;
    auto id1 = pattern_ids(G1, pats1);
    auto id2 = pattern_ids(G2, pats2);
    const auto& f = inst.function();
    std::vector<std::uint8_t> feas(pats1.size() * pats2.size());
    const int nt = std::max(1, threads_for(grid.policy));
#pragma omp parallel for num_threads(nt) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(pats1.size()); ++i)
      for (std::size_t j = 0; j < pats2.size(); ++j) {
        bool ok = true;
        for (std::size_t u1 = 0; u1 < a1 && ok; ++u1)
          for (std::size_t u2 = 0; u2 < a2 && ok; ++u2) {
            std::vector<Point> pts;
            for (std::size_t x1 = 0; x1 < n1; ++x1) {
              if (!((pats1[std::size_t(i)] >> (x1 * a1 + u1)) & 1u)) continue;
              for (std::size_t x2 = 0; x2 < n2; ++x2) {
                if (!((pats2[j] >> (x2 * a2 + u2)) & 1u)) continue;
                std::size_t idx[2] = {x1, x2};
                if (!(inst.pmf.prob(idx) > 0.0)) continue;
                auto v = f.value(f.flatten(idx));
                pts.emplace_back(v.begin(), v.end());
              }
            }
            ok = fits(pts, eps);
          }
        feas[std::size_t(i) * pats2.size() + j] = ok;
      }

    double best = kInf;
#pragma omp parallel num_threads(nt)
    {
      double mine = kInf;
      std::vector<double> M(n2 * a1), joint(a1 * a2);
#pragma omp for schedule(dynamic)
      for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(G1.size()); ++i) {
        const auto& c1 = G1[std::size_t(i)];
        // M[x2][u1] = sum_x1 p(x1, x2) c1(u1 | x1)
        std::fill(M.begin(), M.end(), 0.0);
        for (std::size_t x1 = 0; x1 < n1; ++x1)
          for (std::size_t x2 = 0; x2 < n2; ++x2) {
            std::size_t idx[2] = {x1, x2};
            double p = inst.pmf.prob(idx);
            if (!(p > 0.0)) continue;
            for (std::size_t u1 = 0; u1 < a1; ++u1) M[x2 * a1 + u1] += p * c1.cells[x1 * a1 + u1] * inv;
          }
        for (std::size_t j = 0; j < G2.size(); ++j) {
          if (!feas[id1[std::size_t(i)] * pats2.size() + id2[j]]) continue;
          const auto& c2 = G2[j];
          std::fill(joint.begin(), joint.end(), 0.0);
          for (std::size_t x2 = 0; x2 < n2; ++x2)
            for (std::size_t u2 = 0; u2 < a2; ++u2) {
              int w = c2.cells[x2 * a2 + u2];
              if (!w) continue;
              for (std::size_t u1 = 0; u1 < a1; ++u1) joint[u1 * a2 + u2] += M[x2 * a1 + u1] * w * inv;
            }
          mine = std::min(mine, entropy(joint) - c1.cond - c2.cond);
        }
      }
#pragma omp critical
      best = std::min(best, mine);
    }
    res.found = best < kInf;
    res.value = res.found ? std::max(0.0, best) : kInf;
    const double t1 = double(a1 - 1) / double(grid.m), t2 = double(a2 - 1) / double(grid.m);
    res.certificate = entropy_bound(t1 + t2, double(a1 * a2)) + entropy_bound(t1, double(a1)) +
                      entropy_bound(t2, double(a2));
    return res;
  }

  require_scalar(inst);
  const std::size_t nx = inst.pmf.shape()[0];
  const std::size_t a = aux_size(grid, nx);
  if (nx * a > 32) throw CapError("auxiliary alphabet too large for the pattern index");
  res.aux_sizes = {a};
  auto px = marginal(inst.pmf, {0}).probs();
  auto G = terminal_candidates(px, a, grid.m);
  res.evaluated = double(G.size());
  auto ctx = scalar_contexts(inst);
  const bool side = inst.setting == Setting::side_info;
  const std::size_t ny = side ? inst.pmf.shape()[1] : 1;
  std::vector<double> py = side ? marginal(inst.pmf, {1}).probs() : std::vector<double>{1.0};

  std::unordered_map<std::uint32_t, bool> memo;
  auto feasible = [&](std::uint32_t pat) {
    auto it = memo.find(pat);
    if (it != memo.end()) return it->second;
    bool ok = true;
    for (std::size_t u = 0; u < a && ok; ++u)
      for (const auto& row : ctx.at) {
        std::vector<Point> pts;
        for (std::size_t x = 0; x < nx; ++x)
          if (((pat >> (x * a + u)) & 1u) && row[x]) pts.push_back(*row[x]);
        if (!fits(pts, eps)) {
          ok = false;
          break;
        }
      }
    memo.emplace(pat, ok);
    return ok;
  };
  double best = kInf;
  std::vector<double> uy(a * ny);
  for (const auto& c : G) {
    if (!feasible(c.pattern)) continue;
    std::fill(uy.begin(), uy.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        double p;
        if (side) {
          std::size_t idx[2] = {x, y};
          p = inst.pmf.prob(idx);
        } else {
          p = px[x];
        }
        for (std::size_t u = 0; u < a; ++u) uy[u * ny + y] += p * c.cells[x * a + u] * inv;
      }
    best = std::min(best, entropy(uy) - entropy(py) - c.cond);
  }
  res.found = best < kInf;
  res.value = res.found ? std::max(0.0, best) : kInf;
  const double t = double(a - 1) / double(grid.m);
  res.certificate = entropy_bound(t, double(a * ny)) + entropy_bound(t, double(a));
  return res;
}

}  // namespace hyperrate
