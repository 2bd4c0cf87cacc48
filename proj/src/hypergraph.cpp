#include "hyperrate/hypergraph.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "hyperrate/error.hpp"

namespace hyperrate {

ContextTable make_contexts(const ProblemInstance& inst, std::size_t fn, std::size_t edge_axis) {
  const FunctionTable& f = inst.function(fn);
  auto it = std::find(f.axes.begin(), f.axes.end(), edge_axis);
  if (it == f.axes.end()) throw SolverError("function '" + f.name + "' does not depend on that axis");
  const std::size_t pos = static_cast<std::size_t>(it - f.axes.begin());
  const std::size_t n = f.shape[pos];
  if (n > kMaxAlphabetSize) throw CapError("alphabet over cap");

  std::vector<std::size_t> other;
  for (std::size_t i = 0; i < f.axes.size(); ++i)
    if (i != pos) other.push_back(i);
  std::size_t nctx = 1;
  for (auto i : other) nctx *= f.shape[i];

  auto m = marginal(inst.pmf, f.axes);
  ContextTable t;
  t.symbols = n;
  t.symbol_labels = inst.pmf.axis(edge_axis).labels;
  t.contexts.assign(nctx, std::vector<std::optional<Point>>(n));
  std::vector<std::size_t> idx(f.axes.size());
  for (std::size_t c = 0; c < nctx; ++c) {
    std::size_t r = c;
    std::string label;
    for (std::size_t k = other.size(); k-- > 0;) {
      idx[other[k]] = r % f.shape[other[k]];
      r /= f.shape[other[k]];
    }
    for (std::size_t k = 0; k < other.size(); ++k) {
      if (k) label += ",";
      label += inst.pmf.axis(f.axes[other[k]]).labels[idx[other[k]]];
    }
    t.context_labels.push_back(label);
    for (std::size_t x = 0; x < n; ++x) {
      idx[pos] = x;
      std::size_t flat = f.flatten(idx);
      if (m.prob(flat) > 0.0 && f.is_defined(flat)) {
        auto v = f.value(flat);
        t.contexts[c][x] = Point(v.begin(), v.end());
      }
    }
  }
  return t;
}

namespace {

std::vector<Point> context_points(const ContextTable& t, std::size_t c, SymbolSet w) {
  std::vector<Point> pts;
  for (auto x : members(w))
    if (t.contexts[c][x]) pts.push_back(*t.contexts[c][x]);
  return pts;
}

class Family {
 public:
  Family(const ContextTable& t, double eps) : t_(t), eps_(eps) {}

  bool valid(SymbolSet w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    bool ok = edge_valid(t_, w, eps_);
    memo_.emplace(w, ok);
    return ok;
  }

  bool maximal(SymbolSet w) {
    for (std::size_t x = 0; x < t_.symbols; ++x)
      if (!contains(w, x) && valid(w | singleton(x))) return false;
    return true;
  }

  std::vector<SymbolSet> maximal_sets() {
    found_.clear();
    dfs(0, full_set(t_.symbols));
    return {found_.begin(), found_.end()};
  }

  // Every valid set; throws past cap.
  std::vector<SymbolSet> all_valid(std::size_t cap) {
    std::vector<SymbolSet> out;
    grow(0, 0, cap, out);
    return out;
  }

 private:
  void record(SymbolSet w) {
    if (maximal(w)) found_.insert(w);
  }

  void dfs(SymbolSet w, SymbolSet cand) {
    if (cand == 0) {
      record(w);
      return;
    }
    if (valid(w | cand)) {
      record(w | cand);
      return;
    }
    for (auto e : members(cand)) {
      SymbolSet next = w | singleton(e);
      SymbolSet sub = 0;
      for (auto e2 : members(cand))
        if (e2 > e && valid(next | singleton(e2))) sub |= singleton(e2);
      dfs(next, sub);
    }
  }

  void grow(SymbolSet w, std::size_t from, std::size_t cap, std::vector<SymbolSet>& out) {
    for (std::size_t x = from; x < t_.symbols; ++x) {
      SymbolSet next = w | singleton(x);
      if (!valid(next)) continue;
      out.push_back(next);
      if (out.size() > cap)
        throw CapError("valid hyperedge family exceeds " + std::to_string(cap) + " edges");
      grow(next, x + 1, cap, out);
    }
  }

  const ContextTable& t_;
  double eps_;
  std::unordered_map<SymbolSet, bool> memo_;
  std::set<SymbolSet> found_;
};

void check_symbol_count(std::size_t n) {
  if (n > kMaxAlphabetSize) throw CapError("alphabet over cap");
}

}  // namespace

bool edge_valid(const ContextTable& t, SymbolSet w, double eps) {
  for (std::size_t c = 0; c < t.contexts.size(); ++c) {
    auto pts = context_points(t, c, w);
    if (pts.size() <= 1) continue;
    if (!radius_leq(pts, eps)) return false;
  }
  return true;
}

bool edge_valid(SymbolSet w, const ProblemInstance& inst, double eps) {
  return edge_valid(make_contexts(inst, 0, 0), w, eps);
}

void sort_edges(std::vector<SymbolSet>& edges) {
  std::sort(edges.begin(), edges.end(),
            [](SymbolSet a, SymbolSet b) { return members(a) < members(b); });
}

MaximalHypergraph with_balls(const ContextTable& t, std::vector<SymbolSet> edges, double eps) {
  MaximalHypergraph h;
  h.symbols = t.symbols;
  h.eps = eps;
  h.labels = t.symbol_labels;
  h.context_labels = t.context_labels;
  sort_edges(edges);
  h.edges = std::move(edges);
  for (auto w : h.edges) {
    std::vector<std::optional<Ball>> row;
    for (std::size_t c = 0; c < t.contexts.size(); ++c) {
      auto pts = context_points(t, c, w);
      if (pts.empty()) row.emplace_back();
      else row.emplace_back(sec(pts));
    }
    h.balls.push_back(std::move(row));
  }
  return h;
}

MaximalHypergraph maximal_edges(const ContextTable& t, double eps) {
  check_symbol_count(t.symbols);
  Family fam(t, eps);
  return with_balls(t, fam.maximal_sets(), eps);
}

MaximalHypergraph maximal_edges(const ProblemInstance& inst, double eps) {
  switch (inst.setting) {
    case Setting::p2p:
    case Setting::side_info:
    case Setting::markov: break;
    default: throw SolverError("maximal_edges needs a p2p, side_info or markov instance");
  }
  return maximal_edges(make_contexts(inst, 0, 0), eps);
}

MaximalHypergraph maximal_edges_for(const ProblemInstance& inst, std::size_t fn, double eps) {
  const auto& f = inst.function(fn);
  return maximal_edges(make_contexts(inst, fn, f.axes.front()), eps);
}

bool edges_overlap(const MaximalHypergraph& h) {
  SymbolSet seen = 0;
  for (auto w : h.edges) {
    if (seen & w) return true;
    seen |= w;
  }
  return false;
}

bool is_antichain(const std::vector<SymbolSet>& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = 0; j < edges.size(); ++j)
      if (i != j && (edges[i] & edges[j]) == edges[i]) return false;
  return true;
}

bool is_cover(const std::vector<SymbolSet>& edges, std::size_t symbols) {
  SymbolSet u = 0;
  for (auto w : edges) u |= w;
  return u == full_set(symbols);
}

std::string edge_string(const MaximalHypergraph& h, SymbolSet w) {
  std::string s = "{";
  bool first = true;
  for (auto x : members(w)) {
    if (!first) s += ",";
    s += x < h.labels.size() ? h.labels[x] : std::to_string(x);
    first = false;
  }
  return s + "}";
}

std::string edges_string(const MaximalHypergraph& h) {
  std::string s;
  for (std::size_t i = 0; i < h.edges.size(); ++i) {
    if (i) s += " ";
    s += edge_string(h, h.edges[i]);
  }
  return s;
}

std::string fingerprint(const MaximalHypergraph& h) {
  std::uint64_t v = 1469598103934665603ULL;
  for (auto w : h.edges) {
    for (int b = 0; b < 4; ++b) {
      v ^= (w >> (8 * b)) & 0xffu;
      v *= 1099511628211ULL;
    }
    v ^= 0xff;
    v *= 1099511628211ULL;
  }
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08llx", static_cast<unsigned long long>(v & 0xffffffffULL));
  return buf;
}

bool condition1_holds(const ProblemInstance& inst) {
  if (inst.setting != Setting::side_info) throw SolverError("condition1_holds needs a side_info instance");
  const auto& f = inst.function();
  const auto& pmf = inst.pmf;
  const std::size_t nx = pmf.shape()[0], ny = pmf.shape()[1];
  for (std::size_t y = 0; y < ny; ++y) {
    std::vector<std::size_t> probable, absent;
    for (std::size_t x = 0; x < nx; ++x) {
      std::size_t idx[2] = {x, y};
      (pmf.prob(idx) > 0.0 ? probable : absent).push_back(x);
    }
    if (probable.empty() || absent.empty()) continue;
    auto value_at = [&](std::size_t x) {
      std::size_t idx[2] = {x, y};
      return f.flatten(idx);
    };
    auto ref = f.value(value_at(probable.front()));
    // "?" entries at absent tuples can take any value, so only a common probable value
    // can be matched by all of them.
    for (auto x : probable)
      if (distance(f.value(value_at(x)), ref) > 1e-12) return false;
    for (auto x : absent) {
      std::size_t k = value_at(x);
      if (f.is_defined(k) && distance(f.value(k), ref) > 1e-12) return false;
    }
  }
  return true;
}

std::vector<Point> pair_points(const ProblemInstance& inst, SymbolSet w1, SymbolSet w2) {
  const auto& f = inst.function();
  std::vector<Point> pts;
  for (auto a : members(w1))
    for (auto b : members(w2)) {
      std::size_t idx[2] = {a, b};
      if (!(inst.pmf.prob(idx) > 0.0)) continue;
      std::size_t k = f.flatten(idx);
      if (!f.is_defined(k)) continue;
      auto v = f.value(k);
      pts.emplace_back(v.begin(), v.end());
    }
  return pts;
}

HypergraphPair maximal_pair(const ProblemInstance& inst, double eps) {
  if (inst.setting != Setting::distributed) throw SolverError("maximal_pair needs a distributed instance");
  std::array<ContextTable, 2> tables = {make_contexts(inst, 0, 0), make_contexts(inst, 0, 1)};
  std::array<std::vector<SymbolSet>, 2> fam;
  for (int i = 0; i < 2; ++i) {
    check_symbol_count(tables[i].symbols);
    Family f(tables[i], eps);
    fam[i] = f.all_valid(kMaxPairFamily);
    sort_edges(fam[i]);
  }

  auto admissible = [&](SymbolSet w1, SymbolSet w2) {
    auto pts = pair_points(inst, w1, w2);
    return pts.size() <= 1 || radius_leq(pts, eps);
  };
  std::vector<std::vector<std::uint8_t>> adm(fam[0].size(), std::vector<std::uint8_t>(fam[1].size()));
  for (std::size_t a = 0; a < fam[0].size(); ++a)
    for (std::size_t b = 0; b < fam[1].size(); ++b) adm[a][b] = admissible(fam[0][a], fam[1][b]);

  // Drop w when a strict superset is admissible with everything w is admissible with.
  auto survivors = [&](int side) {
    const auto& mine = fam[side];
    const std::size_t other = fam[1 - side].size();
    auto ok = [&](std::size_t i, std::size_t j) { return side == 0 ? adm[i][j] : adm[j][i]; };
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < mine.size(); ++i) {
      bool dominated = false;
      for (std::size_t k = 0; k < mine.size() && !dominated; ++k) {
        if (k == i || (mine[k] & mine[i]) != mine[i]) continue;
        bool covers = true;
        for (std::size_t j = 0; j < other && covers; ++j)
          if (ok(i, j) && !ok(k, j)) covers = false;
        dominated = covers;
      }
      if (!dominated) keep.push_back(i);
    }
    return keep;
  };
  auto keep0 = survivors(0);
  auto keep1 = survivors(1);

  HypergraphPair out;
  out.eps = eps;
  std::vector<SymbolSet> e0, e1;
  for (auto i : keep0) e0.push_back(fam[0][i]);
  for (auto j : keep1) e1.push_back(fam[1][j]);
  out.sides[0] = with_balls(tables[0], e0, eps);
  out.sides[1] = with_balls(tables[1], e1, eps);
  // with_balls re-sorts; the families were already canonical so indices line up.
  out.admissible.assign(e0.size(), std::vector<std::uint8_t>(e1.size()));
  out.pair_balls.assign(e0.size(), std::vector<std::optional<Ball>>(e1.size()));
  for (std::size_t a = 0; a < keep0.size(); ++a)
    for (std::size_t b = 0; b < keep1.size(); ++b) {
      out.admissible[a][b] = adm[keep0[a]][keep1[b]];
      auto pts = pair_points(inst, e0[a], e1[b]);
      if (!pts.empty()) out.pair_balls[a][b] = sec(pts);
    }
  return out;
}

}  // namespace hyperrate
