#include "hyperrate/detail/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include <omp.h>

#include "hyperrate/error.hpp"

namespace hyperrate::detail {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool key_less(const Program::Key& a, std::uint64_t ia, const Program::Key& b, std::uint64_t ib) {
  if (a != b) return a < b;
  return ia < ib;
}
}  // namespace

Quantity mutual_information(std::vector<std::size_t> a, std::vector<std::size_t> b,
                            std::vector<std::size_t> c) {
  auto join = [](std::vector<std::size_t> x, const std::vector<std::size_t>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  Quantity q;
  q.push_back({1.0, join(a, c)});
  q.push_back({1.0, join(b, c)});
  q.push_back({-1.0, join(join(a, b), c)});
  if (!c.empty()) q.push_back({-1.0, c});
  return q;
}

struct Program::Scratch {
  std::vector<std::vector<double>> acc;
  std::vector<std::vector<std::uint32_t>> touched;
  std::vector<double> h;
};

Program::Program(ProgramSpec spec) : spec_(std::move(spec)) {
  const auto& shape = spec_.source_shape;
  const std::size_t ns = shape.size();
  source_size_ = 1;
  for (auto s : shape) source_size_ *= s;
  if (spec_.source_pmf.size() != source_size_) throw SolverError("program: source pmf size mismatch");
  const std::size_t na = spec_.aux_sizes.size();

  std::vector<std::vector<std::size_t>> digits(source_size_, std::vector<std::size_t>(ns));
  for (std::size_t s = 0; s < source_size_; ++s) {
    std::size_t r = s;
    for (std::size_t c = ns; c-- > 0;) {
      digits[s][c] = r % shape[c];
      r /= shape[c];
    }
  }

  std::vector<int> producer(na, -1);
  const std::size_t nb = spec_.blocks.size();
  row_of_.resize(nb);
  row_offset_.resize(nb);
  entry_out_.resize(nb);
  row_mass_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& blk = spec_.blocks[b];
    for (auto o : blk.outputs) {
      if (o >= na || producer[o] != -1) throw SolverError("program: aux coordinate produced twice");
      producer[o] = int(b);
    }
    std::size_t rows = 1;
    for (auto i : blk.inputs) rows *= shape[i];
    row_of_[b].resize(source_size_);
    row_mass_[b].assign(rows, 0.0);
    for (std::size_t s = 0; s < source_size_; ++s) {
      std::size_t r = 0;
      for (auto i : blk.inputs) r = r * shape[i] + digits[s][i];
      row_of_[b][s] = std::uint32_t(r);
      row_mass_[b][r] += spec_.source_pmf[s];
    }
    row_offset_[b].assign(1, 0);
    const std::size_t no = blk.outputs.size();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<const std::vector<std::uint32_t>*> lists;
      std::size_t count = 1;
      for (std::size_t k = 0; k < no; ++k) {
        lists.push_back(&blk.allowed[k][r]);
        count *= blk.allowed[k][r].size();
      }
      if (count == 0 && row_mass_[b][r] > 0.0)
        throw SolverError("program: a probable input has no allowed output");
      for (std::size_t t = 0; t < count; ++t) {
        std::size_t rem = t;
        std::vector<std::uint32_t> tuple(no);
        for (std::size_t k = no; k-- > 0;) {
          tuple[k] = (*lists[k])[rem % lists[k]->size()];
          rem /= lists[k]->size();
        }
        entry_out_[b].insert(entry_out_[b].end(), tuple.begin(), tuple.end());
      }
      row_offset_[b].push_back(row_offset_[b].back() + count);
    }
  }
  for (std::size_t a = 0; a < na; ++a)
    if (producer[a] < 0) throw SolverError("program: aux coordinate without a block");

  // Cells.
  cell_base_.assign(source_size_, kNone);
  cell_stride_.assign(source_size_, std::vector<std::size_t>(nb, 0));
  cell_entry_.assign(nb, {});
  std::vector<std::uint32_t> cell_aux;
  std::vector<std::uint32_t> aux(na);
  for (std::size_t s = 0; s < source_size_; ++s) {
    if (!(spec_.source_pmf[s] > 0.0)) continue;
    cell_base_[s] = cell_s_.size();
    std::vector<std::size_t> cnt(nb);
    std::size_t total = 1;
    for (std::size_t b = 0; b < nb; ++b) {
      auto r = row_of_[b][s];
      cnt[b] = row_offset_[b][r + 1] - row_offset_[b][r];
      total *= cnt[b];
    }
    std::size_t stride = 1;
    for (std::size_t b = nb; b-- > 0;) {
      cell_stride_[s][b] = stride;
      stride *= cnt[b];
    }
    for (std::size_t t = 0; t < total; ++t) {
      cell_s_.push_back(std::uint32_t(s));
      for (std::size_t b = 0; b < nb; ++b) {
        auto r = row_of_[b][s];
        std::size_t local = (t / cell_stride_[s][b]) % cnt[b];
        std::size_t e = row_offset_[b][r] + local;
        cell_entry_[b].push_back(std::uint32_t(e));
        const auto& blk = spec_.blocks[b];
        for (std::size_t k = 0; k < blk.outputs.size(); ++k)
          aux[blk.outputs[k]] = entry_out_[b][e * blk.outputs.size() + k];
      }
      cell_aux.insert(cell_aux.end(), aux.begin(), aux.end());
      cell_ok_.push_back(spec_.admissible ? std::uint8_t(spec_.admissible(aux)) : std::uint8_t(1));
    }
  }
  const std::size_t ncell = cell_s_.size();

  entry_cells_.assign(nb, {});
  entry_cells_at_.assign(nb, {});
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t ne = row_offset_[b].back();
    std::vector<std::size_t> count(ne + 1, 0);
    for (std::size_t c = 0; c < ncell; ++c) ++count[cell_entry_[b][c] + 1];
    for (std::size_t e = 0; e < ne; ++e) count[e + 1] += count[e];
    entry_cells_at_[b] = count;
    entry_cells_[b].resize(ncell);
    std::vector<std::size_t> fill(count.begin(), count.end() - 1);
    for (std::size_t c = 0; c < ncell; ++c) entry_cells_[b][fill[cell_entry_[b][c]]++] = std::uint32_t(c);
  }

  // Marginals.
  std::map<std::vector<std::size_t>, std::size_t> index;
  std::vector<std::vector<std::size_t>> coord_sets;
  quantity_terms_.resize(spec_.quantities.size());
  for (std::size_t j = 0; j < spec_.quantities.size(); ++j)
    for (const auto& term : spec_.quantities[j]) {
      auto coords = term.coords;
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
      auto [it, fresh] = index.emplace(coords, coord_sets.size());
      if (fresh) coord_sets.push_back(coords);
      quantity_terms_[j].emplace_back(it->second, term.coeff);
    }
  marg_id_.assign(coord_sets.size(), std::vector<std::uint32_t>(ncell));
  marg_size_.assign(coord_sets.size(), 0);
  for (std::size_t m = 0; m < coord_sets.size(); ++m) {
    std::unordered_map<std::uint64_t, std::uint32_t> ids;
    for (std::size_t c = 0; c < ncell; ++c) {
      std::uint64_t key = 0;
      for (auto coord : coord_sets[m]) {
        std::size_t v, radix;
        if (coord < ns) {
          v = digits[cell_s_[c]][coord];
          radix = shape[coord];
        } else {
          if (coord - ns >= na) throw SolverError("program: entropy term names an unknown coordinate");
          v = cell_aux[c * na + (coord - ns)];
          radix = spec_.aux_sizes[coord - ns];
        }
        key = key * radix + v;
      }
      auto [it, fresh] = ids.emplace(key, std::uint32_t(ids.size()));
      marg_id_[m][c] = it->second;
    }
    marg_size_[m] = ids.size();
  }

  // Enumeration slots.
  slot_of_.assign(nb, {});
  det_count_ = 1.0;
  for (std::size_t b = 0; b < nb; ++b) {
    slot_of_[b].assign(row_count(b), -1);
    for (std::size_t r = 0; r < row_count(b); ++r) {
      if (!(row_mass_[b][r] > 0.0)) continue;
      slot_of_[b][r] = std::int64_t(slots_.size());
      slots_.emplace_back(b, r);
      det_count_ *= double(entry_end(b, r) - entry_begin(b, r));
    }
  }
}

std::span<const std::uint32_t> Program::entry_outputs(std::size_t b, std::size_t e) const {
  const std::size_t no = spec_.blocks[b].outputs.size();
  return {entry_out_[b].data() + e * no, no};
}

void Program::masses(const Channel& ch, std::vector<double>& mass) const {
  const std::size_t ncell = cell_s_.size();
  mass.assign(ncell, 0.0);
  for (std::size_t c = 0; c < ncell; ++c) {
    double m = spec_.source_pmf[cell_s_[c]];
    for (std::size_t b = 0; b < block_count() && m > 0.0; ++b) m *= ch.blocks[b][cell_entry_[b][c]];
    mass[c] = m;
  }
}

void Program::marginal_entropies(const std::vector<double>& mass, std::vector<double>& h,
                                 std::vector<std::vector<double>>* marg) const {
  const std::size_t nm = marg_id_.size();
  h.assign(nm, 0.0);
  std::vector<std::vector<double>> local;
  auto& acc = marg ? *marg : local;
  acc.resize(nm);
  for (std::size_t m = 0; m < nm; ++m) {
    acc[m].assign(marg_size_[m], 0.0);
    for (std::size_t c = 0; c < mass.size(); ++c) acc[m][marg_id_[m][c]] += mass[c];
    double s = 0.0;
    for (double p : acc[m])
      if (p > 0.0) s -= p * std::log2(p);
    h[m] = s;
  }
}

std::vector<double> Program::combine(const std::vector<double>& h) const {
  std::vector<double> q(quantity_terms_.size(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j)
    for (auto [m, coeff] : quantity_terms_[j]) q[j] += coeff * h[m];
  return q;
}

std::vector<double> Program::quantities(const Channel& ch) const {
  std::vector<double> mass, h;
  masses(ch, mass);
  marginal_entropies(mass, h, nullptr);
  return combine(h);
}

bool Program::feasible(const Channel& ch) const {
  if (ch.blocks.size() != block_count()) return false;
  for (std::size_t b = 0; b < block_count(); ++b) {
    if (ch.blocks[b].size() != row_offset_[b].back()) return false;
    for (std::size_t r = 0; r < row_count(b); ++r) {
      double s = 0.0;
      for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) {
        if (ch.blocks[b][e] < 0.0) return false;
        s += ch.blocks[b][e];
      }
      if (entry_end(b, r) > entry_begin(b, r) && std::abs(s - 1.0) > 1e-10) return false;
    }
  }
  std::vector<double> mass;
  masses(ch, mass);
  for (std::size_t c = 0; c < mass.size(); ++c)
    if (mass[c] > 0.0 && !cell_ok_[c]) return false;
  return true;
}

void Program::decode(std::uint64_t index, std::vector<std::uint32_t>& choice) const {
  choice.assign(slots_.size(), 0);
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    auto [b, r] = slots_[k];
    std::uint64_t radix = entry_end(b, r) - entry_begin(b, r);
    choice[k] = std::uint32_t(index % radix);
    index /= radix;
  }
}

Channel Program::deterministic(std::uint64_t index) const {
  std::vector<std::uint32_t> choice;
  decode(index, choice);
  Channel ch;
  ch.blocks.resize(block_count());
  for (std::size_t b = 0; b < block_count(); ++b) {
    ch.blocks[b].assign(row_offset_[b].back(), 0.0);
    for (std::size_t r = 0; r < row_count(b); ++r) {
      if (entry_end(b, r) == entry_begin(b, r)) continue;
      auto slot = slot_of_[b][r];
      std::size_t local = slot < 0 ? 0 : choice[std::size_t(slot)];
      ch.blocks[b][entry_begin(b, r) + local] = 1.0;
    }
  }
  return ch;
}

double Program::evaluate_deterministic(std::span<const std::uint32_t> choice, Scratch& sc,
                                       std::vector<double>& q) const {
  const std::size_t nm = marg_id_.size();
  bool ok = true;
  for (std::size_t s = 0; s < source_size_ && ok; ++s) {
    if (cell_base_[s] == kNone) continue;
    std::size_t c = cell_base_[s];
    for (std::size_t b = 0; b < block_count(); ++b) {
      auto slot = slot_of_[b][row_of_[b][s]];
      c += (slot < 0 ? 0 : choice[std::size_t(slot)]) * cell_stride_[s][b];
    }
    if (!cell_ok_[c]) {
      ok = false;
      break;
    }
    const double p = spec_.source_pmf[s];
    for (std::size_t m = 0; m < nm; ++m) {
      auto id = marg_id_[m][c];
      if (sc.acc[m][id] == 0.0) sc.touched[m].push_back(id);
      sc.acc[m][id] += p;
    }
  }
  for (std::size_t m = 0; m < nm; ++m) {
    double h = 0.0;
    for (auto id : sc.touched[m]) {
      double p = sc.acc[m][id];
      h -= p * std::log2(p);
      sc.acc[m][id] = 0.0;
    }
    sc.touched[m].clear();
    sc.h[m] = h;
  }
  if (!ok) return kInf;
  q = combine(sc.h);
  return 0.0;
}

std::vector<std::optional<std::uint64_t>> Program::enumerate(const std::vector<KeyFn>& keys,
                                                             ExecutionPolicy policy) const {
  if (det_count_ > 1.8e19) throw CapError("deterministic channel family too large to index");
  const std::uint64_t total = std::uint64_t(det_count_);
  const int nt = std::max(1, std::min<int>(threads_for(policy), int(std::min<std::uint64_t>(total, 1 << 20))));
  const std::size_t nk = keys.size();
  struct Best {
    Key key{kInf, kInf, kInf};
    std::uint64_t index = 0;
    bool found = false;
  };
  std::vector<std::vector<Best>> best(static_cast<std::size_t>(nt), std::vector<Best>(nk));

#pragma omp parallel num_threads(nt)
  {
    const int t = omp_get_thread_num();
    const std::uint64_t lo = total * std::uint64_t(t) / std::uint64_t(nt);
    const std::uint64_t hi = total * std::uint64_t(t + 1) / std::uint64_t(nt);
    Scratch sc;
    sc.acc.resize(marg_id_.size());
    sc.touched.resize(marg_id_.size());
    sc.h.assign(marg_id_.size(), 0.0);
    for (std::size_t m = 0; m < marg_id_.size(); ++m) sc.acc[m].assign(marg_size_[m], 0.0);
    std::vector<std::uint32_t> choice;
    decode(lo, choice);
    std::vector<double> q;
    auto& mine = best[std::size_t(t)];
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      if (evaluate_deterministic(choice, sc, q) == 0.0) {
        for (std::size_t k = 0; k < nk; ++k) {
          Key key = keys[k](q);
          if (!mine[k].found || key_less(key, idx, mine[k].key, mine[k].index)) mine[k] = {key, idx, true};
        }
      }
      for (std::size_t k = 0; k < slots_.size(); ++k) {
        auto [b, r] = slots_[k];
        if (++choice[k] < entry_end(b, r) - entry_begin(b, r)) break;
        choice[k] = 0;
      }
    }
  }

  std::vector<std::optional<std::uint64_t>> out(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    Best merged;
    for (const auto& per : best)
      if (per[k].found && (!merged.found || key_less(per[k].key, per[k].index, merged.key, merged.index)))
        merged = per[k];
    if (merged.found) out[k] = merged.index;
  }
  return out;
}

std::optional<Channel> Program::find_feasible_deterministic() const {
  if (!spec_.admissible) return deterministic(0);
  const std::size_t ns = slots_.size();
  // Sources whose cell is fully determined once slot i is set.
  std::vector<std::vector<std::size_t>> completes(ns + 1);
  for (std::size_t s = 0; s < source_size_; ++s) {
    if (cell_base_[s] == kNone) continue;
    std::int64_t last = -1;
    for (std::size_t b = 0; b < block_count(); ++b) last = std::max(last, slot_of_[b][row_of_[b][s]]);
    completes[last < 0 ? ns : std::size_t(last)].push_back(s);
  }
  std::vector<std::uint32_t> choice(ns, 0);
  auto cell_of = [&](std::size_t s) {
    std::size_t c = cell_base_[s];
    for (std::size_t b = 0; b < block_count(); ++b) {
      auto slot = slot_of_[b][row_of_[b][s]];
      c += (slot < 0 ? 0 : choice[std::size_t(slot)]) * cell_stride_[s][b];
    }
    return c;
  };
  for (auto s : completes[ns])
    if (!cell_ok_[cell_of(s)]) return std::nullopt;
  std::size_t budget = 10'000'000;
  std::function<bool(std::size_t)> dfs = [&](std::size_t i) -> bool {
    if (i == ns) return true;
    auto [b, r] = slots_[i];
    for (std::uint32_t v = 0; v < entry_end(b, r) - entry_begin(b, r); ++v) {
      if (budget-- == 0) return false;
      choice[i] = v;
      bool ok = true;
      for (auto s : completes[i])
        if (!cell_ok_[cell_of(s)]) {
          ok = false;
          break;
        }
      if (ok && dfs(i + 1)) return true;
    }
    return false;
  };
  if (!dfs(0)) return std::nullopt;
  std::uint64_t index = 0, mult = 1;
  for (std::size_t k = 0; k < ns; ++k) {
    auto [b, r] = slots_[k];
    index += choice[k] * mult;
    mult *= entry_end(b, r) - entry_begin(b, r);
  }
  return deterministic(index);
}

std::vector<std::vector<std::uint8_t>> Program::extend_support(const Channel& ch) const {
  std::vector<std::vector<std::uint8_t>> supp(block_count());
  for (std::size_t b = 0; b < block_count(); ++b) {
    supp[b].resize(ch.blocks[b].size());
    for (std::size_t e = 0; e < supp[b].size(); ++e)
      supp[b][e] = spec_.admissible ? std::uint8_t(ch.blocks[b][e] > 0.0) : std::uint8_t(1);
  }
  if (!spec_.admissible) return supp;
  for (std::size_t b = 0; b < block_count(); ++b)
    for (std::size_t e = 0; e < supp[b].size(); ++e) {
      if (supp[b][e]) continue;
      bool ok = true;
      for (std::size_t k = entry_cells_at_[b][e]; k < entry_cells_at_[b][e + 1] && ok; ++k) {
        auto c = entry_cells_[b][k];
        if (cell_ok_[c]) continue;
        bool live = true;
        for (std::size_t b2 = 0; b2 < block_count() && live; ++b2)
          if (b2 != b && !supp[b2][cell_entry_[b2][c]]) live = false;
        if (live) ok = false;
      }
      if (ok) supp[b][e] = 1;
    }
  return supp;
}

Channel Program::smoothed(const Channel& ch, double mix) const {
  auto supp = extend_support(ch);
  Channel out = ch;
  for (std::size_t b = 0; b < block_count(); ++b)
    for (std::size_t r = 0; r < row_count(b); ++r) {
      std::size_t n = 0;
      for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) n += supp[b][e];
      if (n == 0) continue;
      for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e)
        out.blocks[b][e] = (1.0 - mix) * ch.blocks[b][e] + (supp[b][e] ? mix / double(n) : 0.0);
    }
  return out;
}

Channel Program::random_start(const Channel& base, std::mt19937_64& rng) const {
  auto supp = extend_support(base);
  std::exponential_distribution<double> expo(1.0);
  Channel out = base;
  for (std::size_t b = 0; b < block_count(); ++b)
    for (std::size_t r = 0; r < row_count(b); ++r) {
      double total = 0.0;
      for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) {
        double g = supp[b][e] ? expo(rng) + 1e-12 : 0.0;
        out.blocks[b][e] = g;
        total += g;
      }
      if (total <= 0.0) {
        for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) out.blocks[b][e] = base.blocks[b][e];
        continue;
      }
      for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) out.blocks[b][e] /= total;
    }
  return out;
}

Channel Program::polish(Channel ch, const Objective& objective, std::size_t max_iterations,
                        double tolerance, PolishStats* stats) const {
  std::vector<double> mass, h;
  std::vector<std::vector<double>> marg;
  masses(ch, mass);
  marginal_entropies(mass, h, &marg);
  std::vector<double> q = combine(h);
  double value = objective(q);

  const std::size_t nq = q.size();
  const std::size_t nm = marg_id_.size();
  std::vector<double> eta(block_count(), 1.0);
  std::vector<double> weight(nq), cm(nm), grad, trial_mass, trial_h;
  std::vector<std::vector<double>> trial_marg;
  std::size_t it = 0;
  double change = 0.0;

  for (; it < max_iterations; ++it) {
    const double start = value;
    for (std::size_t b = 0; b < block_count(); ++b) {
      // Subgradient of the objective in the quantities, by forward differences.
      for (std::size_t j = 0; j < nq; ++j) {
        auto qh = q;
        double step = 1e-7 * std::max(1.0, std::abs(q[j]));
        qh[j] += step;
        weight[j] = (objective(qh) - value) / step;
      }
      std::fill(cm.begin(), cm.end(), 0.0);
      for (std::size_t j = 0; j < nq; ++j)
        for (auto [m, coeff] : quantity_terms_[j]) cm[m] += weight[j] * coeff;

      auto& blk = ch.blocks[b];
      grad.assign(blk.size(), 0.0);
      for (std::size_t c = 0; c < mass.size(); ++c) {
        if (!(mass[c] > 0.0)) continue;
        double l = 0.0;
        for (std::size_t m = 0; m < nm; ++m)
          if (cm[m] != 0.0) l -= cm[m] * std::log2(marg[m][marg_id_[m][c]]);
        auto e = cell_entry_[b][c];
        grad[e] += mass[c] / blk[e] * l;
      }

      for (int attempt = 0; attempt < 30; ++attempt) {
        Channel trial = ch;
        auto& tb = trial.blocks[b];
        for (std::size_t r = 0; r < row_count(b); ++r) {
          const double rm = row_mass_[b][r];
          if (!(rm > 0.0)) continue;
          double top = -kInf;
          for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e)
            if (blk[e] > 0.0) top = std::max(top, -eta[b] * grad[e] / rm);
          double total = 0.0;
          for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) {
            tb[e] = blk[e] > 0.0 ? blk[e] * std::exp2(-eta[b] * grad[e] / rm - top) : 0.0;
            total += tb[e];
          }
          for (std::size_t e = entry_begin(b, r); e < entry_end(b, r); ++e) tb[e] /= total;
        }
        masses(trial, trial_mass);
        marginal_entropies(trial_mass, trial_h, &trial_marg);
        auto tq = combine(trial_h);
        double tv = objective(tq);
        if (tv <= value + 1e-15) {
          ch = std::move(trial);
          mass.swap(trial_mass);
          marg.swap(trial_marg);
          q = std::move(tq);
          value = tv;
          eta[b] = std::min(1.0, eta[b] * 2.0);
          break;
        }
        eta[b] *= 0.25;
        if (eta[b] < 1e-12) break;
      }
    }
    change = start - value;
    if (change < tolerance) {
      ++it;
      break;
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->last_change = change;
    stats->value = value;
  }
  return ch;
}

}  // namespace hyperrate::detail
