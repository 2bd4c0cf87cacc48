#include "hyperrate/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "hyperrate/error.hpp"

namespace hyperrate {

std::optional<double> Alphabet::numeric(std::size_t i) const {
  const std::string& s = labels.at(i);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t Alphabet::index_of(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end())
    throw ValidationError("symbol '" + std::string(label) + "' not in alphabet '" + name + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

Alphabet numbered_alphabet(std::string name, long first, std::size_t n) {
  Alphabet a{std::move(name), {}};
  for (std::size_t i = 0; i < n; ++i) a.labels.push_back(std::to_string(first + long(i)));
  return a;
}

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> probs)
    : axes_(std::move(axes)), probs_(std::move(probs)) {
  init_shape();
}

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<Fraction> exact)
    : axes_(std::move(axes)), exact_(std::move(exact)) {
  probs_.reserve(exact_->size());
  for (const auto& f : *exact_) probs_.push_back(boost::rational_cast<double>(f));
  init_shape();
}

void JointPmf::init_shape() {
  shape_.clear();
  for (const auto& a : axes_) shape_.push_back(a.size());
  strides_.assign(shape_.size(), 1);
  for (std::size_t i = shape_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * shape_[i];
  std::size_t n = 1;
  for (auto s : shape_) n *= s;
  if (axes_.empty()) n = 0;
  if (probs_.size() != n)
    throw ValidationError("pmf has " + std::to_string(probs_.size()) + " entries, axes require " +
                          std::to_string(n));
}

std::size_t JointPmf::flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < index.size(); ++i) flat += index[i] * strides_[i];
  return flat;
}

std::vector<std::size_t> JointPmf::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(shape_.size());
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    idx[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return idx;
}

JointPmf marginal(const JointPmf& pmf, const std::vector<std::size_t>& axes) {
  if (axes.empty()) throw ValidationError("marginal: empty axis set");
  std::set<std::size_t> seen;
  std::vector<Alphabet> out_axes;
  for (auto a : axes) {
    if (a >= pmf.rank() || !seen.insert(a).second)
      throw ValidationError("marginal: bad axis " + std::to_string(a));
    out_axes.push_back(pmf.axis(a));
  }
  std::size_t n = 1;
  for (const auto& a : out_axes) n *= a.size();

  auto out_flat = [&](std::size_t flat, std::vector<std::size_t>& sub) {
    auto idx = pmf.unflatten(flat);
    for (std::size_t i = 0; i < axes.size(); ++i) sub[i] = idx[axes[i]];
  };
  std::vector<std::size_t> sub(axes.size());
  if (pmf.exact()) {
    std::vector<Fraction> acc(n, Fraction(0));
    JointPmf shape_only(out_axes, std::vector<double>(n, 0.0));
    for (std::size_t f = 0; f < pmf.size(); ++f) {
      out_flat(f, sub);
      acc[shape_only.flatten(sub)] += (*pmf.exact())[f];
    }
    return JointPmf(std::move(out_axes), std::move(acc));
  }
  std::vector<double> acc(n, 0.0);
  JointPmf shape_only(out_axes, std::vector<double>(n, 0.0));
  for (std::size_t f = 0; f < pmf.size(); ++f) {
    out_flat(f, sub);
    acc[shape_only.flatten(sub)] += pmf.prob(f);
  }
  return JointPmf(std::move(out_axes), std::move(acc));
}

JointPmf conditional(const JointPmf& pmf, std::size_t axis, std::size_t value) {
  if (axis >= pmf.rank()) throw ValidationError("conditional: bad axis");
  if (pmf.rank() < 2) throw ValidationError("conditional: pmf needs at least two axes");
  if (value >= pmf.shape()[axis]) throw ValidationError("conditional: value out of range");
  std::vector<std::size_t> rest;
  for (std::size_t a = 0; a < pmf.rank(); ++a)
    if (a != axis) rest.push_back(a);
  std::vector<Alphabet> out_axes;
  for (auto a : rest) out_axes.push_back(pmf.axis(a));
  std::size_t n = 1;
  for (const auto& a : out_axes) n *= a.size();
  JointPmf shape_only(out_axes, std::vector<double>(n, 0.0));

  std::vector<std::size_t> sub(rest.size());
  if (pmf.exact()) {
    std::vector<Fraction> acc(n, Fraction(0));
    Fraction total(0);
    for (std::size_t f = 0; f < pmf.size(); ++f) {
      auto idx = pmf.unflatten(f);
      if (idx[axis] != value) continue;
      for (std::size_t i = 0; i < rest.size(); ++i) sub[i] = idx[rest[i]];
      acc[shape_only.flatten(sub)] += (*pmf.exact())[f];
      total += (*pmf.exact())[f];
    }
    if (total == Fraction(0))
      throw ValidationError("conditional: conditioning value has zero probability");
    for (auto& v : acc) v /= total;
    return JointPmf(std::move(out_axes), std::move(acc));
  }
  std::vector<double> acc(n, 0.0);
  double total = 0.0;
  for (std::size_t f = 0; f < pmf.size(); ++f) {
    auto idx = pmf.unflatten(f);
    if (idx[axis] != value) continue;
    for (std::size_t i = 0; i < rest.size(); ++i) sub[i] = idx[rest[i]];
    acc[shape_only.flatten(sub)] += pmf.prob(f);
    total += pmf.prob(f);
  }
  if (total <= 0.0) throw ValidationError("conditional: conditioning value has zero probability");
  for (auto& v : acc) v /= total;
  return JointPmf(std::move(out_axes), std::move(acc));
}

JointPmf product(const JointPmf& a, const JointPmf& b) {
  std::vector<Alphabet> axes = a.axes();
  axes.insert(axes.end(), b.axes().begin(), b.axes().end());
  if (a.exact() && b.exact()) {
    std::vector<Fraction> out;
    for (const auto& x : *a.exact())
      for (const auto& y : *b.exact()) out.push_back(x * y);
    return JointPmf(std::move(axes), std::move(out));
  }
  std::vector<double> out;
  for (double x : a.probs())
    for (double y : b.probs()) out.push_back(x * y);
  return JointPmf(std::move(axes), std::move(out));
}

std::size_t FunctionTable::size() const noexcept {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::size_t FunctionTable::flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) flat = flat * shape[i] + index[i];
  return flat;
}

FunctionTable tabulate(std::string name, const JointPmf& pmf, std::vector<std::size_t> axes,
                       std::size_t dim, const ValueFn& fn) {
  FunctionTable t;
  t.name = std::move(name);
  t.axes = std::move(axes);
  for (auto a : t.axes) t.shape.push_back(pmf.shape().at(a));
  t.dim = dim;
  const std::size_t n = t.size();
  t.values.resize(n * dim);
  t.defined.assign(n, 1);
  std::vector<std::size_t> idx(t.shape.size(), 0);
  for (std::size_t f = 0; f < n; ++f) {
    std::size_t r = f;
    for (std::size_t i = t.shape.size(); i-- > 0;) {
      idx[i] = r % t.shape[i];
      r /= t.shape[i];
    }
    auto v = fn(idx);
    if (v.size() != dim) throw ValidationError("tabulate: value dimension mismatch");
    std::copy(v.begin(), v.end(), t.values.begin() + std::ptrdiff_t(f * dim));
  }
  return t;
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::p2p: return "p2p";
    case Setting::side_info: return "side_info";
    case Setting::distributed: return "distributed";
    case Setting::mdc: return "mdc";
    case Setting::successive_refinement: return "successive_refinement";
    case Setting::cascade: return "cascade";
    case Setting::markov: return "markov";
  }
  return "?";
}

Setting parse_setting(std::string_view s) {
  for (auto v : {Setting::p2p, Setting::side_info, Setting::distributed, Setting::mdc,
                 Setting::successive_refinement, Setting::cascade, Setting::markov})
    if (to_string(v) == s) return v;
  if (s == "sr") return Setting::successive_refinement;
  throw ValidationError("unknown setting '" + std::string(s) + "'");
}

std::size_t expected_rank(Setting s) {
  switch (s) {
    case Setting::side_info:
    case Setting::distributed:
    case Setting::cascade: return 2;
    default: return 1;
  }
}

std::size_t expected_function_count(Setting s) {
  switch (s) {
    case Setting::mdc: return 3;
    case Setting::successive_refinement:
    case Setting::cascade: return 2;
    default: return 1;
  }
}

std::vector<std::size_t> default_function_axes(Setting s, std::size_t function_index) {
  switch (s) {
    case Setting::side_info:
    case Setting::distributed: return {0, 1};
    case Setting::cascade: return {function_index};
    default: return {0};
  }
}

namespace {

void check_alphabet(const Alphabet& a) {
  if (a.size() == 0) throw ValidationError("alphabet '" + a.name + "' is empty");
  if (a.size() > kMaxAlphabetSize)
    throw ValidationError("alphabet '" + a.name + "' has " + std::to_string(a.size()) +
                          " symbols, cap is " + std::to_string(kMaxAlphabetSize));
  std::set<std::string> seen(a.labels.begin(), a.labels.end());
  if (seen.size() != a.size())
    throw ValidationError("alphabet '" + a.name + "' has duplicate labels");
}

void check_pmf(const ProblemInstance& inst) {
  const auto& pmf = inst.pmf;
  if (pmf.rank() < 1 || pmf.rank() > 3) throw ValidationError("pmf must have 1-3 axes");
  if (pmf.rank() != expected_rank(inst.setting))
    throw ValidationError("setting '" + std::string(to_string(inst.setting)) + "' needs " +
                          std::to_string(expected_rank(inst.setting)) + " pmf axes");
  for (const auto& a : pmf.axes()) check_alphabet(a);
  if (pmf.exact()) {
    Fraction total(0);
    for (const auto& f : *pmf.exact()) {
      if (f < Fraction(0)) throw ValidationError("pmf has a negative entry");
      total += f;
    }
    if (total != Fraction(1))
      throw ValidationError("pmf does not sum to 1 (sum " + std::to_string(total.numerator()) +
                            "/" + std::to_string(total.denominator()) + ")");
  } else {
    double total = 0.0;
    for (double p : pmf.probs()) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("pmf has a negative entry");
      total += p;
    }
    if (std::abs(total - 1.0) > kPmfTolerance)
      throw ValidationError("pmf does not sum to 1 (sum " + std::to_string(total) + ")");
  }
  if (!inst.allow_zero_marginals) {
    for (std::size_t a = 0; a < pmf.rank(); ++a) {
      auto m = marginal(pmf, {a});
      for (std::size_t i = 0; i < m.size(); ++i)
        if (!(m.prob(i) > 0.0))
          throw ValidationError("symbol '" + pmf.axis(a).labels[i] + "' of '" + pmf.axis(a).name +
                                "' has zero marginal (set allow_zero_marginals)");
    }
  }
}

void check_function(const ProblemInstance& inst, const FunctionTable& f) {
  const auto& pmf = inst.pmf;
  if (f.axes.empty()) throw ValidationError("function '" + f.name + "' has no domain axes");
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < f.axes.size(); ++i) {
    if (f.axes[i] >= pmf.rank() || !seen.insert(f.axes[i]).second)
      throw ValidationError("function '" + f.name + "' has a bad domain axis");
    if (i >= f.shape.size() || f.shape[i] != pmf.shape()[f.axes[i]])
      throw ValidationError("function '" + f.name + "' domain does not match pmf axes");
  }
  if (f.shape.size() != f.axes.size())
    throw ValidationError("function '" + f.name + "' shape/axes mismatch");
  if (f.dim < 1) throw ValidationError("function '" + f.name + "' has dimension 0");
  if (f.metric == Metric::absolute && f.dim != 1)
    throw ValidationError("function '" + f.name + "': absolute metric needs d = 1");
  if (f.values.size() != f.size() * f.dim || f.defined.size() != f.size())
    throw ValidationError("function '" + f.name + "' has the wrong number of values");
  for (double v : f.values)
    if (!std::isfinite(v)) throw ValidationError("function '" + f.name + "' has a non-finite value");
  auto m = marginal(pmf, f.axes);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!f.is_defined(i) && m.prob(i) > 0.0)
      throw ValidationError("function '" + f.name + "' leaves a probable tuple unspecified");
}

void check_markov(const ProblemInstance& inst) {
  if (inst.setting != Setting::markov) {
    if (inst.markov) throw ValidationError("markov block given for a non-markov setting");
    return;
  }
  if (!inst.markov) throw ValidationError("markov setting needs a markov block");
  const auto& P = inst.markov->transition;
  const std::size_t n = inst.pmf.shape()[0];
  if (P.size() != n) throw ValidationError("transition matrix must be |X| x |X|");
  for (const auto& row : P) {
    if (row.size() != n) throw ValidationError("transition matrix must be |X| x |X|");
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("transition has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > kPmfTolerance) throw ValidationError("transition row does not sum to 1");
  }
  if (inst.markov->k < 1) throw ValidationError("markov k must be >= 1");
}

}  // namespace

void validate(const ProblemInstance& inst) {
  check_pmf(inst);
  if (inst.functions.size() != expected_function_count(inst.setting))
    throw ValidationError("setting '" + std::string(to_string(inst.setting)) + "' needs " +
                          std::to_string(expected_function_count(inst.setting)) + " function(s)");
  for (const auto& f : inst.functions) check_function(inst, f);
  if (inst.tolerances.size() != inst.functions.size())
    throw ValidationError("need one tolerance per function");
  for (double e : inst.tolerances)
    if (!std::isfinite(e) || e < 0.0) throw ValidationError("tolerances must be finite and >= 0");
  if (!inst.embedding.empty()) {
    if (inst.embedding.size() != inst.pmf.rank())
      throw ValidationError("embedding must list one entry per pmf axis");
    for (std::size_t a = 0; a < inst.embedding.size(); ++a)
      if (!inst.embedding[a].empty() && inst.embedding[a].size() != inst.pmf.shape()[a])
        throw ValidationError("embedding size does not match alphabet '" + inst.pmf.axis(a).name + "'");
  }
  check_markov(inst);
}

ProblemInstance make_instance(Setting setting, JointPmf pmf, std::vector<FunctionTable> functions,
                              std::vector<double> tolerances, bool allow_zero_marginals) {
  ProblemInstance inst;
  inst.setting = setting;
  inst.pmf = std::move(pmf);
  inst.functions = std::move(functions);
  inst.tolerances = std::move(tolerances);
  inst.allow_zero_marginals = allow_zero_marginals;
  validate(inst);
  return inst;
}

ProblemInstance with_tolerance(const ProblemInstance& inst, double eps, std::size_t i) {
  ProblemInstance out = inst;
  out.tolerances.at(i) = eps;
  return out;
}

std::vector<std::vector<double>> domain_embedding(const ProblemInstance& inst) {
  std::vector<std::vector<double>> out(inst.pmf.rank());
  for (std::size_t a = 0; a < inst.pmf.rank(); ++a) {
    if (a < inst.embedding.size() && !inst.embedding[a].empty()) {
      out[a] = inst.embedding[a];
      continue;
    }
    const auto& alpha = inst.pmf.axis(a);
    std::vector<double> pos;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      auto v = alpha.numeric(i);
      if (!v) {
        pos.clear();
        break;
      }
      pos.push_back(*v);
    }
    out[a] = std::move(pos);
  }
  return out;
}

}  // namespace hyperrate
