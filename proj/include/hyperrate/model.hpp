#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace hyperrate {

inline constexpr std::size_t kMaxAlphabetSize = 24;
inline constexpr double kPmfTolerance = 1e-12;

using Fraction = boost::rational<long long>;

struct Alphabet {
  std::string name;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return labels.size(); }
  // Label parsed as a real number, if it is one.
  std::optional<double> numeric(std::size_t i) const;
  std::size_t index_of(std::string_view label) const;
};

// Labels first, first+1, ..., first+n-1.
Alphabet numbered_alphabet(std::string name, long first, std::size_t n);

// Dense row-major tensor over 1-3 axes.
class JointPmf {
 public:
  JointPmf() = default;
  JointPmf(std::vector<Alphabet> axes, std::vector<double> probs);
  JointPmf(std::vector<Alphabet> axes, std::vector<Fraction> exact);

  std::size_t rank() const noexcept { return axes_.size(); }
  const Alphabet& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<Alphabet>& axes() const noexcept { return axes_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return probs_.size(); }

  const std::vector<double>& probs() const noexcept { return probs_; }
  double prob(std::size_t flat) const { return probs_.at(flat); }
  double prob(std::span<const std::size_t> index) const { return probs_.at(flatten(index)); }
  bool support(std::size_t flat) const { return probs_.at(flat) > 0.0; }
  const std::optional<std::vector<Fraction>>& exact() const noexcept { return exact_; }

  std::size_t flatten(std::span<const std::size_t> index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

 private:
  void init_shape();

  std::vector<Alphabet> axes_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
  std::optional<std::vector<Fraction>> exact_;
};

// Marginal onto the listed axes, kept in the listed order.
JointPmf marginal(const JointPmf& pmf, const std::vector<std::size_t>& axes);
// Distribution of the remaining axes given axis == value.
JointPmf conditional(const JointPmf& pmf, std::size_t axis, std::size_t value);
// p(a)p(b) with axes of a first.
JointPmf product(const JointPmf& a, const JointPmf& b);

enum class Metric { euclidean, absolute };

struct FunctionTable {
  std::string name;
  std::vector<std::size_t> axes;   // pmf axes forming the domain
  std::vector<std::size_t> shape;  // sizes of those axes
  std::size_t dim = 1;
  Metric metric = Metric::euclidean;
  std::vector<double> values;          // size() * dim
  std::vector<std::uint8_t> defined;   // 0 marks a "?" entry

  std::size_t size() const noexcept;
  std::size_t flatten(std::span<const std::size_t> index) const;
  std::span<const double> value(std::size_t flat) const {
    return {values.data() + flat * dim, dim};
  }
  bool is_defined(std::size_t flat) const { return defined.at(flat) != 0; }
};

using ValueFn = std::function<std::vector<double>(std::span<const std::size_t>)>;

// Fills every tuple of the domain from fn (index per domain axis).
FunctionTable tabulate(std::string name, const JointPmf& pmf, std::vector<std::size_t> axes,
                       std::size_t dim, const ValueFn& fn);

double distance(std::span<const double> a, std::span<const double> b);

enum class Setting { p2p, side_info, distributed, mdc, successive_refinement, cascade, markov };

std::string_view to_string(Setting s);
Setting parse_setting(std::string_view s);
std::size_t expected_rank(Setting s);
std::size_t expected_function_count(Setting s);
// Domain axes a function gets when the document omits them.
std::vector<std::size_t> default_function_axes(Setting s, std::size_t function_index);

struct MarkovSpec {
  std::vector<std::vector<double>> transition;
  int k = 1;
};

struct ProblemInstance {
  Setting setting = Setting::p2p;
  JointPmf pmf;
  std::vector<FunctionTable> functions;
  std::vector<double> tolerances;
  bool allow_zero_marginals = false;
  std::vector<std::vector<double>> embedding;  // per pmf axis; empty when absent
  std::optional<MarkovSpec> markov;

  const FunctionTable& function(std::size_t i = 0) const { return functions.at(i); }
  double tolerance(std::size_t i = 0) const { return tolerances.at(i); }
};

// Throws ValidationError naming the first violated invariant.
void validate(const ProblemInstance& inst);

ProblemInstance make_instance(Setting setting, JointPmf pmf, std::vector<FunctionTable> functions,
                              std::vector<double> tolerances, bool allow_zero_marginals = false);

// Same instance with tolerance i replaced.
ProblemInstance with_tolerance(const ProblemInstance& inst, double eps, std::size_t i = 0);

// Position of each symbol on the real line: embedding if supplied, else numeric labels.
std::vector<std::vector<double>> domain_embedding(const ProblemInstance& inst);

}  // namespace hyperrate
