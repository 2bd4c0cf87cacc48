#pragma once

// Minimisation of entropy-valued objectives over support-restricted channels.
//
// A program has source coordinates with a fixed joint pmf and auxiliary coordinates
// produced by channel blocks. Each block reads some source coordinates and emits some
// auxiliary ones; product channels use one block per terminal, joint channels a single
// block. Quantities are linear combinations of joint entropies of coordinate subsets and
// the objective is any piecewise-smooth function of the quantities.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hyperrate/parallel.hpp"

namespace hyperrate::detail {

struct Block {
  std::vector<std::size_t> inputs;   // source coordinates
  std::vector<std::size_t> outputs;  // auxiliary coordinates
  // allowed[k][row]: values output k may take when the block's input is `row`.
  std::vector<std::vector<std::vector<std::uint32_t>>> allowed;
};

// coords index source coordinates first, then auxiliary ones.
struct EntropyTerm {
  double coeff = 1.0;
  std::vector<std::size_t> coords;
};
using Quantity = std::vector<EntropyTerm>;

// I(A;B|C) as entropy terms.
Quantity mutual_information(std::vector<std::size_t> a, std::vector<std::size_t> b,
                            std::vector<std::size_t> c = {});

struct ProgramSpec {
  std::vector<std::size_t> source_shape;
  std::vector<double> source_pmf;  // row-major over source_shape
  std::vector<std::size_t> aux_sizes;
  std::vector<Block> blocks;
  std::vector<Quantity> quantities;
  // Joint feasibility of a full auxiliary tuple. Cells with positive mass must pass it.
  std::function<bool(std::span<const std::uint32_t>)> admissible;
};

using Objective = std::function<double(std::span<const double>)>;

// Entry probabilities per block, laid out row by row.
struct Channel {
  std::vector<std::vector<double>> blocks;
};

struct PolishStats {
  std::size_t iterations = 0;
  double last_change = 0.0;
  double value = 0.0;
};

class Program {
 public:
  using Key = std::array<double, 3>;
  using KeyFn = std::function<Key(std::span<const double>)>;

  explicit Program(ProgramSpec spec);

  const ProgramSpec& spec() const noexcept { return spec_; }
  std::size_t block_count() const noexcept { return spec_.blocks.size(); }
  std::size_t row_count(std::size_t b) const { return row_offset_[b].size() - 1; }
  std::size_t entry_begin(std::size_t b, std::size_t row) const { return row_offset_[b][row]; }
  std::size_t entry_end(std::size_t b, std::size_t row) const { return row_offset_[b][row + 1]; }
  std::span<const std::uint32_t> entry_outputs(std::size_t b, std::size_t e) const;
  double row_mass(std::size_t b, std::size_t row) const { return row_mass_[b][row]; }

  std::vector<double> quantities(const Channel& ch) const;
  bool feasible(const Channel& ch) const;

  // Deterministic channels: one entry per probable row.
  double deterministic_count() const noexcept { return det_count_; }
  Channel deterministic(std::uint64_t index) const;
  // For each key, the feasible deterministic channel with the smallest (key, index).
  std::vector<std::optional<std::uint64_t>> enumerate(const std::vector<KeyFn>& keys,
                                                      ExecutionPolicy policy) const;
  std::optional<Channel> find_feasible_deterministic() const;

  // Largest feasible support containing ch's support (greedy), spread uniformly and mixed in.
  Channel smoothed(const Channel& ch, double mix) const;
  // Dirichlet(1) rows over the greedy feasible extension of base's support.
  Channel random_start(const Channel& base, std::mt19937_64& rng) const;

  // Cyclic exponentiated-gradient steps with backtracking on the objective.
  // Step size 1 is the Blahut-Arimoto update for I(X;W).
  Channel polish(Channel start, const Objective& objective, std::size_t max_iterations,
                 double tolerance, PolishStats* stats = nullptr) const;

 private:
  struct Scratch;
  double evaluate_deterministic(std::span<const std::uint32_t> choice, Scratch& scratch,
                                std::vector<double>& q) const;
  void decode(std::uint64_t index, std::vector<std::uint32_t>& choice) const;
  std::vector<std::vector<std::uint8_t>> extend_support(const Channel& ch) const;
  void masses(const Channel& ch, std::vector<double>& mass) const;
  void marginal_entropies(const std::vector<double>& mass, std::vector<double>& h,
                          std::vector<std::vector<double>>* marg) const;
  std::vector<double> combine(const std::vector<double>& h) const;

  ProgramSpec spec_;
  std::size_t source_size_ = 0;
  std::vector<std::vector<std::uint32_t>> row_of_;       // [block][s]
  std::vector<std::vector<std::size_t>> row_offset_;     // [block][row], size rows+1
  std::vector<std::vector<std::uint32_t>> entry_out_;    // [block] flat tuples
  std::vector<std::vector<double>> row_mass_;            // [block][row]

  // Cells: (probable s, one entry per block).
  std::vector<std::uint32_t> cell_s_;
  std::vector<std::vector<std::uint32_t>> cell_entry_;   // [block][cell]
  std::vector<std::uint8_t> cell_ok_;
  std::vector<std::size_t> cell_base_;                   // [s], npos if improbable
  std::vector<std::vector<std::size_t>> cell_stride_;    // [s][block]
  std::vector<std::vector<std::uint32_t>> entry_cells_;  // [block] CSR payload
  std::vector<std::vector<std::size_t>> entry_cells_at_; // [block] CSR offsets

  // Distinct coordinate subsets appearing in quantities.
  std::vector<std::vector<std::uint32_t>> marg_id_;      // [marginal][cell]
  std::vector<std::size_t> marg_size_;
  std::vector<std::vector<std::pair<std::size_t, double>>> quantity_terms_;

  // Deterministic enumeration slots.
  std::vector<std::pair<std::size_t, std::size_t>> slots_;  // (block, row)
  std::vector<std::vector<std::int64_t>> slot_of_;          // [block][row], -1 if fixed
  double det_count_ = 0.0;
};

}  // namespace hyperrate::detail
