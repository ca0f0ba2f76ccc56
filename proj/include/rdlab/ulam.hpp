#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdlab/families.hpp"
#include "rdlab/perturbation.hpp"
#include "rdlab/phase_space.hpp"

namespace rdlab {

/// Sparse row-stochastic matrix in compressed-row form.  Row i holds the
/// estimated probabilities of moving from cell i to each target cell.
class TransitionMatrix {
 public:
  struct Entry {
    std::uint32_t col;
    double prob;
  };

  TransitionMatrix() = default;
  /// Rows must be sorted by column, nonnegative and sum to 1 within 1e-12.
  TransitionMatrix(std::vector<std::vector<Entry>> rows, std::vector<std::uint64_t> samples);

  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return entries_.size(); }
  [[nodiscard]] std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }
  /// P(i, j); zero when j is not stored in row i.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::uint64_t samples(std::size_t i) const { return samples_[i]; }
  /// Largest |row sum - 1| over all rows.
  [[nodiscard]] double max_row_defect() const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> samples_;
};

struct UlamParams {
  std::size_t points_per_cell = 16;
  std::size_t samples_per_point = 16;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Monte Carlo Ulam matrix of the noise-averaged kernel: for each source cell,
/// `points_per_cell` points in the cell, each pushed with `samples_per_point`
/// parameters from the ball.  Both sets are Latin hypercube samples (mapped
/// onto the ball by a volume-preserving change of variables), so every
/// estimate is unbiased and no noisier than plain uniform draws.  Cell c uses
/// stream (seed, c), so the matrix does not depend on the thread count.
[[nodiscard]] TransitionMatrix build_transition(const ParametricFamily& fam, const GridSpec& grid,
                                                const PerturbationSpace& space, const UlamParams& params);

/// Stationary law of P restricted to a closed class.  Zero outside the class.
struct StationaryVector {
  std::vector<double> weights;
  std::size_t period = 1;
  std::size_t iterations = 0;
  double residual = 0.0;  ///< ||w P - w||_1
};

struct PowerIteration {
  std::size_t max_iterations = 100000;
  double tolerance = 1e-11;      ///< L1 change per r-step sweep
  double closure_tolerance = 1e-9;  ///< admissible mass leaving the class per row
};

/// Splits a strongly connected cell set into its cyclic classes under the
/// support {P(i,j) > theta}.  Classes are numbered by BFS level modulo the
/// period starting from the smallest cell, which lies in class 0.  Throws
/// std::invalid_argument when `cells` is not strongly connected.
[[nodiscard]] std::vector<std::vector<std::size_t>> cyclic_partition(const TransitionMatrix& p,
                                                                     std::span<const std::size_t> cells,
                                                                     double theta = 0.0);

/// Power iteration on a closed class.  A class of period r is solved with the
/// r-step chain started on class 0, then pushed once through each remaining
/// cyclic class, and the r laws are averaged.  Throws std::invalid_argument for
/// a class that is not closed and NumericalError when iteration does not
/// converge.
[[nodiscard]] StationaryVector stationary_vector(const TransitionMatrix& p, std::span<const std::size_t> cells,
                                                 const PowerIteration& opts = {});
[[nodiscard]] StationaryVector stationary_vector(const TransitionMatrix& p,
                                                 const std::vector<std::vector<std::size_t>>& cyclic_classes,
                                                 const PowerIteration& opts = {});

/// d P (row vector times matrix).
[[nodiscard]] std::vector<double> push_forward(const TransitionMatrix& p, std::span<const double> density);

[[nodiscard]] double l1_distance(std::span<const double> a, std::span<const double> b);

/// Text export: header comment line, then one "row col prob" line per entry.
[[nodiscard]] std::string matrix_coo_text(const TransitionMatrix& p, const std::string& header_comment);
/// CSV export "cell,weight" of the nonzero weights.
[[nodiscard]] std::string stationary_csv(const StationaryVector& v, const std::string& header_comment);

}  // namespace rdlab
