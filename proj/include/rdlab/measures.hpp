#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdlab/domains.hpp"
#include "rdlab/families.hpp"
#include "rdlab/perturbation.hpp"
#include "rdlab/phase_space.hpp"

namespace rdlab {

/// Normalized cell-weight histogram on a grid.
struct EmpiricalMeasure {
  GridSpec grid;
  std::vector<double> weights;
  std::uint64_t samples = 0;

  [[nodiscard]] double total() const noexcept;
  [[nodiscard]] double max_weight() const noexcept;
};

/// Histogram of points with equal weights.
[[nodiscard]] EmpiricalMeasure histogram(const PhaseBox& box, const GridSpec& grid, std::span<const Point> points);
[[nodiscard]] std::vector<double> uniform_weights(std::size_t n);

/// Monte Carlo Cesaro average: histogram of x_1..x_n over `n_orbits`
/// independent orbits of x (stream (seed, orbit)).
[[nodiscard]] EmpiricalMeasure cesaro_pushforward(const ParametricFamily& fam, const Point& x,
                                                  const PerturbationSpace& space, std::size_t n_orbits,
                                                  std::size_t n_steps, const GridSpec& grid, std::uint64_t seed,
                                                  unsigned threads = 0);

/// Absorption probabilities into a list of pairwise disjoint domains.
struct BasinProfile {
  std::vector<double> probabilities;
  double unresolved = 0.0;
  std::size_t horizon = 0;
  std::size_t trials = 0;
};

[[nodiscard]] BasinProfile basin_classify(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                                          const GridSpec& grid, const std::vector<DomainApprox>& domains,
                                          std::size_t n_trials, std::size_t horizon, std::uint64_t seed,
                                          unsigned threads = 0);

/// L1 distance between two profiles (probabilities and unresolved mass).
[[nodiscard]] double profile_distance(const BasinProfile& a, const BasinProfile& b);

/// Largest profile distance between x and `n_neighbors` points at distance
/// delta from x.  Each profile uses its own derived seed.
[[nodiscard]] double basin_continuity_probe(const ParametricFamily& fam, const Point& x, double delta,
                                            const PerturbationSpace& space, const GridSpec& grid,
                                            const std::vector<DomainApprox>& domains, std::size_t n_trials,
                                            std::size_t horizon, std::size_t n_neighbors, std::uint64_t seed,
                                            unsigned threads = 0);

struct HypothesisAReport {
  std::size_t k = 1;
  double xi_hat = 0.0;
  std::size_t samples = 0;
  std::size_t directions = 0;
  double shrink = 1.0;  ///< cone-coverage factor applied to the raw min-of-max
};

/// Inradius estimate of the k-step image f^k(x, Delta) around the nominal
/// image f^k_a(x).  Displacements are binned into `n_directions` cones (in 1-D
/// the two signs); the raw estimate is the smallest over cones of the largest
/// distance reached inside the cone, then multiplied by the cone-coverage
/// factor, so that the polygon spanned by the extreme samples contains the
/// reported ball.
[[nodiscard]] HypothesisAReport check_hypothesis_A(const ParametricFamily& fam, const Point& x,
                                                   const PerturbationSpace& space, std::size_t k,
                                                   std::size_t n_samples, std::size_t n_directions,
                                                   std::uint64_t seed);

struct NoAtomsReport {
  std::vector<std::size_t> cells;     ///< total cells per grid
  std::vector<double> max_masses;
  std::vector<double> step_ratios;    ///< m_{j+1} / m_j
  double density_growth = 0.0;        ///< (m_K / v_K) / (m_0 / v_0)
  bool passed = false;
};

/// Falsification audit for absolute continuity of f^k(x, nu^inf): the largest
/// cell mass must shrink along the refinements.  Passes when every step ratio
/// is at most sqrt(v_{j+1}/v_j) and the density growth is at most `max_growth`.
[[nodiscard]] NoAtomsReport check_no_atoms(const ParametricFamily& fam, const Point& x,
                                           const PerturbationSpace& space, std::size_t k,
                                           const std::vector<GridSpec>& grids, std::size_t n_samples,
                                           std::uint64_t seed, double max_growth = 10.0);

/// Top Lyapunov exponent along one noisy orbit, renormalizing every
/// `renorm_every` steps.
[[nodiscard]] double lyapunov_top(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                                  PerturbationStream& stream, std::size_t n, std::size_t renorm_every);

struct SinkOptions {
  std::size_t boundary_samples = 64;   ///< per face
  std::size_t lyapunov_steps = 10000;
  std::size_t lyapunov_starts = 8;
  std::size_t renorm_every = 10;
  double ratio_tolerance = 0.3;        ///< allowed departure of diameter ratios from epsilon ratios
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct SinkReport {
  std::size_t period = 0;
  double max_epsilon = 0.0;
  bool condition1 = false;
  double invariance_margin = 0.0;      ///< min distance of sampled images to the complement of the target
  bool condition2 = false;
  double lyapunov_max = 0.0;           ///< largest exponent over sampled starts
  double beta_hat = 0.0;               ///< -lyapunov_max
  bool condition3 = false;
  std::vector<double> epsilons;
  std::vector<double> diameters;       ///< omega-limit diameter per epsilon
  std::vector<double> diameter_over_epsilon;
  bool passed() const noexcept { return condition1 && condition2 && condition3; }
};

/// Empirical check of the three conditions defining a perturbation of a sink
/// on neighborhoods U_0..U_{r-1} (cyclically mapped into each other).
/// Condition 1 uses the largest epsilon.  Throws std::invalid_argument when
/// neighborhoods overlap.
[[nodiscard]] SinkReport verify_sink_perturbation(const ParametricFamily& fam,
                                                  const std::vector<Region>& neighborhoods,
                                                  const std::vector<double>& epsilons, std::size_t trials,
                                                  std::size_t horizon, const SinkOptions& opts = {});

/// Largest |A_i - A_j| between the running averages at the checkpoints.
[[nodiscard]] double time_average_oscillation(const ParametricFamily& fam, const Point& x,
                                              const PerturbationSpace& space, PerturbationStream& stream,
                                              const Observable& phi, std::span<const std::size_t> checkpoints);
[[nodiscard]] double max_pairwise_spread(std::span<const double> values);

/// Fraction of cells whose center lies within `radius` of some reference
/// point that carry positive weight.
[[nodiscard]] double support_coverage(const PhaseBox& box, const GridSpec& grid, std::span<const double> weights,
                                      std::span<const Point> reference, double radius);

[[nodiscard]] std::string measure_csv(const EmpiricalMeasure& m, const std::string& header_comment);

}  // namespace rdlab
