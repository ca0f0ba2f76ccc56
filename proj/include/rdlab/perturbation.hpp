#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdlab/families.hpp"
#include "rdlab/phase_space.hpp"
#include "rdlab/point.hpp"
#include "rdlab/rng.hpp"

namespace rdlab {

/// Closed parameter ball of radius epsilon around the nominal parameter,
/// carrying the normalized Lebesgue measure.
class PerturbationSpace {
 public:
  PerturbationSpace(Point center, double radius);

  /// Ball around the family's nominal parameter; throws std::out_of_range
  /// when the ball leaves the family's declared parameter range.
  static PerturbationSpace around(const ParametricFamily& fam, double radius);

  [[nodiscard]] const Point& center() const noexcept { return center_; }
  [[nodiscard]] double radius() const noexcept { return radius_; }
  [[nodiscard]] std::size_t dim() const noexcept { return center_.size(); }

 private:
  Point center_;
  double radius_;
};

/// One realization of the noise sequence t_1, t_2, ...  Draws are a pure
/// function of (master seed, stream index); advancing the stream is the
/// left shift on perturbation sequences.
class PerturbationStream {
 public:
  PerturbationStream(std::uint64_t master_seed, std::uint64_t stream_index) : rng_(master_seed, stream_index) {}

  /// Uniform draw on the ball (rejection from the bounding cube).
  Point sample(const PerturbationSpace& space);
  double uniform() noexcept { return rng_.uniform(); }

  [[nodiscard]] std::uint64_t master_seed() const noexcept { return rng_.seed(); }
  [[nodiscard]] std::uint64_t stream_index() const noexcept { return rng_.stream_index(); }
  [[nodiscard]] std::uint64_t counter() const noexcept { return rng_.counter(); }

 private:
  CounterRng rng_;
};

[[nodiscard]] inline Point sample_parameter(const PerturbationSpace& space, PerturbationStream& stream) {
  return stream.sample(space);
}

/// Scalar function on phase space.  The CLI only builds the named
/// observables below; library callers may wrap any function.
class Observable {
 public:
  Observable(std::string name, std::function<double(const Point&)> fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static Observable constant(double c);
  static Observable coordinate(std::size_t axis);
  static Observable cos2pi(std::size_t axis);
  static Observable sin2pi(std::size_t axis);
  static Observable indicator(Region region);
  /// Parses "x0", "y"/"x1", "cos:0", "sin:1", "const:2.5", "box:lo0,lo1:hi0,hi1".
  static Observable parse(const std::string& spec, std::size_t dim);

  double operator()(const Point& p) const { return fn_(p); }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::function<double(const Point&)> fn_;
};

/// The t-orbit of a point: visited[0] = initial, visited[j+1] = f(visited[j], params[j]).
struct OrbitSample {
  Point initial;
  std::vector<Point> params;
  std::vector<Point> visited;
};

/// Perturbed iterate f_{t_k} o ... o f_{t_1}(x0); an empty parameter list
/// gives the orbit [x0].
[[nodiscard]] OrbitSample iterate(const ParametricFamily& fam, const Point& x0, std::span<const Point> params);

/// Draws `steps` parameters from `stream` and iterates.
[[nodiscard]] OrbitSample sample_orbit(const ParametricFamily& fam, const PerturbationSpace& space,
                                       const Point& x0, PerturbationStream& stream, std::size_t steps);

/// (1/(N - burn)) sum_{j=burn}^{N-1} phi(x_j) along one sampled orbit.
/// Throws NumericalError when phi returns a non-finite value.
[[nodiscard]] double birkhoff_average(const ParametricFamily& fam, const PerturbationSpace& space, const Point& x0,
                                      PerturbationStream& stream, const Observable& phi, std::size_t n,
                                      std::size_t burn);

/// Running averages A_n = (1/n) sum_{j<n} phi(x_j) at each checkpoint n.
[[nodiscard]] std::vector<double> running_averages(const ParametricFamily& fam, const PerturbationSpace& space,
                                                   const Point& x0, PerturbationStream& stream,
                                                   const Observable& phi, std::span<const std::size_t> checkpoints);

/// Successive return times to Q: the first entry is min{k >= 0 : x_k in Q},
/// the following ones are the gaps between consecutive visits.  Only returns
/// completed within `horizon` steps are listed; a missing entry means the
/// return time is infinite as far as the horizon can tell.
[[nodiscard]] std::vector<std::size_t> return_times(const ParametricFamily& fam, const PerturbationSpace& space,
                                                    const Point& x0, PerturbationStream& stream, const Region& q,
                                                    std::size_t max_returns, std::size_t horizon);

/// Fraction of independent streams (master_seed, 0..n_trials-1) along which
/// the orbit of x0 completes `n_returns` returns to Q within `horizon`.
[[nodiscard]] double estimate_recurrence_probability(const ParametricFamily& fam, const Point& x0,
                                                     const PerturbationSpace& space, const Region& q,
                                                     std::size_t n_trials, std::size_t horizon,
                                                     std::size_t n_returns, std::uint64_t master_seed,
                                                     unsigned threads = 0);

/// Orbit CSV: "# config_hash=.. seed=.." header line, then
/// step,x0..x{d-1},t0..t{n-1} where row k holds x_k and the parameter used to
/// leave it (empty on the last row).
[[nodiscard]] std::string orbit_csv(const OrbitSample& orbit, const std::string& header_comment);

}  // namespace rdlab
