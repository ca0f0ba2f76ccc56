#include "rdlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"
#include "rdlab/io.hpp"
#include "rdlab/parallel.hpp"

namespace rdlab {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Salts separating the stream families used inside one routine.
constexpr std::uint64_t kSaltStart = 0x5354415254ULL;
constexpr std::uint64_t kSaltNoise = 0x4e4f495345ULL;
constexpr std::uint64_t kSaltProbe = 0x50524f4245ULL;

Point uniform_in(const Region& r, PerturbationStream& s) {
  Point p(r.lower.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = r.lower[i] + (r.upper[i] - r.lower[i]) * s.uniform();
  return p;
}

std::vector<std::size_t> owner_map(std::size_t n, const std::vector<DomainApprox>& domains) {
  std::vector<std::size_t> owner(n, kNone);
  for (std::size_t k = 0; k < domains.size(); ++k)
    for (std::size_t c : domains[k].cells) {
      if (c >= n) throw std::invalid_argument("domain cell outside the grid");
      if (owner[c] != kNone) throw std::invalid_argument("domains are not pairwise disjoint");
      owner[c] = k;
    }
  return owner;
}

EmpiricalMeasure from_counts(const GridSpec& grid, const std::vector<std::uint64_t>& counts) {
  EmpiricalMeasure m{grid, std::vector<double>(counts.size(), 0.0), 0};
  for (auto c : counts) m.samples += c;
  if (m.samples == 0) return m;
  const double inv = 1.0 / static_cast<double>(m.samples);
  for (std::size_t i = 0; i < counts.size(); ++i) m.weights[i] = static_cast<double>(counts[i]) * inv;
  return m;
}

}  // namespace

double EmpiricalMeasure::total() const noexcept {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double EmpiricalMeasure::max_weight() const noexcept {
  return weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
}

EmpiricalMeasure histogram(const PhaseBox& box, const GridSpec& grid, std::span<const Point> points) {
  check_compatible(box, grid);
  std::vector<std::uint64_t> counts(grid.total(), 0);
  for (const Point& p : points) ++counts[locate(box, grid, p).value];
  return from_counts(grid, counts);
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

EmpiricalMeasure cesaro_pushforward(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                                    std::size_t n_orbits, std::size_t n_steps, const GridSpec& grid,
                                    std::uint64_t seed, unsigned threads) {
  if (n_orbits == 0 || n_steps == 0) throw std::invalid_argument("cesaro_pushforward: n_orbits and n_steps must be >= 1");
  const PhaseBox& box = fam.box();
  check_compatible(box, grid);
  // Integer counts per fixed block of orbits; merging integers is exact, so
  // the result does not depend on scheduling.
  const std::size_t blocks = std::min<std::size_t>(n_orbits, 64);
  std::vector<std::vector<std::uint64_t>> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    auto& counts = partial[b];
    counts.assign(grid.total(), 0);
    const std::size_t lo = n_orbits * b / blocks, hi = n_orbits * (b + 1) / blocks;
    for (std::size_t o = lo; o < hi; ++o) {
      PerturbationStream stream(seed, o);
      Point y = x;
      for (std::size_t j = 0; j < n_steps; ++j) {
        y = fam.eval_trusted(y, stream.sample(space));
        ++counts[locate(box, grid, y).value];
      }
    }
  });
  std::vector<std::uint64_t> counts(grid.total(), 0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];
  return from_counts(grid, counts);
}

BasinProfile basin_classify(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                            const GridSpec& grid, const std::vector<DomainApprox>& domains, std::size_t n_trials,
                            std::size_t horizon, std::uint64_t seed, unsigned threads) {
  if (n_trials == 0) throw std::invalid_argument("basin_classify: n_trials must be >= 1");
  const PhaseBox& box = fam.box();
  check_compatible(box, grid);
  const auto owner = owner_map(grid.total(), domains);
  std::vector<std::size_t> result(n_trials, kNone);
  parallel_for(n_trials, threads, [&](std::size_t trial) {
    PerturbationStream stream(seed, trial);
    Point y = canonicalize(box, x);
    for (std::size_t k = 0;; ++k) {
      const std::size_t o = owner[locate(box, grid, y).value];
      if (o != kNone) {
        result[trial] = o;
        return;
      }
      if (k == horizon) return;
      y = fam.eval_trusted(y, stream.sample(space));
    }
  });
  BasinProfile prof;
  prof.horizon = horizon;
  prof.trials = n_trials;
  std::vector<std::size_t> counts(domains.size(), 0);
  std::size_t open = 0;
  for (std::size_t r : result) (r == kNone ? open : counts[r]) += 1;
  const double inv = 1.0 / static_cast<double>(n_trials);
  for (std::size_t c : counts) prof.probabilities.push_back(static_cast<double>(c) * inv);
  prof.unresolved = static_cast<double>(open) * inv;
  return prof;
}

double profile_distance(const BasinProfile& a, const BasinProfile& b) {
  if (a.probabilities.size() != b.probabilities.size()) throw std::invalid_argument("profile_distance: size mismatch");
  double s = std::abs(a.unresolved - b.unresolved);
  for (std::size_t i = 0; i < a.probabilities.size(); ++i) s += std::abs(a.probabilities[i] - b.probabilities[i]);
  return s;
}

double basin_continuity_probe(const ParametricFamily& fam, const Point& x, double delta, const PerturbationSpace& space,
                              const GridSpec& grid, const std::vector<DomainApprox>& domains, std::size_t n_trials,
                              std::size_t horizon, std::size_t n_neighbors, std::uint64_t seed, unsigned threads) {
  if (!(delta >= 0.0)) throw std::invalid_argument("basin_continuity_probe: delta must be >= 0");
  const BasinProfile base = basin_classify(fam, x, space, grid, domains, n_trials, horizon, seed, threads);
  PerturbationStream dirs(seed, kSaltProbe);
  const std::size_t d = x.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < n_neighbors; ++j) {
    Point u(d);
    if (d == 1) {
      u[0] = j % 2 == 0 ? 1.0 : -1.0;
    } else {
      double r = 0.0;
      do {
        r = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          u[i] = 2.0 * dirs.uniform() - 1.0;
          r += u[i] * u[i];
        }
      } while (r > 1.0 || r < 1e-12);
      u *= 1.0 / std::sqrt(r);
    }
    const Point y = canonicalize(fam.box(), x + delta * u);
    const BasinProfile other =
        basin_classify(fam, y, space, grid, domains, n_trials, horizon, derive_seed(seed, j + 1), threads);
    worst = std::max(worst, profile_distance(base, other));
  }
  return worst;
}

namespace {

// Fibonacci lattice on the unit sphere.
std::vector<Point> sphere_directions(std::size_t n) {
  std::vector<Point> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    out.push_back(Point{r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

std::size_t nearest_direction(const std::vector<Point>& dirs, const Point& u) {
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double c = dot(dirs[i], u);
    if (c > best_dot) {
      best_dot = c;
      best = i;
    }
  }
  return best;
}

// Angular covering radius of the lattice, estimated on a dense probe set.
double covering_angle(const std::vector<Point>& dirs) {
  double worst = 1.0;
  for (const Point& probe : sphere_directions(20000)) worst = std::min(worst, dot(dirs[nearest_direction(dirs, probe)], probe));
  return std::acos(std::clamp(worst, -1.0, 1.0));
}

Point nominal_iterate(const ParametricFamily& fam, const Point& x, std::size_t k) {
  Point y = canonicalize(fam.box(), x);
  for (std::size_t j = 0; j < k; ++j) y = fam.eval(y, fam.nominal());
  return y;
}

}  // namespace

HypothesisAReport check_hypothesis_A(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                                     std::size_t k, std::size_t n_samples, std::size_t n_directions,
                                     std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("check_hypothesis_A: k must be >= 1");
  const std::size_t d = fam.state_dim();
  if (d >= 2 && n_directions < 3) throw std::invalid_argument("check_hypothesis_A: need at least 3 directions");
  HypothesisAReport rep;
  rep.k = k;
  rep.samples = n_samples;
  const Point center = nominal_iterate(fam, x, k);
  std::vector<Point> dirs;
  if (d == 1) {
    rep.directions = 2;
  } else if (d == 2) {
    rep.directions = n_directions;
    rep.shrink = std::cos(2.0 * std::numbers::pi / static_cast<double>(n_directions));
  } else {
    rep.directions = n_directions;
    dirs = sphere_directions(n_directions);
    rep.shrink = std::cos(std::min(2.0 * covering_angle(dirs), std::numbers::pi / 2));
  }
  std::vector<double> reach(rep.directions, 0.0);
  std::vector<char> hit(rep.directions, 0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    PerturbationStream stream(seed, s);
    Point y = canonicalize(fam.box(), x);
    for (std::size_t j = 0; j < k; ++j) y = fam.eval_trusted(y, stream.sample(space));
    const Point disp = fam.box().displacement(center, y);
    const double r = norm(disp);
    if (r == 0.0) {
      // A sample on the center lies in every cone at distance 0.
      std::fill(hit.begin(), hit.end(), 1);
      continue;
    }
    std::size_t bin;
    if (d == 1) {
      bin = disp[0] > 0.0 ? 0 : 1;
    } else if (d == 2) {
      const double ang = std::atan2(disp[1], disp[0]) + std::numbers::pi;
      bin = std::min(rep.directions - 1,
                     static_cast<std::size_t>(ang / (2.0 * std::numbers::pi) * static_cast<double>(rep.directions)));
    } else {
      bin = nearest_direction(dirs, (1.0 / r) * disp);
    }
    hit[bin] = 1;
    reach[bin] = std::max(reach[bin], r);
  }
  double raw = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < rep.directions; ++b) raw = std::min(raw, hit[b] ? reach[b] : 0.0);
  rep.xi_hat = std::isfinite(raw) ? raw * rep.shrink : 0.0;
  return rep;
}

NoAtomsReport check_no_atoms(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                             std::size_t k, const std::vector<GridSpec>& grids, std::size_t n_samples,
                             std::uint64_t seed, double max_growth) {
  if (k == 0) throw std::invalid_argument("check_no_atoms: k must be >= 1");
  if (grids.empty() || n_samples == 0) throw std::invalid_argument("check_no_atoms: need grids and samples");
  for (std::size_t j = 1; j < grids.size(); ++j)
    if (grids[j].total() <= grids[j - 1].total())
      throw std::invalid_argument("check_no_atoms: resolutions must be strictly increasing");
  std::vector<Point> pts(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    PerturbationStream stream(seed, s);
    Point y = canonicalize(fam.box(), x);
    for (std::size_t j = 0; j < k; ++j) y = fam.eval_trusted(y, stream.sample(space));
    pts[s] = y;
  }
  NoAtomsReport rep;
  for (const GridSpec& g : grids) {
    rep.cells.push_back(g.total());
    rep.max_masses.push_back(histogram(fam.box(), g, pts).max_weight());
  }
  bool ok = true;
  for (std::size_t j = 1; j < grids.size(); ++j) {
    const double ratio = rep.max_masses[j] / rep.max_masses[j - 1];
    rep.step_ratios.push_back(ratio);
    const double vol_ratio = static_cast<double>(rep.cells[j - 1]) / static_cast<double>(rep.cells[j]);
    if (!(ratio <= std::sqrt(vol_ratio))) ok = false;
  }
  rep.density_growth = (rep.max_masses.back() * static_cast<double>(rep.cells.back())) /
                       (rep.max_masses.front() * static_cast<double>(rep.cells.front()));
  rep.passed = ok && grids.size() >= 2 && rep.density_growth <= max_growth;
  return rep;
}

double lyapunov_top(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                    PerturbationStream& stream, std::size_t n, std::size_t renorm_every) {
  if (!fam.has_jacobian()) throw std::logic_error(fam.name() + ": family has no Jacobian");
  if (renorm_every == 0 || n < renorm_every) throw std::invalid_argument("lyapunov_top: need N >= renorm_every >= 1");
  const std::size_t d = fam.state_dim();
  Point v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(d)) * (i == 0 ? 1.0 : 0.7);
  v *= 1.0 / norm(v);
  Point y = canonicalize(fam.box(), x);
  double log_sum = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const Point t = stream.sample(space);
    v = fam.jacobian(y, t) * v;
    y = fam.eval_trusted(y, t);
    if (j % renorm_every == 0 || j == n) {
      const double r = norm(v);
      if (!(r > 0.0) || !std::isfinite(r)) throw NumericalError("lyapunov_top: tangent vector degenerated");
      log_sum += std::log(r);
      v *= 1.0 / r;
    }
  }
  return log_sum / static_cast<double>(n);
}

namespace {

// Signed distance to the complement of r (positive inside), sup-norm.
double inner_margin(const Region& r, const Point& p) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) m = std::min({m, p[i] - r.lower[i], r.upper[i] - p[i]});
  return m;
}

std::vector<Point> boundary_points(const Region& u, std::size_t per_face, PerturbationStream& s) {
  const std::size_t d = u.lower.size();
  std::vector<Point> out;
  // Corners.
  for (std::size_t mask = 0; mask < (1u << d); ++mask) {
    Point p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = (mask >> i) & 1u ? u.upper[i] : u.lower[i];
    out.push_back(p);
  }
  if (d == 1) return out;
  for (std::size_t ax = 0; ax < d; ++ax)
    for (int side = 0; side < 2; ++side)
      for (std::size_t k = 0; k < per_face; ++k) {
        Point p = uniform_in(u, s);
        p[ax] = side ? u.upper[ax] : u.lower[ax];
        out.push_back(p);
      }
  return out;
}

// Parameters used for the invariance test: the extreme points of the ball
// along each axis, plus random draws.
std::vector<Point> probe_parameters(const PerturbationSpace& space, std::size_t n_random, PerturbationStream& s) {
  std::vector<Point> out{space.center()};
  for (std::size_t i = 0; i < space.dim(); ++i)
    for (double sign : {-1.0, 1.0}) {
      Point t = space.center();
      t[i] += sign * space.radius();
      out.push_back(t);
    }
  for (std::size_t k = 0; k < n_random; ++k) out.push_back(s.sample(space));
  return out;
}

double cloud_diameter(const std::vector<Point>& pts) {
  if (pts.empty()) return 0.0;
  const std::size_t d = pts.front().size();
  // Exact in 1-D; the bounding-box diagonal (an upper bound) otherwise.
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double lo = pts.front()[i], hi = lo;
    for (const Point& p : pts) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    s += (hi - lo) * (hi - lo);
  }
  return std::sqrt(s);
}

}  // namespace

SinkReport verify_sink_perturbation(const ParametricFamily& fam, const std::vector<Region>& neighborhoods,
                                    const std::vector<double>& epsilons, std::size_t trials, std::size_t horizon,
                                    const SinkOptions& opts) {
  const std::size_t r = neighborhoods.size();
  if (r == 0) throw std::invalid_argument("verify_sink_perturbation: no neighborhoods");
  if (epsilons.empty()) throw std::invalid_argument("verify_sink_perturbation: empty epsilon list");
  if (trials == 0 || horizon < 10) throw std::invalid_argument("verify_sink_perturbation: need trials >= 1, horizon >= 10");
  for (std::size_t i = 0; i < r; ++i) {
    if (neighborhoods[i].lower.size() != fam.state_dim())
      throw std::invalid_argument("verify_sink_perturbation: neighborhood dimension mismatch");
    for (std::size_t j = i + 1; j < r; ++j)
      if (neighborhoods[i].overlaps(neighborhoods[j]))
        throw std::invalid_argument("verify_sink_perturbation: neighborhoods overlap");
  }
  SinkReport rep;
  rep.period = r;
  rep.epsilons = epsilons;
  rep.max_epsilon = *std::max_element(epsilons.begin(), epsilons.end());
  const PerturbationSpace widest = PerturbationSpace::around(fam, rep.max_epsilon);

  // Condition 1: closure of U_i is carried strictly inside U_{i+1}.
  PerturbationStream probe(derive_seed(opts.seed, kSaltProbe), 0);
  rep.invariance_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r; ++i) {
    const Region& target = neighborhoods[(i + 1) % r];
    auto pts = boundary_points(neighborhoods[i], opts.boundary_samples, probe);
    for (std::size_t k = 0; k < opts.boundary_samples; ++k) pts.push_back(uniform_in(neighborhoods[i], probe));
    const auto params = probe_parameters(widest, 8, probe);
    for (const Point& p : pts)
      for (const Point& t : params) rep.invariance_margin = std::min(rep.invariance_margin, inner_margin(target, fam.eval(p, t)));
  }
  rep.condition1 = rep.invariance_margin > 0.0;

  // Condition 2: negative top exponent from interior starts.
  std::vector<double> exps(opts.lyapunov_starts, 0.0);
  parallel_for(opts.lyapunov_starts, opts.threads, [&](std::size_t s) {
    PerturbationStream start(derive_seed(opts.seed, kSaltStart), s);
    PerturbationStream noise(derive_seed(opts.seed, kSaltNoise), s);
    const Point x0 = uniform_in(neighborhoods[s % r], start);
    exps[s] = lyapunov_top(fam, x0, widest, noise, opts.lyapunov_steps, opts.renorm_every);
  });
  rep.lyapunov_max = exps.empty() ? 0.0 : *std::max_element(exps.begin(), exps.end());
  rep.beta_hat = -rep.lyapunov_max;
  rep.condition2 = !exps.empty() && rep.beta_hat > 0.0;

  // Condition 3: tails of long orbits started in U_0, per epsilon.
  const std::size_t tail = std::max<std::size_t>(1, horizon / 10);
  bool finite = true;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    const PerturbationSpace space = PerturbationSpace::around(fam, epsilons[e]);
    std::vector<std::vector<Point>> tails(trials);
    parallel_for(trials, opts.threads, [&](std::size_t trial) {
      PerturbationStream start(derive_seed(opts.seed, kSaltStart + 1), trial);
      PerturbationStream noise(derive_seed(opts.seed, kSaltNoise + 1), trial);
      Point y = uniform_in(neighborhoods[0], start);
      auto& out = tails[trial];
      out.reserve(tail);
      for (std::size_t k = 1; k <= horizon; ++k) {
        y = fam.eval_trusted(y, noise.sample(space));
        if (k > horizon - tail) out.push_back(y);
      }
    });
    double diam = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<Point> inside;
      for (const auto& t : tails)
        for (const Point& p : t)
          if (neighborhoods[i].contains(p)) inside.push_back(p);
      diam = std::max(diam, cloud_diameter(inside));
    }
    finite = finite && std::isfinite(diam);
    rep.diameters.push_back(diam);
    rep.diameter_over_epsilon.push_back(epsilons[e] > 0.0 ? diam / epsilons[e] : 0.0);
  }
  bool tracks = finite;
  for (std::size_t e = 1; e < epsilons.size() && tracks; ++e) {
    if (!(epsilons[0] > 0.0 && rep.diameters[0] > 0.0)) {
      tracks = false;
      break;
    }
    const double rel = (rep.diameters[e] / rep.diameters[0]) / (epsilons[e] / epsilons[0]);
    if (!(std::abs(rel - 1.0) <= opts.ratio_tolerance)) tracks = false;
  }
  rep.condition3 = tracks;
  return rep;
}

double max_pairwise_spread(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double time_average_oscillation(const ParametricFamily& fam, const Point& x, const PerturbationSpace& space,
                                PerturbationStream& stream, const Observable& phi,
                                std::span<const std::size_t> checkpoints) {
  if (checkpoints.size() < 2) throw std::invalid_argument("time_average_oscillation: need at least 2 checkpoints");
  const auto avgs = running_averages(fam, space, x, stream, phi, checkpoints);
  return max_pairwise_spread(avgs);
}

double support_coverage(const PhaseBox& box, const GridSpec& grid, std::span<const double> weights,
                        std::span<const Point> reference, double radius) {
  check_compatible(box, grid);
  if (weights.size() != grid.total()) throw std::invalid_argument("support_coverage: weight length mismatch");
  std::size_t near = 0, covered = 0;
  for (std::size_t c = 0; c < grid.total(); ++c) {
    const Point center = cell_geometry(box, grid, CellIndex{c}).center;
    bool close = false;
    for (const Point& q : reference)
      if (box.distance(center, q) <= radius) {
        close = true;
        break;
      }
    if (!close) continue;
    ++near;
    if (weights[c] > 0.0) ++covered;
  }
  return near == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(near);
}

std::string measure_csv(const EmpiricalMeasure& m, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "cell,weight\n";
  for (std::size_t i = 0; i < m.weights.size(); ++i) os << i << ',' << format_real(m.weights[i]) << '\n';
  return os.str();
}

}  // namespace rdlab
