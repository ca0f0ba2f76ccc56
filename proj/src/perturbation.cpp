#include "rdlab/perturbation.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"
#include "rdlab/io.hpp"
#include "rdlab/parallel.hpp"

namespace rdlab {

PerturbationSpace::PerturbationSpace(Point center, double radius) : center_(center), radius_(radius) {
  if (center_.empty()) throw std::invalid_argument("perturbation space requires a parameter dimension >= 1");
  if (!(radius_ >= 0.0) || !std::isfinite(radius_))
    throw std::invalid_argument("perturbation radius must be finite and non-negative");
}

PerturbationSpace PerturbationSpace::around(const ParametricFamily& fam, double radius) {
  if (!(radius <= fam.max_offset()))
    throw std::out_of_range(fam.name() + ": noise radius exceeds the declared parameter range");
  return PerturbationSpace(fam.nominal(), radius);
}

Point PerturbationStream::sample(const PerturbationSpace& space) {
  const std::size_t n = space.dim();
  Point t = space.center();
  if (space.radius() == 0.0) return t;
  Point u(n);
  if (n == 1) {
    u[0] = 2.0 * rng_.uniform() - 1.0;
  } else {
    for (;;) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = 2.0 * rng_.uniform() - 1.0;
        r2 += u[i] * u[i];
      }
      if (r2 <= 1.0) break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) t[i] += space.radius() * u[i];
  return t;
}

// ---------------------------------------------------------------------------
// Observables

Observable Observable::constant(double c) {
  return Observable("const:" + format_real(c), [c](const Point&) { return c; });
}

Observable Observable::coordinate(std::size_t axis) {
  return Observable("x" + std::to_string(axis), [axis](const Point& p) { return p[axis]; });
}

Observable Observable::cos2pi(std::size_t axis) {
  return Observable("cos:" + std::to_string(axis),
                    [axis](const Point& p) { return std::cos(2.0 * std::numbers::pi * p[axis]); });
}

Observable Observable::sin2pi(std::size_t axis) {
  return Observable("sin:" + std::to_string(axis),
                    [axis](const Point& p) { return std::sin(2.0 * std::numbers::pi * p[axis]); });
}

Observable Observable::indicator(Region region) {
  return Observable("box", [region](const Point& p) { return region.contains(p) ? 1.0 : 0.0; });
}

namespace {

std::size_t parse_axis(const std::string& s, std::size_t dim) {
  std::size_t axis = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), axis);
  if (ec != std::errc() || ptr != s.data() + s.size() || axis >= dim)
    throw ConfigError("observable axis '" + s + "' is not a valid coordinate index");
  return axis;
}

}  // namespace

Observable Observable::parse(const std::string& spec, std::size_t dim) {
  if (spec == "x" || spec == "identity") return coordinate(0);
  if (spec == "y") {
    if (dim < 2) throw ConfigError("observable 'y' needs a 2-D phase space");
    return coordinate(1);
  }
  if (spec.size() > 1 && spec[0] == 'x') return coordinate(parse_axis(spec.substr(1), dim));
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("unknown observable '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "cos") return cos2pi(parse_axis(rest, dim));
  if (kind == "sin") return sin2pi(parse_axis(rest, dim));
  if (kind == "const") return constant(parse_real(rest, "observable constant"));
  if (kind == "box") return indicator(parse_region(rest, dim));
  throw ConfigError("unknown observable '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Orbits

OrbitSample iterate(const ParametricFamily& fam, const Point& x0, std::span<const Point> params) {
  OrbitSample orbit{x0, {params.begin(), params.end()}, {}};
  orbit.visited.reserve(params.size() + 1);
  orbit.visited.push_back(x0);
  Point x = x0;
  for (const Point& t : params) {
    x = fam.eval(x, t);
    orbit.visited.push_back(x);
  }
  return orbit;
}

OrbitSample sample_orbit(const ParametricFamily& fam, const PerturbationSpace& space, const Point& x0,
                         PerturbationStream& stream, std::size_t steps) {
  std::vector<Point> params;
  params.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) params.push_back(stream.sample(space));
  return iterate(fam, x0, params);
}

double birkhoff_average(const ParametricFamily& fam, const PerturbationSpace& space, const Point& x0,
                        PerturbationStream& stream, const Observable& phi, std::size_t n, std::size_t burn) {
  if (!(n > burn)) throw std::invalid_argument("birkhoff_average requires N > burn");
  Point x = x0;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j >= burn) {
      const double v = phi(x);
      if (!std::isfinite(v)) throw NumericalError("birkhoff_average: non-finite observable value");
      sum += v;
    }
    if (j + 1 < n) x = fam.eval_trusted(x, stream.sample(space));
  }
  return sum / static_cast<double>(n - burn);
}

std::vector<double> running_averages(const ParametricFamily& fam, const PerturbationSpace& space, const Point& x0,
                                     PerturbationStream& stream, const Observable& phi,
                                     std::span<const std::size_t> checkpoints) {
  std::vector<double> out;
  out.reserve(checkpoints.size());
  if (checkpoints.empty()) return out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0 || (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw std::invalid_argument("checkpoints must be positive and strictly increasing");
  }
  Point x = x0;
  double sum = 0.0;
  std::size_t next = 0;
  for (std::size_t j = 0; j < checkpoints.back(); ++j) {
    const double v = phi(x);
    if (!std::isfinite(v)) throw NumericalError("running_averages: non-finite observable value");
    sum += v;
    if (j + 1 == checkpoints[next]) {
      out.push_back(sum / static_cast<double>(j + 1));
      ++next;
    }
    if (j + 1 < checkpoints.back()) x = fam.eval_trusted(x, stream.sample(space));
  }
  return out;
}

std::vector<std::size_t> return_times(const ParametricFamily& fam, const PerturbationSpace& space, const Point& x0,
                                      PerturbationStream& stream, const Region& q, std::size_t max_returns,
                                      std::size_t horizon) {
  std::vector<std::size_t> out;
  Point x = x0;
  std::size_t last_visit = 0;
  bool visited = false;
  for (std::size_t k = 0; k <= horizon && out.size() < max_returns; ++k) {
    if (q.contains(x)) {
      out.push_back(visited ? k - last_visit : k);
      last_visit = k;
      visited = true;
    }
    if (k < horizon) x = fam.eval_trusted(x, stream.sample(space));
  }
  return out;
}

double estimate_recurrence_probability(const ParametricFamily& fam, const Point& x0, const PerturbationSpace& space,
                                       const Region& q, std::size_t n_trials, std::size_t horizon,
                                       std::size_t n_returns, std::uint64_t master_seed, unsigned threads) {
  if (n_trials == 0) throw std::invalid_argument("estimate_recurrence_probability requires n_trials >= 1");
  std::vector<unsigned char> hit(n_trials, 0);
  parallel_for(n_trials, threads, [&](std::size_t trial) {
    PerturbationStream stream(master_seed, trial);
    // n returns means n visits after time 0 (the first entry may be k = 0).
    const auto times = return_times(fam, space, x0, stream, q, n_returns + 1, horizon);
    std::size_t returns = times.size();
    if (!times.empty() && times.front() == 0) --returns;
    hit[trial] = returns >= n_returns ? 1 : 0;
  });
  std::size_t count = 0;
  for (unsigned char h : hit) count += h;
  return static_cast<double>(count) / static_cast<double>(n_trials);
}

std::string orbit_csv(const OrbitSample& orbit, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  const std::size_t d = orbit.initial.size();
  const std::size_t n = orbit.params.empty() ? 0 : orbit.params.front().size();
  os << "step";
  for (std::size_t i = 0; i < d; ++i) os << ",x" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",t" << i;
  os << '\n';
  for (std::size_t k = 0; k < orbit.visited.size(); ++k) {
    os << k;
    for (std::size_t i = 0; i < d; ++i) os << ',' << format_real(orbit.visited[k][i]);
    for (std::size_t i = 0; i < n; ++i) {
      os << ',';
      if (k < orbit.params.size()) os << format_real(orbit.params[k][i]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace rdlab
