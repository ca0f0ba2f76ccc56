#include "rdlab/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"
#include "rdlab/io.hpp"
#include "rdlab/parallel.hpp"

namespace rdlab {

TransitionMatrix::TransitionMatrix(std::vector<std::vector<Entry>> rows, std::vector<std::uint64_t> samples)
    : samples_(std::move(samples)) {
  if (rows.size() != samples_.size()) throw std::invalid_argument("TransitionMatrix: rows and sample counts differ");
  const std::size_t n = rows.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("TransitionMatrix: too many cells");
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  entries_.reserve(total);
  offsets_.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const Entry& e = rows[i][k];
      if (e.col >= n || !(e.prob >= 0.0) || (k > 0 && rows[i][k - 1].col >= e.col))
        throw std::invalid_argument("TransitionMatrix: malformed row " + std::to_string(i));
      sum += e.prob;
      entries_.push_back(e);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("TransitionMatrix: row " + std::to_string(i) + " is not stochastic");
    offsets_.push_back(entries_.size());
  }
}

double TransitionMatrix::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, std::size_t c) { return e.col < c; });
  return it != r.end() && it->col == j ? it->prob : 0.0;
}

double TransitionMatrix::max_row_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (const Entry& e : row(i)) s += e.prob;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

namespace {

// Latin hypercube sample of m points in [0,1)^d: every coordinate hits each
// of the m strata [j/m, (j+1)/m) exactly once.
void latin_hypercube(std::size_t m, std::size_t d, PerturbationStream& s, std::vector<double>& out,
                     std::vector<std::size_t>& perm) {
  out.assign(m * d, 0.0);
  perm.resize(m);
  const double inv = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) {
      const auto j = static_cast<std::size_t>(s.uniform() * static_cast<double>(i));
      std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    for (std::size_t i = 0; i < m; ++i) out[i * d + k] = (static_cast<double>(perm[i]) + s.uniform()) * inv;
  }
}

// Volume-preserving map from the unit cube onto the parameter ball.
Point ball_point(const PerturbationSpace& space, const double* u) {
  Point t = space.center();
  const double eps = space.radius();
  switch (space.dim()) {
    case 1:
      t[0] += eps * (2.0 * u[0] - 1.0);
      break;
    case 2: {
      const double r = eps * std::sqrt(u[0]), a = 2.0 * std::numbers::pi * u[1];
      t[0] += r * std::cos(a);
      t[1] += r * std::sin(a);
      break;
    }
    default: {
      const double r = eps * std::cbrt(u[0]), z = 2.0 * u[1] - 1.0, a = 2.0 * std::numbers::pi * u[2];
      const double q = std::sqrt(std::max(0.0, 1.0 - z * z));
      t[0] += r * q * std::cos(a);
      t[1] += r * q * std::sin(a);
      t[2] += r * z;
      break;
    }
  }
  return t;
}

}  // namespace

TransitionMatrix build_transition(const ParametricFamily& fam, const GridSpec& grid, const PerturbationSpace& space,
                                  const UlamParams& params) {
  const PhaseBox& box = fam.box();
  check_compatible(box, grid);
  if (params.points_per_cell == 0 || params.samples_per_point == 0)
    throw std::invalid_argument("build_transition: points_per_cell and samples_per_point must be >= 1");
  if (space.dim() != fam.parameter_dim()) throw std::invalid_argument("build_transition: parameter dimension mismatch");
  const std::size_t n = grid.total();
  const std::size_t d = box.dim();
  const std::size_t np = space.dim();
  const std::size_t m = params.samples_per_point;
  const std::uint64_t per_row = static_cast<std::uint64_t>(params.points_per_cell) * m;
  std::vector<std::vector<TransitionMatrix::Entry>> rows(n);

  parallel_for(n, params.threads, [&](std::size_t cell) {
    PerturbationStream stream(params.seed, cell);
    const CellBounds cb = cell_bounds(box, grid, CellIndex{cell});
    std::vector<std::uint32_t> targets;
    targets.reserve(per_row);
    std::vector<double> xs, ts;
    std::vector<std::size_t> perm;
    latin_hypercube(params.points_per_cell, d, stream, xs, perm);
    Point x(d);
    for (std::size_t p = 0; p < params.points_per_cell; ++p) {
      for (std::size_t i = 0; i < d; ++i) x[i] = cb.lower[i] + cb.width[i] * xs[p * d + i];
      latin_hypercube(m, np, stream, ts, perm);
      const bool additive = fam.is_additive();
      const Point gx = additive ? fam.base(x) : x;
      for (std::size_t s = 0; s < m; ++s) {
        const Point t = ball_point(space, ts.data() + s * np);
        const Point y = additive ? fam.apply_offset(gx, t) : fam.eval_trusted(x, t);
        targets.push_back(static_cast<std::uint32_t>(locate(box, grid, y).value));
      }
    }
    std::sort(targets.begin(), targets.end());
    auto& row = rows[cell];
    const double inv = 1.0 / static_cast<double>(per_row);
    for (std::size_t k = 0; k < targets.size();) {
      std::size_t j = k;
      while (j < targets.size() && targets[j] == targets[k]) ++j;
      row.push_back({targets[k], static_cast<double>(j - k) * inv});
      k = j;
    }
  });
  return TransitionMatrix(std::move(rows), std::vector<std::uint64_t>(n, per_row));
}

std::vector<std::vector<std::size_t>> cyclic_partition(const TransitionMatrix& p, std::span<const std::size_t> cells,
                                                       double theta) {
  if (cells.empty()) throw std::invalid_argument("cyclic_partition: empty cell set");
  std::vector<std::size_t> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end());
  const auto local = [&](std::size_t c) -> std::size_t {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
    return it != sorted.end() && *it == c ? static_cast<std::size_t>(it - sorted.begin()) : sorted.size();
  };
  const std::size_t m = sorted.size();
  constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> level(m, unseen);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  std::size_t g = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t u = queue[head];
    for (const auto& e : p.row(sorted[u])) {
      if (!(e.prob > theta)) continue;
      const std::size_t v = local(e.col);
      if (v == m) continue;
      if (level[v] == unseen) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      } else {
        const std::size_t diff = level[u] + 1 > level[v] ? level[u] + 1 - level[v] : level[v] - level[u] - 1;
        g = std::gcd(g, diff);
      }
    }
  }
  if (queue.size() != m) throw std::invalid_argument("cyclic_partition: cell set is not strongly connected");
  // Backward reachability to the base completes the strong-connectivity check.
  std::vector<std::vector<std::size_t>> reverse(m);
  for (std::size_t u = 0; u < m; ++u)
    for (const auto& e : p.row(sorted[u]))
      if (e.prob > theta) {
        const std::size_t v = local(e.col);
        if (v != m) reverse[v].push_back(u);
      }
  std::vector<char> back(m, 0);
  std::vector<std::size_t> stack{0};
  back[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t u : reverse[v])
      if (!back[u]) {
        back[u] = 1;
        ++reached;
        stack.push_back(u);
      }
  }
  if (reached != m) throw std::invalid_argument("cyclic_partition: cell set is not strongly connected");
  // A single cell without a self-loop has no cycle in the set; its period is
  // left at 1.
  const std::size_t r = g == 0 ? 1 : g;
  std::vector<std::vector<std::size_t>> classes(r);
  for (std::size_t u = 0; u < m; ++u) classes[level[u] % r].push_back(sorted[u]);
  return classes;
}

namespace {

// Class-restricted sub-chain in local indices.
struct LocalChain {
  std::vector<std::size_t> cells;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> probs;

  void step(const std::vector<double>& in, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t u = 0; u < cells.size(); ++u) {
      const double w = in[u];
      if (w == 0.0) continue;
      for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) out[cols[k]] += w * probs[k];
    }
  }
};

LocalChain restrict_chain(const TransitionMatrix& p, std::vector<std::size_t> cells, double closure_tol) {
  LocalChain ch;
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  ch.cells = std::move(cells);
  for (std::size_t c : ch.cells) {
    if (c >= p.size()) throw std::invalid_argument("stationary_vector: cell index out of range");
    double leak = 0.0;
    for (const auto& e : p.row(c)) {
      const auto it = std::lower_bound(ch.cells.begin(), ch.cells.end(), static_cast<std::size_t>(e.col));
      if (it == ch.cells.end() || *it != e.col) {
        leak += e.prob;
        continue;
      }
      ch.cols.push_back(static_cast<std::uint32_t>(it - ch.cells.begin()));
      ch.probs.push_back(e.prob);
    }
    if (leak > closure_tol)
      throw std::invalid_argument("stationary_vector: class is not closed (cell " + std::to_string(c) +
                                  " leaks " + format_real(leak) + ")");
    ch.offsets.push_back(ch.cols.size());
  }
  return ch;
}

}  // namespace

StationaryVector stationary_vector(const TransitionMatrix& p, std::span<const std::size_t> cells,
                                   const PowerIteration& opts) {
  return stationary_vector(p, cyclic_partition(p, cells, 0.0), opts);
}

StationaryVector stationary_vector(const TransitionMatrix& p, const std::vector<std::vector<std::size_t>>& classes,
                                   const PowerIteration& opts) {
  if (classes.empty() || classes.front().empty()) throw std::invalid_argument("stationary_vector: empty class");
  std::vector<std::size_t> all;
  for (const auto& c : classes) all.insert(all.end(), c.begin(), c.end());
  const LocalChain ch = restrict_chain(p, all, opts.closure_tolerance);
  const std::size_t m = ch.cells.size();
  const std::size_t r = classes.size();
  const auto local = [&](std::size_t c) {
    return static_cast<std::size_t>(std::lower_bound(ch.cells.begin(), ch.cells.end(), c) - ch.cells.begin());
  };

  std::vector<double> v(m, 0.0), next(m, 0.0), tmp(m, 0.0);
  const double start = 1.0 / static_cast<double>(classes.front().size());
  for (std::size_t c : classes.front()) v[local(c)] = start;

  StationaryVector out;
  out.period = r;
  bool converged = false;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    tmp = v;
    for (std::size_t s = 0; s < r; ++s) {
      ch.step(tmp, next);
      tmp.swap(next);
    }
    double change = 0.0, mass = 0.0;
    for (std::size_t u = 0; u < m; ++u) {
      change += std::abs(tmp[u] - v[u]);
      mass += tmp[u];
    }
    // Renormalize against round-off drift; the chain itself conserves mass.
    for (double& w : tmp) w /= mass;
    v.swap(tmp);
    out.iterations = it;
    if (change <= opts.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("stationary_vector: power iteration did not converge in " +
                         std::to_string(opts.max_iterations) + " iterations");

  // Average the laws on U_0, U_1, ..., U_{r-1}.
  std::vector<double> avg(v);
  std::vector<double> cur(v);
  for (std::size_t s = 1; s < r; ++s) {
    ch.step(cur, next);
    cur.swap(next);
    for (std::size_t u = 0; u < m; ++u) avg[u] += cur[u];
  }
  double mass = 0.0;
  for (double w : avg) mass += w;
  for (double& w : avg) w /= mass;

  ch.step(avg, next);
  double residual = 0.0;
  for (std::size_t u = 0; u < m; ++u) residual += std::abs(next[u] - avg[u]);
  out.residual = residual;
  if (!(residual <= 1e-8))
    throw NumericalError("stationary_vector: residual " + format_real(residual) + " exceeds 1e-8");

  out.weights.assign(p.size(), 0.0);
  for (std::size_t u = 0; u < m; ++u) out.weights[ch.cells[u]] = avg[u];
  return out;
}

std::vector<double> push_forward(const TransitionMatrix& p, std::span<const double> density) {
  if (density.size() != p.size()) throw std::invalid_argument("push_forward: density length mismatch");
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = density[i];
    if (w == 0.0) continue;
    for (const auto& e : p.row(i)) out[e.col] += w * e.prob;
  }
  return out;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

std::string matrix_coo_text(const TransitionMatrix& p, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "# cells=" << p.size() << " nonzeros=" << p.nonzeros() << '\n';
  for (std::size_t i = 0; i < p.size(); ++i)
    for (const auto& e : p.row(i)) os << i << ' ' << e.col << ' ' << format_real(e.prob) << '\n';
  return os.str();
}

std::string stationary_csv(const StationaryVector& v, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "cell,weight\n";
  for (std::size_t i = 0; i < v.weights.size(); ++i)
    if (v.weights[i] != 0.0) os << i << ',' << format_real(v.weights[i]) << '\n';
  return os.str();
}

}  // namespace rdlab
