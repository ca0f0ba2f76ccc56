#include "rdlab/phase_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdlab {

PhaseBox::PhaseBox(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > kMaxDim)
    throw std::invalid_argument("phase box dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  for (const Axis& a : axes_) {
    if (!(std::isfinite(a.lower) && std::isfinite(a.upper) && a.lower < a.upper))
      throw std::invalid_argument("phase box axis requires finite lower < upper");
  }
}

PhaseBox PhaseBox::unit_torus(std::size_t dim) { return cube(dim, 0.0, 1.0, Boundary::periodic); }

PhaseBox PhaseBox::cube(std::size_t dim, double lower, double upper, Boundary mode) {
  return PhaseBox(std::vector<Axis>(dim, Axis{lower, upper, mode}));
}

double PhaseBox::raw_volume() const noexcept {
  double v = 1.0;
  for (const Axis& a : axes_) v *= a.length();
  return v;
}

Point PhaseBox::canonicalize(const Point& p) const {
  if (p.size() != dim()) throw std::invalid_argument("canonicalize: dimension mismatch");
  Point out = p;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    double v = out[i];
    if (a.mode == Boundary::periodic) {
      if (v < a.lower || v >= a.upper) {
        double r = std::fmod(v - a.lower, a.length());
        if (r < 0.0) r += a.length();
        v = a.lower + r;
        if (v >= a.upper) v = a.lower;  // r rounded up to the full length
      }
    } else {
      v = std::clamp(v, a.lower, a.upper);
    }
    out[i] = v;
  }
  return out;
}

bool PhaseBox::contains(const Point& p) const noexcept {
  if (p.size() != dim()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    if (p[i] < a.lower) return false;
    if (a.mode == Boundary::periodic ? p[i] >= a.upper : p[i] > a.upper) return false;
  }
  return true;
}

Point PhaseBox::displacement(const Point& a, const Point& b) const noexcept {
  Point d = b - a;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].mode != Boundary::periodic) continue;
    const double len = axes_[i].length();
    d[i] -= len * std::round(d[i] / len);
  }
  return d;
}

double PhaseBox::distance(const Point& a, const Point& b) const noexcept { return norm(displacement(a, b)); }

GridSpec::GridSpec(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty() || counts_.size() > kMaxDim) throw std::invalid_argument("grid dimension out of range");
  total_ = 1;
  for (std::size_t c : counts_) {
    if (c == 0) throw std::invalid_argument("grid cell counts must be positive");
    total_ *= c;
  }
}

std::size_t GridSpec::flatten(const std::vector<std::size_t>& multi) const {
  if (multi.size() != counts_.size()) throw std::invalid_argument("flatten: dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (multi[i] >= counts_[i]) throw std::out_of_range("flatten: multi-index out of range");
    flat = flat * counts_[i] + multi[i];
  }
  return flat;
}

std::vector<std::size_t> GridSpec::unflatten(std::size_t flat) const {
  if (flat >= total_) throw std::out_of_range("unflatten: cell index out of range");
  std::vector<std::size_t> multi(counts_.size());
  for (std::size_t i = counts_.size(); i-- > 0;) {
    multi[i] = flat % counts_[i];
    flat /= counts_[i];
  }
  return multi;
}

void check_compatible(const PhaseBox& box, const GridSpec& grid) {
  if (box.dim() != grid.dim()) throw std::invalid_argument("grid and phase box dimensions differ");
}

Point canonicalize(const PhaseBox& box, const Point& p) { return box.canonicalize(p); }

CellIndex locate(const PhaseBox& box, const GridSpec& grid, const Point& p) {
  check_compatible(box, grid);
  const Point q = box.canonicalize(p);
  std::size_t flat = 0;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const Axis& a = box.axis(i);
    const std::size_t n = grid.count(i);
    const double s = (q[i] - a.lower) / a.length() * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::floor(s));
    if (k >= n) k = n - 1;
    flat = flat * n + k;
  }
  return CellIndex{flat};
}

CellBounds cell_bounds(const PhaseBox& box, const GridSpec& grid, CellIndex c) {
  check_compatible(box, grid);
  const auto multi = grid.unflatten(c.value);
  CellBounds b{Point(box.dim()), Point(box.dim())};
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const Axis& a = box.axis(i);
    const double w = a.length() / static_cast<double>(grid.count(i));
    b.lower[i] = a.lower + w * static_cast<double>(multi[i]);
    b.width[i] = w;
  }
  return b;
}

CellGeometry cell_geometry(const PhaseBox& box, const GridSpec& grid, CellIndex c) {
  const CellBounds b = cell_bounds(box, grid, c);
  CellGeometry g{b.lower, 1.0};
  for (std::size_t i = 0; i < box.dim(); ++i) {
    g.center[i] += 0.5 * b.width[i];
    g.volume *= b.width[i] / box.axis(i).length();
  }
  return g;
}

}  // namespace rdlab
