#pragma once

#include <cstddef>
#include <vector>

#include "rdlab/point.hpp"

namespace rdlab {

enum class Boundary { periodic, clamp };

struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  Boundary mode = Boundary::periodic;

  [[nodiscard]] double length() const noexcept { return upper - lower; }
};

/// Axis-aligned phase space.  Periodic axes are circles of the given
/// length; clamp axes are closed intervals.  Volumes reported by this module
/// are normalized so the whole box has volume 1.
class PhaseBox {
 public:
  PhaseBox() = default;
  explicit PhaseBox(std::vector<Axis> axes);

  static PhaseBox unit_torus(std::size_t dim);
  static PhaseBox cube(std::size_t dim, double lower, double upper, Boundary mode);

  [[nodiscard]] std::size_t dim() const noexcept { return axes_.size(); }
  [[nodiscard]] const Axis& axis(std::size_t i) const { return axes_.at(i); }
  [[nodiscard]] const std::vector<Axis>& axes() const noexcept { return axes_; }
  /// Unnormalized Lebesgue volume (product of axis lengths).
  [[nodiscard]] double raw_volume() const noexcept;

  /// Wraps periodic coordinates and projects clamp coordinates into the box.
  [[nodiscard]] Point canonicalize(const Point& p) const;
  [[nodiscard]] bool contains(const Point& p) const noexcept;

  /// Shortest displacement from `a` to `b` (minimum image on periodic axes).
  [[nodiscard]] Point displacement(const Point& a, const Point& b) const noexcept;
  [[nodiscard]] double distance(const Point& a, const Point& b) const noexcept;

 private:
  std::vector<Axis> axes_;
};

/// Uniform grid: per-axis cell counts.
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<std::size_t> counts);

  [[nodiscard]] std::size_t dim() const noexcept { return counts_.size(); }
  [[nodiscard]] std::size_t count(std::size_t axis) const { return counts_.at(axis); }
  [[nodiscard]] const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  [[nodiscard]] std::size_t total() const noexcept { return total_; }

  /// Row-major flattening, last axis fastest.
  [[nodiscard]] std::size_t flatten(const std::vector<std::size_t>& multi) const;
  [[nodiscard]] std::vector<std::size_t> unflatten(std::size_t flat) const;

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct CellIndex {
  std::size_t value = 0;
  friend bool operator==(CellIndex, CellIndex) = default;
  friend auto operator<=>(CellIndex, CellIndex) = default;
};

struct CellGeometry {
  Point center;
  double volume = 0.0;  ///< normalized: volumes of all cells sum to 1
};

/// Throws std::invalid_argument when grid and box dimensions differ.
void check_compatible(const PhaseBox& box, const GridSpec& grid);

[[nodiscard]] Point canonicalize(const PhaseBox& box, const Point& p);

/// Cell containing `p`.  Points on an interior cell face belong to the cell
/// with the larger index along that axis; the upper bound of a clamp axis
/// belongs to the last cell.  `p` is canonicalized first, so every real
/// input maps to exactly one cell.
[[nodiscard]] CellIndex locate(const PhaseBox& box, const GridSpec& grid, const Point& p);

[[nodiscard]] CellGeometry cell_geometry(const PhaseBox& box, const GridSpec& grid, CellIndex c);

/// Lower corner and per-axis widths of a cell, for uniform sampling inside it.
struct CellBounds {
  Point lower;
  Point width;
};
[[nodiscard]] CellBounds cell_bounds(const PhaseBox& box, const GridSpec& grid, CellIndex c);

/// Axis-aligned subregion of a phase box (observables, return regions,
/// sink neighborhoods).  Bounds are taken literally, without wrapping.
struct Region {
  Point lower;
  Point upper;

  [[nodiscard]] bool contains(const Point& p) const noexcept {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < lower[i] || p[i] > upper[i]) return false;
    return true;
  }
  [[nodiscard]] bool overlaps(const Region& o) const noexcept {
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (upper[i] < o.lower[i] || o.upper[i] < lower[i]) return false;
    return true;
  }
};

}  // namespace rdlab
