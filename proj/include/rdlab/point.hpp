#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace rdlab {

/// Largest state or parameter dimension supported by the built-in families.
inline constexpr std::size_t kMaxDim = 3;

/// Fixed-capacity real vector used for phase points and parameters.
/// Stored inline so orbit loops never allocate.
class Point {
 public:
  Point() = default;
  explicit Point(std::size_t n, double fill = 0.0) : size_(check(n)) {
    std::fill_n(data_.begin(), size_, fill);
  }
  Point(std::initializer_list<double> values) : size_(check(values.size())) {
    std::copy(values.begin(), values.end(), data_.begin());
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double* begin() noexcept { return data_.data(); }
  double* end() noexcept { return data_.data() + size_; }
  [[nodiscard]] const double* begin() const noexcept { return data_.data(); }
  [[nodiscard]] const double* end() const noexcept { return data_.data() + size_; }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }

  Point& operator+=(const Point& o) noexcept {
    for (std::size_t i = 0; i < size_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Point& operator-=(const Point& o) noexcept {
    for (std::size_t i = 0; i < size_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Point& operator*=(double s) noexcept {
    for (std::size_t i = 0; i < size_; ++i) data_[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(double s, Point a) noexcept { return a *= s; }

 private:
  static std::uint8_t check(std::size_t n) {
    if (n > kMaxDim) throw std::invalid_argument("point dimension exceeds kMaxDim");
    return static_cast<std::uint8_t>(n);
  }

  std::array<double, kMaxDim> data_{};
  std::uint8_t size_ = 0;
};

inline double dot(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Point& a) noexcept { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Point& a) noexcept {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// Small dense row-major square matrix (state Jacobians).
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(static_cast<std::uint8_t>(n)) {
    if (n > kMaxDim) throw std::invalid_argument("matrix dimension exceeds kMaxDim");
  }
  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * kMaxDim + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * kMaxDim + c]; }

  friend Point operator*(const Matrix& m, const Point& v) noexcept {
    Point out(m.n_);
    for (std::size_t r = 0; r < m.n_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < m.n_; ++c) s += m(r, c) * v[c];
      out[r] = s;
    }
    return out;
  }

 private:
  std::array<double, kMaxDim * kMaxDim> a_{};
  std::uint8_t n_ = 0;
};

}  // namespace rdlab
