#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rdlab/phase_space.hpp"
#include "rdlab/point.hpp"

namespace rdlab {

using MapFn = std::function<Point(const Point& x, const Point& t)>;
using JacobianFn = std::function<Matrix(const Point& x, const Point& t)>;
using BaseMapFn = std::function<Point(const Point& x)>;
using BaseJacobianFn = std::function<Matrix(const Point& x)>;

/// A map f(x, t) on a phase box, parametrized by t near a nominal value.
///
/// Families come in two shapes.  A general family wraps an arbitrary
/// evaluator.  An additive family has the form f(x, t) = g(x) + embed(t),
/// where the n parameter coordinates are added to the first n state
/// coordinates; the Ulam builder exploits this to evaluate g once per
/// sample point.  Every image is canonicalized into the phase box.
class ParametricFamily {
 public:
  ParametricFamily(std::string name, PhaseBox box, Point nominal, double max_offset, MapFn map,
                   JacobianFn jacobian = {});

  static ParametricFamily additive(std::string name, PhaseBox box, std::size_t parameter_dim,
                                   double max_offset, BaseMapFn base, BaseJacobianFn base_jacobian = {});

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const PhaseBox& box() const noexcept { return box_; }
  [[nodiscard]] std::size_t state_dim() const noexcept { return box_.dim(); }
  [[nodiscard]] std::size_t parameter_dim() const noexcept { return nominal_.size(); }
  [[nodiscard]] const Point& nominal() const noexcept { return nominal_; }
  /// Largest admissible Euclidean distance |t - a|.
  [[nodiscard]] double max_offset() const noexcept { return max_offset_; }

  /// Throws std::out_of_range when |t - a| exceeds max_offset().
  void check_parameter(const Point& t) const;

  [[nodiscard]] Point eval(const Point& x, const Point& t) const;
  /// Same as eval() without the parameter range check (hot loops whose
  /// parameters come from a validated PerturbationSpace).
  [[nodiscard]] Point eval_trusted(const Point& x, const Point& t) const;

  [[nodiscard]] bool has_jacobian() const noexcept { return static_cast<bool>(jacobian_); }
  [[nodiscard]] Matrix jacobian(const Point& x, const Point& t) const;

  [[nodiscard]] bool is_additive() const noexcept { return static_cast<bool>(base_); }
  /// The unperturbed part g(x) of an additive family (not canonicalized).
  [[nodiscard]] Point base(const Point& x) const;
  /// g(x) + embed(t), canonicalized.
  [[nodiscard]] Point apply_offset(const Point& gx, const Point& t) const;

 private:
  std::string name_;
  PhaseBox box_;
  Point nominal_;
  double max_offset_;
  MapFn map_;
  JacobianFn jacobian_;
  BaseMapFn base_;
};

[[nodiscard]] inline Point eval_map(const ParametricFamily& fam, const Point& x, const Point& t) {
  return fam.eval(x, t);
}

/// Throws std::logic_error for families without a Jacobian.
[[nodiscard]] Matrix jacobian_state(const ParametricFamily& fam, const Point& x, const Point& t);

/// Planar vector field integrated by fixed-step RK4.
struct VectorField2D {
  std::function<Point(const Point&)> field;
  double step = 1e-2;
};

/// Time-one map of `vf`.  The step is shrunk so that an integer number of
/// steps spans exactly time 1.  Throws NumericalError on a non-finite state.
[[nodiscard]] Point flow_time_one(const VectorField2D& vf, const PhaseBox& box, const Point& p);

/// Same integration returning the Jacobian of the time-one map, obtained from
/// the variational equation with the field Jacobian `dfield`.
[[nodiscard]] Matrix flow_time_one_jacobian(const VectorField2D& vf,
                                            const std::function<Matrix(const Point&)>& dfield,
                                            const Point& p);

/// Key/value parameters for the built-in families.
class FamilyParams {
 public:
  FamilyParams() = default;
  FamilyParams(std::initializer_list<std::pair<const std::string, std::string>> init) : values_(init) {}

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] double number(const std::string& key, double fallback) const;
  [[nodiscard]] std::size_t integer(const std::string& key, std::size_t fallback) const;
  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

[[nodiscard]] const std::vector<std::string>& builtin_family_names();

/// Builds one of: torus-additive, logistic-noise, double-sink, triple-sink,
/// bowen-eye, henon-arc, linear-sink.  Throws ConfigError for unknown names
/// or invalid parameters.
[[nodiscard]] ParametricFamily make_builtin(const std::string& name, const FamilyParams& params = {});

/// Geometry of the bowen-eye field, exposed for diagnostics and tests.
struct BowenEye {
  double kappa = 0.4;        ///< separatrix-attracting dissipation
  double sigma = 0.6;        ///< time-reparametrization asymmetry 1 + sigma sin(2 pi x)
  double saddle_bias = 0.2;  ///< splits |stable| and unstable saddle eigenvalues
  double shear = 0.25;       ///< saddles sit at y = +shear and y = -shear
  double confine = 10.0;     ///< outer damping that keeps |y| < 1
  double step = 1e-2;

  /// Energy whose level `separatrix_level()` is the separatrix network.
  [[nodiscard]] double energy(const Point& p) const;
  [[nodiscard]] static double separatrix_level();
  [[nodiscard]] Point field(const Point& p) const;
  [[nodiscard]] Matrix field_jacobian(const Point& p) const;
  /// Saddle equilibria (x, y) = (1/4, shear) and (3/4, -shear).
  [[nodiscard]] std::vector<Point> saddles() const;
  /// Equilibria inside the eyes: (0, 0) and (1/2, 0).
  [[nodiscard]] std::vector<Point> centers() const;
  /// Points on the two separatrix curves y = shear sin(2 pi x) +/- cos(2 pi x) / (2 pi).
  [[nodiscard]] std::vector<Point> separatrix_samples(std::size_t per_curve) const;
  [[nodiscard]] VectorField2D vector_field() const;
};

[[nodiscard]] BowenEye bowen_eye_from(const FamilyParams& params);

}  // namespace rdlab
