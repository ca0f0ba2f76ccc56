#include "rdlab/families.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.hpp"

namespace rdlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

ParametricFamily::ParametricFamily(std::string name, PhaseBox box, Point nominal, double max_offset, MapFn map,
                                   JacobianFn jacobian)
    : name_(std::move(name)),
      box_(std::move(box)),
      nominal_(nominal),
      max_offset_(max_offset),
      map_(std::move(map)),
      jacobian_(std::move(jacobian)) {
  if (!map_) throw std::invalid_argument("parametric family requires a map evaluator");
  if (nominal_.empty()) throw std::invalid_argument("parametric family requires a parameter dimension >= 1");
  if (!(max_offset_ >= 0.0)) throw std::invalid_argument("max_offset must be non-negative");
}

ParametricFamily ParametricFamily::additive(std::string name, PhaseBox box, std::size_t parameter_dim,
                                            double max_offset, BaseMapFn base, BaseJacobianFn base_jacobian) {
  if (parameter_dim == 0 || parameter_dim > box.dim())
    throw std::invalid_argument("additive family: parameter dimension must be in [1, state dim]");
  const PhaseBox box_copy = box;
  MapFn map = [base, box_copy](const Point& x, const Point& t) {
    Point y = base(x);
    for (std::size_t i = 0; i < t.size(); ++i) y[i] += t[i];
    return box_copy.canonicalize(y);
  };
  JacobianFn jac;
  if (base_jacobian) jac = [base_jacobian](const Point& x, const Point&) { return base_jacobian(x); };
  ParametricFamily fam(std::move(name), std::move(box), Point(parameter_dim), max_offset, std::move(map),
                       std::move(jac));
  fam.base_ = std::move(base);
  return fam;
}

void ParametricFamily::check_parameter(const Point& t) const {
  if (t.size() != nominal_.size()) throw std::invalid_argument(name_ + ": parameter dimension mismatch");
  const double off = norm(t - nominal_);
  // Relative slack so that points sampled on the boundary of the ball pass.
  if (!(off <= max_offset_ * (1.0 + 1e-12) + 1e-300)) {
    std::ostringstream msg;
    msg << name_ << ": parameter offset " << off << " exceeds declared range " << max_offset_;
    throw std::out_of_range(msg.str());
  }
}

Point ParametricFamily::eval(const Point& x, const Point& t) const {
  check_parameter(t);
  return eval_trusted(x, t);
}

Point ParametricFamily::eval_trusted(const Point& x, const Point& t) const {
  if (x.size() != box_.dim()) throw std::invalid_argument(name_ + ": state dimension mismatch");
  return map_(x, t);
}

Matrix ParametricFamily::jacobian(const Point& x, const Point& t) const {
  if (!jacobian_) throw std::logic_error(name_ + ": family does not provide a state Jacobian");
  return jacobian_(x, t);
}

Point ParametricFamily::base(const Point& x) const {
  if (!base_) throw std::logic_error(name_ + ": family is not additive");
  return base_(x);
}

Point ParametricFamily::apply_offset(const Point& gx, const Point& t) const {
  Point y = gx;
  for (std::size_t i = 0; i < t.size(); ++i) y[i] += t[i];
  return box_.canonicalize(y);
}

Matrix jacobian_state(const ParametricFamily& fam, const Point& x, const Point& t) { return fam.jacobian(x, t); }

// ---------------------------------------------------------------------------
// RK4 time-one maps

namespace {

std::size_t steps_per_unit(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("RK4 step must be positive");
  return static_cast<std::size_t>(std::ceil(1.0 / step - 1e-9));
}

}  // namespace

Point flow_time_one(const VectorField2D& vf, const PhaseBox& box, const Point& p) {
  const std::size_t n = steps_per_unit(vf.step);
  const double h = 1.0 / static_cast<double>(n);
  Point z = p;
  for (std::size_t i = 0; i < n; ++i) {
    const Point k1 = vf.field(z);
    const Point k2 = vf.field(z + (0.5 * h) * k1);
    const Point k3 = vf.field(z + (0.5 * h) * k2);
    const Point k4 = vf.field(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(z)) throw NumericalError("flow_time_one: non-finite state during integration");
  }
  return box.canonicalize(z);
}

Matrix flow_time_one_jacobian(const VectorField2D& vf, const std::function<Matrix(const Point&)>& dfield,
                              const Point& p) {
  const std::size_t n = steps_per_unit(vf.step);
  const double h = 1.0 / static_cast<double>(n);
  const std::size_t d = p.size();
  auto mul = [d](const Matrix& a, const Matrix& b) {
    Matrix c(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += a(i, k) * b(k, j);
        c(i, j) = s;
      }
    return c;
  };
  auto axpy = [d](const Matrix& a, double s, const Matrix& b) {
    Matrix c(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c(i, j) = a(i, j) + s * b(i, j);
    return c;
  };
  Point z = p;
  Matrix m = Matrix::identity(d);
  for (std::size_t i = 0; i < n; ++i) {
    const Point k1 = vf.field(z);
    const Matrix j1 = mul(dfield(z), m);
    const Point z2 = z + (0.5 * h) * k1;
    const Point k2 = vf.field(z2);
    const Matrix j2 = mul(dfield(z2), axpy(m, 0.5 * h, j1));
    const Point z3 = z + (0.5 * h) * k2;
    const Point k3 = vf.field(z3);
    const Matrix j3 = mul(dfield(z3), axpy(m, 0.5 * h, j2));
    const Point z4 = z + h * k3;
    const Point k4 = vf.field(z4);
    const Matrix j4 = mul(dfield(z4), axpy(m, h, j3));
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c)
        m(r, c) += h / 6.0 * (j1(r, c) + 2.0 * j2(r, c) + 2.0 * j3(r, c) + j4(r, c));
    if (!all_finite(z)) throw NumericalError("flow_time_one_jacobian: non-finite state during integration");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Parameters

void FamilyParams::set(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  values_[key] = os.str();
}

double FamilyParams::number(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("family parameter '" + key + "' is not a finite number: '" + s + "'");
  return v;
}

std::size_t FamilyParams::integer(const std::string& key, std::size_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("family parameter '" + key + "' is not a non-negative integer: '" + s + "'");
  return v;
}

std::string FamilyParams::text(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

// ---------------------------------------------------------------------------
// Bowen eye
//
// In sheared coordinates w = y - A sin(2 pi x) the field is built around the
// two-saddle pendulum energy H = w^2/2 - cos(4 pi x)/(4 pi)^2, whose level
// h_s = 1/(4 pi)^2 is the union of the curves P = w - c cos(2 pi x) = 0 and
// Q = w + c cos(2 pi x) = 0 (c = 1/(2 pi)), crossing at the saddles.  With
// s = sin(2 pi x), k = cos(2 pi x) and D = (kappa/2 + confine y^10) P Q:
//
//   x' = w + bias c s^3 k
//   w' = -c s k - bias s^4 w - D w
//
// gives dP/dt = P (s - bias s^4 - e Q w) and dQ/dt = -Q (s + bias s^4 + e P w)
// with e = kappa/2 + confine y^10, so both curves stay invariant.  At each saddle the expanding rate is 1 - bias and
// the contracting rate 1 + bias; D pushes orbits from both sides onto the
// separatrix network, which turns the eye centers into sources.  The whole
// field is then multiplied by 1 + sigma sin(2 pi x).

double BowenEye::separatrix_level() { return 1.0 / (16.0 * std::numbers::pi * std::numbers::pi); }

double BowenEye::energy(const Point& p) const {
  const double w = p[1] - shear * std::sin(kTwoPi * p[0]);
  return 0.5 * w * w - std::cos(2.0 * kTwoPi * p[0]) * separatrix_level();
}

Point BowenEye::field(const Point& p) const {
  constexpr double c = 1.0 / kTwoPi;
  const double s = std::sin(kTwoPi * p[0]);
  const double k = std::cos(kTwoPi * p[0]);
  const double y = p[1];
  const double w = y - shear * s;
  const double pq = w * w - c * c * k * k;
  const double y2 = y * y;
  const double y10 = y2 * y2 * y2 * y2 * y2;
  const double damp = (0.5 * kappa + confine * y10) * pq;
  const double s3 = s * s * s;
  const double xd = w + saddle_bias * c * s3 * k;
  const double wd = -c * s * k - saddle_bias * s3 * s * w - damp * w;
  const double yd = wd + kTwoPi * shear * k * xd;
  const double g = 1.0 + sigma * s;
  return Point{g * xd, g * yd};
}

Matrix BowenEye::field_jacobian(const Point& p) const {
  constexpr double c = 1.0 / kTwoPi;
  const double s = std::sin(kTwoPi * p[0]);
  const double k = std::cos(kTwoPi * p[0]);
  const double y = p[1];
  const double w = y - shear * s;
  const double w_x = -shear * kTwoPi * k;
  const double pq = w * w - c * c * k * k;
  const double pq_x = 2.0 * w * w_x + 2.0 * kTwoPi * c * c * k * s;
  const double pq_y = 2.0 * w;
  const double y2 = y * y;
  const double y9 = y2 * y2 * y2 * y2 * y;
  const double coef = 0.5 * kappa + confine * y9 * y;
  const double damp = coef * pq;
  const double damp_x = coef * pq_x;
  const double damp_y = 10.0 * confine * y9 * pq + coef * pq_y;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s2 * s2;

  const double xd = w + saddle_bias * c * s3 * k;
  const double xd_x = w_x + saddle_bias * c * kTwoPi * (3.0 * s2 * k * k - s4);
  const double xd_y = 1.0;
  const double wd = -c * s * k - saddle_bias * s4 * w - damp * w;
  const double wd_x = -kTwoPi * c * (k * k - s2) -
                      saddle_bias * (4.0 * kTwoPi * s3 * k * w + s4 * w_x) - damp_x * w - damp * w_x;
  const double wd_y = -saddle_bias * s4 - damp_y * w - damp;
  const double yd = wd + kTwoPi * shear * k * xd;
  const double yd_x = wd_x + kTwoPi * shear * (-kTwoPi * s * xd + k * xd_x);
  const double yd_y = wd_y + kTwoPi * shear * k * xd_y;
  const double g = 1.0 + sigma * s;
  const double g_x = kTwoPi * sigma * k;

  Matrix j(2);
  j(0, 0) = g_x * xd + g * xd_x;
  j(0, 1) = g * xd_y;
  j(1, 0) = g_x * yd + g * yd_x;
  j(1, 1) = g * yd_y;
  return j;
}

std::vector<Point> BowenEye::saddles() const { return {Point{0.25, shear}, Point{0.75, -shear}}; }

std::vector<Point> BowenEye::centers() const { return {Point{0.0, 0.0}, Point{0.5, 0.0}}; }

std::vector<Point> BowenEye::separatrix_samples(std::size_t per_curve) const {
  std::vector<Point> out;
  out.reserve(2 * per_curve);
  for (int sign : {1, -1}) {
    for (std::size_t i = 0; i < per_curve; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(per_curve);
      out.push_back(Point{x, shear * std::sin(kTwoPi * x) + sign * std::cos(kTwoPi * x) / kTwoPi});
    }
  }
  return out;
}

VectorField2D BowenEye::vector_field() const {
  const BowenEye self = *this;
  return VectorField2D{[self](const Point& p) { return self.field(p); }, step};
}

BowenEye bowen_eye_from(const FamilyParams& params) {
  BowenEye eye;
  eye.kappa = params.number("kappa", eye.kappa);
  eye.sigma = params.number("sigma", eye.sigma);
  eye.saddle_bias = params.number("saddle_bias", eye.saddle_bias);
  eye.shear = params.number("shear", eye.shear);
  eye.confine = params.number("confine", eye.confine);
  eye.step = params.number("step", eye.step);
  if (!(eye.kappa > 0.0)) throw ConfigError("bowen-eye: kappa must be positive");
  if (!(std::abs(eye.sigma) < 1.0)) throw ConfigError("bowen-eye: |sigma| must be < 1");
  if (!(eye.saddle_bias > 0.0 && eye.saddle_bias < 1.0)) throw ConfigError("bowen-eye: saddle_bias must be in (0, 1)");
  if (!(eye.shear >= 0.0 && eye.shear < 0.75)) throw ConfigError("bowen-eye: shear must be in [0, 0.75)");
  if (!(eye.confine >= 0.0)) throw ConfigError("bowen-eye: confine must be non-negative");
  if (!(eye.step > 0.0 && eye.step <= 0.1)) throw ConfigError("bowen-eye: step must be in (0, 0.1]");
  return eye;
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

ParametricFamily make_torus(const FamilyParams& params) {
  const std::size_t dim = params.integer("dim", 1);
  const std::string base = params.text("base", "identity");
  if (dim < 1 || dim > 2) throw ConfigError("torus-additive: dim must be 1 or 2");
  const PhaseBox box = PhaseBox::unit_torus(dim);
  const double max_offset = 1.0;
  if (base == "identity") {
    return ParametricFamily::additive(
        "torus-additive", box, dim, max_offset, [](const Point& x) { return x; },
        [dim](const Point&) { return Matrix::identity(dim); });
  }
  if (base == "rotation") {
    Point alpha(dim);
    alpha[0] = params.number("alpha", std::numbers::sqrt2 - 1.0);
    if (dim == 2) alpha[1] = params.number("alpha2", std::numbers::sqrt3 - 1.0);
    return ParametricFamily::additive(
        "torus-additive", box, dim, max_offset, [alpha](const Point& x) { return x + alpha; },
        [dim](const Point&) { return Matrix::identity(dim); });
  }
  if (base == "cat") {
    if (dim != 2) throw ConfigError("torus-additive: the cat-map base requires dim = 2");
    Matrix cat(2);
    cat(0, 0) = 2.0;
    cat(0, 1) = 1.0;
    cat(1, 0) = 1.0;
    cat(1, 1) = 1.0;
    return ParametricFamily::additive(
        "torus-additive", box, 2, max_offset, [](const Point& x) { return Point{2.0 * x[0] + x[1], x[0] + x[1]}; },
        [cat](const Point&) { return cat; });
  }
  throw ConfigError("torus-additive: unknown base '" + base + "' (identity, rotation, cat)");
}

ParametricFamily make_logistic(const FamilyParams& params) {
  const double lambda = params.number("lambda", 3.2);
  if (!(lambda > 0.0 && lambda <= 4.0)) throw ConfigError("logistic-noise: lambda must be in (0, 4]");
  return ParametricFamily::additive(
      "logistic-noise", PhaseBox::cube(1, 0.0, 1.0, Boundary::clamp), 1, 0.25,
      [lambda](const Point& x) { return Point{lambda * x[0] * (1.0 - x[0])}; },
      [lambda](const Point& x) {
        Matrix j(1);
        j(0, 0) = lambda * (1.0 - 2.0 * x[0]);
        return j;
      });
}

ParametricFamily make_double_sink(const FamilyParams& params) {
  const double c = params.number("c", 0.5);
  // f(+-2) = +-(2 - 3c) must stay inside [-2, 2].
  if (!(c > 0.0 && c <= 4.0 / 3.0)) throw ConfigError("double-sink: c must be in (0, 4/3]");
  return ParametricFamily::additive(
      "double-sink", PhaseBox::cube(1, -2.0, 2.0, Boundary::clamp), 1, 0.5,
      [c](const Point& x) {
        const double v = x[0];
        return Point{v - c * v * (v * v - 1.0)};
      },
      [c](const Point& x) {
        Matrix j(1);
        j(0, 0) = 1.0 - c * (3.0 * x[0] * x[0] - 1.0);
        return j;
      });
}

ParametricFamily make_triple_sink(const FamilyParams& params) {
  const double c = params.number("c", 1.0);
  const double tau = params.number("tau", 0.6);
  const double bound = params.number("bound", 1.4);
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("triple-sink: tau must be in (0, 1)");
  if (!(c > 0.0)) throw ConfigError("triple-sink: c must be positive");
  if (!(bound > 1.0 && bound <= 3.0)) throw ConfigError("triple-sink: bound must be in (1, 3]");
  const double tau2 = tau * tau;
  return ParametricFamily::additive(
      "triple-sink", PhaseBox::cube(1, -bound, bound, Boundary::clamp), 1, 0.5,
      [c, tau2](const Point& x) {
        const double v = x[0];
        const double v2 = v * v;
        return Point{v - c * v * (v2 - 1.0) * (v2 - tau2)};
      },
      [c, tau2](const Point& x) {
        const double v2 = x[0] * x[0];
        Matrix j(1);
        j(0, 0) = 1.0 - c * (5.0 * v2 * v2 - 3.0 * (1.0 + tau2) * v2 + tau2);
        return j;
      });
}

ParametricFamily make_linear_sink(const FamilyParams& params) {
  const double rho = params.number("rho", 0.5);
  const std::size_t dim = params.integer("dim", 1);
  if (dim < 1 || dim > kMaxDim) throw ConfigError("linear-sink: dim must be in [1, 3]");
  if (!(rho > 0.0 && rho < 2.0)) throw ConfigError("linear-sink: rho must be in (0, 2)");
  return ParametricFamily::additive(
      "linear-sink", PhaseBox::cube(dim, -1.0, 1.0, Boundary::clamp), dim, 0.5,
      [rho](const Point& x) { return rho * x; },
      [rho, dim](const Point&) {
        Matrix j = Matrix::identity(dim);
        for (std::size_t i = 0; i < dim; ++i) j(i, i) = rho;
        return j;
      });
}

ParametricFamily make_henon(const FamilyParams& params) {
  const double a = params.number("a", 1.4);
  const double b = params.number("b", 0.3);
  if (!(a > 0.0 && a <= 2.0)) throw ConfigError("henon-arc: a must be in (0, 2]");
  if (!(b != 0.0 && std::abs(b) < 1.0)) throw ConfigError("henon-arc: b must be in (-1, 1) without 0");
  return ParametricFamily::additive(
      "henon-arc", PhaseBox(std::vector<Axis>{{-2.0, 2.0, Boundary::clamp}, {-1.0, 1.0, Boundary::clamp}}), 1, 0.1,
      [a, b](const Point& x) { return Point{1.0 - a * x[0] * x[0] + x[1], b * x[0]}; },
      [a, b](const Point& x) {
        Matrix j(2);
        j(0, 0) = -2.0 * a * x[0];
        j(0, 1) = 1.0;
        j(1, 0) = b;
        j(1, 1) = 0.0;
        return j;
      });
}

ParametricFamily make_bowen(const FamilyParams& params) {
  const BowenEye eye = bowen_eye_from(params);
  const PhaseBox box(std::vector<Axis>{{0.0, 1.0, Boundary::periodic}, {-1.0, 1.0, Boundary::clamp}});
  const VectorField2D vf = eye.vector_field();
  auto dfield = [eye](const Point& p) { return eye.field_jacobian(p); };
  // Noise stays well away from the border: the time-one map sends the
  // closed cylinder into |y| < 0.95.
  return ParametricFamily::additive(
      "bowen-eye", box, 2, 0.05, [vf, box](const Point& x) { return flow_time_one(vf, box, x); },
      [vf, dfield](const Point& x) { return flow_time_one_jacobian(vf, dfield, x); });
}

}  // namespace

const std::vector<std::string>& builtin_family_names() {
  static const std::vector<std::string> names{"torus-additive", "logistic-noise", "double-sink", "triple-sink",
                                              "bowen-eye",      "henon-arc",      "linear-sink"};
  return names;
}

ParametricFamily make_builtin(const std::string& name, const FamilyParams& params) {
  if (name == "torus-additive") return make_torus(params);
  if (name == "logistic-noise") return make_logistic(params);
  if (name == "double-sink") return make_double_sink(params);
  if (name == "triple-sink") return make_triple_sink(params);
  if (name == "bowen-eye") return make_bowen(params);
  if (name == "henon-arc") return make_henon(params);
  if (name == "linear-sink") return make_linear_sink(params);
  throw ConfigError("unknown family '" + name + "'");
}

}  // namespace rdlab
