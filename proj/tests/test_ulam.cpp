#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rdlab/errors.hpp"
#include "rdlab/ulam.hpp"

using namespace rdlab;

namespace {

using Rows = std::vector<std::vector<TransitionMatrix::Entry>>;

TransitionMatrix dense(const std::vector<std::vector<double>>& m) {
  Rows rows(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      if (m[i][j] > 0.0) rows[i].push_back({static_cast<std::uint32_t>(j), m[i][j]});
  return TransitionMatrix(std::move(rows), std::vector<std::uint64_t>(m.size(), 1));
}

std::vector<std::size_t> all_cells(std::size_t n) {
  std::vector<std::size_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i;
  return c;
}

ParametricFamily identity_torus() { return make_builtin("torus-additive"); }

// Kernel of x + t mod 1 on k equal cells, x uniform in the source cell and t
// uniform on [-eps, eps], by a midpoint rule in (x, t).
std::vector<std::vector<double>> quadrature_kernel(std::size_t k, double eps, std::size_t nodes) {
  std::vector<std::vector<double>> p(k, std::vector<double>(k, 0.0));
  const double w = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t a = 0; a < nodes; ++a) {
      const double x = (static_cast<double>(i) + (a + 0.5) / nodes) * w;
      for (std::size_t b = 0; b < nodes; ++b) {
        const double t = -eps + 2.0 * eps * (b + 0.5) / nodes;
        double y = std::fmod(x + t, 1.0);
        if (y < 0) y += 1.0;
        p[i][std::min(k - 1, static_cast<std::size_t>(y * k))] += 1.0 / (nodes * nodes);
      }
    }
  return p;
}

}  // namespace

TEST_CASE("TransitionMatrix validates rows") {
  CHECK_THROWS_AS(dense({{0.5, 0.4}, {0.0, 1.0}}), std::invalid_argument);
  Rows unsorted{{{1, 0.5}, {0, 0.5}}, {{1, 1.0}}};
  CHECK_THROWS_AS(TransitionMatrix(unsorted, {1, 1}), std::invalid_argument);
  const auto p = dense({{0.25, 0.75}, {0.0, 1.0}});
  CHECK(p.at(0, 1) == 0.75);
  CHECK(p.at(1, 0) == 0.0);
  CHECK(p.nonzeros() == 3);
}

TEST_CASE("4-cell toy chain matches the integrated kernel") {
  const auto fam = identity_torus();
  const PerturbationSpace space(fam.nominal(), 0.25);
  const auto p = build_transition(fam, GridSpec({4}), space, {64, 64, 5, 1});
  const auto exact = quadrature_kernel(4, 0.25, 1000);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double q = exact[i][j];
      const double se = std::sqrt(std::max(q * (1.0 - q), 1e-300) / static_cast<double>(p.samples(i)));
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(p.at(i, j) - q) <= 3.0 * se + 1e-12);
    }
  CHECK(exact[0][0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(exact[0][2] == 0.0);
  const auto st = stationary_vector(p, all_cells(4));
  CHECK(l1_distance(st.weights, std::vector<double>(4, 0.25)) <= 0.01);
}

TEST_CASE("full-noise circle rows are uniform") {
  const auto fam = identity_torus();
  const PerturbationSpace space(fam.nominal(), 0.5);
  const auto p = build_transition(fam, GridSpec({64}), space, {100, 100, 3, 1});
  double worst = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    double dev = 0.0;
    for (std::size_t j = 0; j < 64; ++j) dev += std::abs(p.at(i, j) - 1.0 / 64);
    worst = std::max(worst, dev);
  }
  CHECK(worst <= 0.05);
  CHECK(p.max_row_defect() <= 1e-12);
}

TEST_CASE("deterministic identity gives the identity matrix") {
  const auto fam = identity_torus();
  const auto p = build_transition(fam, GridSpec({32}), PerturbationSpace(fam.nominal(), 0.0), {8, 4, 1, 1});
  for (std::size_t i = 0; i < 32; ++i) CHECK(p.at(i, i) == 1.0);
}

TEST_CASE("rows are stochastic for every built-in") {
  for (const auto& name : builtin_family_names()) {
    CAPTURE(name);
    const auto fam = make_builtin(name);
    const GridSpec g = fam.state_dim() == 1 ? GridSpec({64}) : GridSpec({8, 8});
    const bool slow = name == "bowen-eye";
    const auto p = build_transition(fam, g, PerturbationSpace(fam.nominal(), 0.5 * fam.max_offset()),
                                    {slow ? 2u : 8u, slow ? 2u : 8u, 1, 1});
    CHECK(p.max_row_defect() <= 1e-12);
  }
}

TEST_CASE("thread count does not change the matrix") {
  const auto fam = make_builtin("henon-arc");
  const PerturbationSpace space(fam.nominal(), 0.05);
  const auto a = build_transition(fam, GridSpec({32, 32}), space, {4, 4, 9, 1});
  const auto b = build_transition(fam, GridSpec({32, 32}), space, {4, 4, 9, 4});
  CHECK(matrix_coo_text(a, "") == matrix_coo_text(b, ""));
}

TEST_CASE("stationary vectors") {
  const auto one = dense({{1.0}});
  CHECK(stationary_vector(one, all_cells(1)).weights[0] == 1.0);

  const auto fam = identity_torus();
  const auto p = build_transition(fam, GridSpec({32}), PerturbationSpace(fam.nominal(), 0.5), {32, 32, 1, 1});
  // A doubly stochastic matrix in exact arithmetic: average columns to make one.
  std::vector<std::vector<double>> ds(3, std::vector<double>(3, 0.0));
  ds[0] = {0.2, 0.5, 0.3};
  ds[1] = {0.5, 0.3, 0.2};
  ds[2] = {0.3, 0.2, 0.5};
  const auto st = stationary_vector(dense(ds), all_cells(3));
  for (double w : st.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(st.residual <= 1e-8);
  const auto su = stationary_vector(p, all_cells(32));
  CHECK(std::abs(std::accumulate(su.weights.begin(), su.weights.end(), 0.0) - 1.0) <= 1e-10);

  FamilyParams lp;
  const auto ls = make_builtin("linear-sink", lp);
  const GridSpec g({256});
  const auto pl = build_transition(ls, g, PerturbationSpace(ls.nominal(), 0.1), {16, 16, 2, 1});
  // The class is the terminal component around 0; find it via the cells
  // that the interval [-0.2, 0.2] maps into.
  std::vector<std::size_t> cls;
  for (std::size_t c = 0; c < 256; ++c) {
    const double center = cell_geometry(ls.box(), g, CellIndex{c}).center[0];
    if (std::abs(center) < 0.22) cls.push_back(c);
  }
  // Shrink to the closed part reachable from the center cell.
  std::vector<char> seen(256, 0);
  std::vector<std::size_t> stack{128};
  seen[128] = 1;
  std::vector<std::size_t> reach{128};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (const auto& e : pl.row(u))
      if (!seen[e.col]) {
        seen[e.col] = 1;
        stack.push_back(e.col);
        reach.push_back(e.col);
      }
  }
  const auto sl = stationary_vector(pl, reach);
  double inside = 0.0;
  for (std::size_t c = 0; c < 256; ++c)
    if (std::abs(cell_geometry(ls.box(), g, CellIndex{c}).center[0]) <= 0.25) inside += sl.weights[c];
  CHECK(inside >= 0.999);
}

TEST_CASE("periodic classes and error paths") {
  const auto cyc = dense({{0.0, 1.0}, {1.0, 0.0}});
  const auto st = stationary_vector(cyc, all_cells(2));
  CHECK(st.period == 2);
  CHECK(st.weights[0] == doctest::Approx(0.5));
  CHECK(st.weights[1] == doctest::Approx(0.5));
  // As a single cyclic class the plain iteration oscillates forever.
  const auto bip = dense({{0.0, 1.0, 0.0}, {0.5, 0.0, 0.5}, {0.0, 1.0, 0.0}});
  CHECK_THROWS_AS(
      (void)stationary_vector(bip, std::vector<std::vector<std::size_t>>{{0, 1, 2}}, {1000, 1e-11, 1e-9}),
      NumericalError);
  const auto sb = stationary_vector(bip, all_cells(3));
  CHECK(sb.period == 2);
  CHECK(sb.weights[1] == doctest::Approx(0.5));
  const auto leak = dense({{0.5, 0.5}, {0.0, 1.0}});
  const std::vector<std::size_t> c0{0};
  CHECK_THROWS_AS((void)stationary_vector(leak, c0), std::invalid_argument);
  const std::vector<std::size_t> both{0, 1};
  CHECK_THROWS_AS((void)cyclic_partition(leak, both), std::invalid_argument);
  // Period 3 with a chord making it aperiodic.
  const auto tri = dense({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}});
  CHECK(cyclic_partition(tri, all_cells(3)).size() == 3);
  const auto tri2 = dense({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {0.5, 0.5, 0.0}});
  CHECK(cyclic_partition(tri2, all_cells(3)).size() == 1);
}

TEST_CASE("push-forward") {
  const auto p = dense({{0.5, 0.25, 0.25}, {0.1, 0.8, 0.1}, {0.0, 0.3, 0.7}});
  const std::vector<double> d{0.2, 0.3, 0.5};
  const auto once = push_forward(p, d);
  CHECK(std::abs(std::accumulate(once.begin(), once.end(), 0.0) - 1.0) <= 1e-12);
  const std::vector<double> e1{0.0, 1.0, 0.0};
  const auto row = push_forward(p, e1);
  CHECK(row[0] == 0.1);
  CHECK(row[1] == 0.8);
  const auto twice = push_forward(p, once);
  std::vector<std::vector<double>> p2(3, std::vector<double>(3, 0.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < 3; ++j) p2[i][j] += p.at(i, k) * p.at(k, j);
  std::vector<double> direct(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) direct[j] += d[i] * p2[i][j];
  CHECK(l1_distance(twice, direct) <= 1e-10);
  const auto st = stationary_vector(p, all_cells(3));
  CHECK(l1_distance(push_forward(p, st.weights), st.weights) <= 1e-8);
  CHECK_THROWS_AS((void)push_forward(p, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("more samples per row bring the full-noise stationary vector closer to uniform") {
  const auto fam = identity_torus();
  const PerturbationSpace space(fam.nominal(), 0.5);
  double coarse = 0.0, fine = 0.0;
  const std::vector<double> u(64, 1.0 / 64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    coarse += l1_distance(stationary_vector(build_transition(fam, GridSpec({64}), space, {4, 5, seed, 1}), all_cells(64)).weights, u);
    fine += l1_distance(stationary_vector(build_transition(fam, GridSpec({64}), space, {20, 10, seed, 1}), all_cells(64)).weights, u);
  }
  CHECK(fine < coarse);
}

TEST_CASE("exports") {
  const auto p = dense({{0.5, 0.5}, {0.0, 1.0}});
  CHECK(matrix_coo_text(p, "h") == "# h\n# cells=2 nonzeros=3\n0 0 0.5\n0 1 0.5\n1 1 1\n");
  StationaryVector v{{0.25, 0.0, 0.75}, 1, 1, 0.0};
  CHECK(stationary_csv(v, "h") == "# h\ncell,weight\n0,0.25\n2,0.75\n");
}
