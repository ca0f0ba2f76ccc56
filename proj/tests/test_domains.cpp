#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "rdlab/domains.hpp"
#include "rdlab/rng.hpp"

using namespace rdlab;

namespace {

using Rows = std::vector<std::vector<TransitionMatrix::Entry>>;

TransitionMatrix from_edges(std::size_t n, const std::vector<std::vector<std::size_t>>& succ) {
  Rows rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = succ[i];
    std::sort(s.begin(), s.end());
    for (auto j : s) rows[i].push_back({static_cast<std::uint32_t>(j), 1.0 / static_cast<double>(s.size())});
  }
  return TransitionMatrix(std::move(rows), std::vector<std::uint64_t>(n, 1));
}

DomainApprox domain_of(std::vector<std::vector<std::size_t>> classes) {
  DomainApprox d;
  for (auto& c : classes) {
    std::sort(c.begin(), c.end());
    d.cells.insert(d.cells.end(), c.begin(), c.end());
  }
  std::sort(d.cells.begin(), d.cells.end());
  d.period = classes.size();
  d.classes = std::move(classes);
  return d;
}

std::vector<DomainApprox> domains_for(const std::string& name, const FamilyParams& fp, double eps,
                                      std::size_t cells, TransitionMatrix* out = nullptr) {
  const auto fam = make_builtin(name, fp);
  const auto p = build_transition(fam, GridSpec({cells}), PerturbationSpace(fam.nominal(), eps), {16, 16, 3, 0});
  auto d = closed_recurrent_classes(p);
  if (out) *out = p;
  return d;
}

std::size_t cell_of(double x, double lo, double hi, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(n)));
}

}  // namespace

TEST_CASE("condensation of small graphs") {
  const SupportGraph g(5, {{1}, {2}, {0, 3}, {3}, {3, 0}});
  const auto c = condense(g);
  REQUIRE(c.components.size() == 3);
  CHECK(c.component_of[0] == c.component_of[1]);
  CHECK(c.component_of[1] == c.component_of[2]);
  CHECK(c.component_of[3] != c.component_of[0]);
  CHECK(c.component_of[4] != c.component_of[3]);
  CHECK(c.dag_edges.size() == 3);

  const SupportGraph chain(4, {{1}, {2}, {3}, {}});
  CHECK(condense(chain).components.size() == 4);
  CHECK_THROWS_AS(SupportGraph(2, {{5}, {}}), std::invalid_argument);
}

TEST_CASE("condensation is a partition with an acyclic quotient on random graphs") {
  CounterRng rng(11, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 5 + rep % 40;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < 2.0 / static_cast<double>(n)) adj[i].push_back(j);
    const SupportGraph g(n, adj);
    const auto c = condense(g);
    std::vector<int> hits(n, 0);
    for (const auto& comp : c.components)
      for (auto v : comp) ++hits[v];
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    for (std::size_t u = 0; u < n; ++u)
      for (auto v : adj[u]) {
        const auto a = c.component_of[u], b = c.component_of[v];
        if (a != b) CHECK(std::binary_search(c.dag_edges.begin(), c.dag_edges.end(), std::make_pair(a, b)));
      }
    // Completion order is a reverse topological order of the quotient.
    for (const auto& [a, b] : c.dag_edges) CHECK(b < a);
  }
}

TEST_CASE("cyclic period") {
  const auto cyc3 = from_edges(3, {{1}, {2}, {0}});
  const std::vector<std::size_t> all3{0, 1, 2};
  CHECK(cyclic_period(cyc3, all3) == 3);
  CHECK(cyclic_period(from_edges(3, {{0, 1}, {2}, {0}}), all3) == 1);
  // Cycles of lengths 2 and 3 through node 0.
  const std::vector<std::size_t> all4{0, 1, 2, 3};
  CHECK(cyclic_period(from_edges(4, {{1, 2}, {0}, {3}, {0}}), all4) == 1);
  // Cycles of lengths 2 and 4.
  const std::vector<std::size_t> all5{0, 1, 2, 3, 4};
  CHECK(cyclic_period(from_edges(5, {{1, 2}, {0}, {3}, {4}, {0}}), all5) == 2);
  CHECK_THROWS_AS((void)cyclic_period(from_edges(2, {{1}, {1}}), std::vector<std::size_t>{0, 1}),
                  std::invalid_argument);
}

TEST_CASE("closed classes of the toy kernels") {
  const auto tc = closed_recurrent_classes(from_edges(5, {{1}, {2}, {1}, {4, 0}, {4}}));
  REQUIRE(tc.size() == 2);
  CHECK(tc[0].cells == std::vector<std::size_t>{1, 2});
  CHECK(tc[0].period == 2);
  CHECK(tc[1].cells == std::vector<std::size_t>{4});
  CHECK(tc[1].volume == doctest::Approx(0.2));
}

TEST_CASE("linear sink has a single domain") {
  const auto d = domains_for("linear-sink", {}, 0.05, 128);
  REQUIRE(d.size() == 1);
  CHECK(d[0].period == 1);
  // Invariant interval |x| <= eps / (1 - rho) = 0.1, up to one cell of slack.
  const double lo = -1.0 + 2.0 * static_cast<double>(d[0].cells.front()) / 128.0;
  const double hi = -1.0 + 2.0 * static_cast<double>(d[0].cells.back() + 1) / 128.0;
  CHECK(lo <= 0.0);
  CHECK(hi >= 0.0);
  CHECK(lo >= -0.1 - 2.0 / 128.0);
  CHECK(hi <= 0.1 + 2.0 / 128.0);
  CHECK(std::abs(lo + hi) <= 2.0 / 128.0 + 1e-12);
}

TEST_CASE("double sink has one domain per well") {
  TransitionMatrix p({{{0, 1.0}}}, {1});
  const auto d = domains_for("double-sink", {}, 0.1, 256, &p);
  REQUIRE(d.size() == 2);
  const auto has = [](const DomainApprox& a, std::size_t c) {
    return std::binary_search(a.cells.begin(), a.cells.end(), c);
  };
  CHECK(has(d[0], cell_of(-1.0, -2.0, 2.0, 256)));
  CHECK(has(d[1], cell_of(1.0, -2.0, 2.0, 256)));
  std::vector<std::size_t> both;
  std::set_intersection(d[0].cells.begin(), d[0].cells.end(), d[1].cells.begin(), d[1].cells.end(),
                        std::back_inserter(both));
  CHECK(both.empty());
  CHECK(compare_domains(d[0], d[1]) == DomainOrder::incomparable);
  const auto fam = make_builtin("double-sink");
  const auto sep = separation(fam.box(), GridSpec({256}), d);
  CHECK(sep.shared_pairs == 0);
  CHECK(sep.adjacent_pairs == 0);
  for (const auto& dom : d) {
    const auto rep = verify_r_transitivity(p, dom, dom.cells);
    CHECK(rep.passed);
    CHECK(rep.min_coverage == 1.0);
  }
  const auto doc = nlohmann::json::parse(domains_json(d, fam.box(), GridSpec({256}), "h"));
  CHECK(doc["count"] == 2);
  CHECK(doc["pairwise_disjoint"] == true);
}

TEST_CASE("noisy logistic map has a period-two domain around its 2-cycle") {
  FamilyParams fp;
  fp.set("lambda", 3.2);
  TransitionMatrix p({{{0, 1.0}}}, {1});
  const auto d = domains_for("logistic-noise", fp, 0.005, 512, &p);
  REQUIRE(d.size() == 1);
  CHECK(d[0].period == 2);
  REQUIRE(d[0].classes.size() == 2);
  const double root = std::sqrt((3.2 + 1.0) * (3.2 - 3.0));
  const double lo = (4.2 - root) / 6.4, hi = (4.2 + root) / 6.4;
  CHECK(lo * 3.2 * (1.0 - lo) == doctest::Approx(hi));
  const auto in = [](const std::vector<std::size_t>& c, std::size_t v) {
    return std::binary_search(c.begin(), c.end(), v);
  };
  const auto clo = cell_of(lo, 0.0, 1.0, 512), chi = cell_of(hi, 0.0, 1.0, 512);
  const bool straddles = (in(d[0].classes[0], clo) && in(d[0].classes[1], chi)) ||
                         (in(d[0].classes[1], clo) && in(d[0].classes[0], chi));
  CHECK(straddles);
  CHECK(satisfies_cyclic_edges(p, d[0]));
  CHECK(cyclic_period(p, d[0].cells) == 2);
}

TEST_CASE("domain order") {
  const auto a = domain_of({{0}, {1}});
  const auto b = domain_of({{0, 1}});
  const auto c = domain_of({{1}, {0}});
  const auto e = domain_of({{0, 2}, {1, 3}});
  const auto f = domain_of({{5}});
  CHECK(compare_domains(a, a) == DomainOrder::equal);
  CHECK(compare_domains(a, c) == DomainOrder::equal);
  CHECK(compare_domains(a, b) == DomainOrder::precedes);
  CHECK(compare_domains(b, a) == DomainOrder::succeeds);
  CHECK(compare_domains(a, e) == DomainOrder::precedes);
  CHECK(compare_domains(a, f) == DomainOrder::incomparable);
  CHECK(compare_domains(b, e) == DomainOrder::incomparable);
  CHECK(std::string(to_string(DomainOrder::precedes)) == "precedes");

  // Order axioms on random small domains.
  CounterRng rng(3, 0);
  std::vector<DomainApprox> pool;
  for (int k = 0; k < 60; ++k) {
    const std::size_t r = 1 + static_cast<std::size_t>(rng.uniform() * 3);
    std::vector<std::vector<std::size_t>> cls(r);
    for (std::size_t cell = 0; cell < 6; ++cell) {
      const double u = rng.uniform();
      if (u < 0.5) cls[static_cast<std::size_t>(u * 2 * static_cast<double>(r)) % r].push_back(cell);
    }
    if (std::any_of(cls.begin(), cls.end(), [](const auto& v) { return v.empty(); })) continue;
    pool.push_back(domain_of(cls));
  }
  for (const auto& x : pool) {
    CHECK(compare_domains(x, x) == DomainOrder::equal);
    for (const auto& y : pool) {
      const auto xy = compare_domains(x, y), yx = compare_domains(y, x);
      if (xy == DomainOrder::precedes) CHECK(yx == DomainOrder::succeeds);
      if (xy == DomainOrder::equal) CHECK(yx == DomainOrder::equal);
      if (xy == DomainOrder::incomparable) CHECK(yx == DomainOrder::incomparable);
      for (const auto& z : pool)
        if (xy == DomainOrder::precedes && compare_domains(y, z) == DomainOrder::precedes)
          CHECK(compare_domains(x, z) == DomainOrder::precedes);
    }
  }
}

TEST_CASE("r-transitivity fails on a union of two cycles") {
  const auto p = from_edges(4, {{1}, {0}, {3}, {2}});
  auto d = domain_of({{0, 2}, {1, 3}});
  const std::vector<std::size_t> starts{0};
  const auto rep = verify_r_transitivity(p, d, starts);
  CHECK_FALSE(rep.passed);
  CHECK(rep.min_coverage == doctest::Approx(0.5));
}

TEST_CASE("domain volumes are disjoint and bounded") {
  for (double eps : {0.05, 0.2, 0.4}) {
    const auto d = domains_for("triple-sink", {}, eps, 256);
    double total = 0.0;
    for (const auto& x : d) {
      CHECK(x.volume == doctest::Approx(static_cast<double>(x.cells.size()) / 256.0));
      total += x.volume;
    }
    CHECK(total <= 1.0 + 1e-12);
    const auto sep = separation(make_builtin("triple-sink").box(), GridSpec({256}), d);
    CHECK(sep.shared_pairs == 0);
  }
}

TEST_CASE("separation detects touching domains") {
  const PhaseBox box = PhaseBox::cube(1, 0.0, 1.0, Boundary::clamp);
  const std::vector<DomainApprox> d{domain_of({{0, 1}}), domain_of({{2}}), domain_of({{5}})};
  const auto sep = separation(box, GridSpec({8}), d);
  CHECK(sep.shared_pairs == 0);
  CHECK(sep.adjacent_pairs == 1);
  const PhaseBox ring = PhaseBox::cube(1, 0.0, 1.0, Boundary::periodic);
  const std::vector<DomainApprox> w{domain_of({{0}}), domain_of({{7}})};
  CHECK(separation(ring, GridSpec({8}), w).adjacent_pairs == 1);
  CHECK(separation(box, GridSpec({8}), w).adjacent_pairs == 0);
}
