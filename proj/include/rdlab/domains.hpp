#pragma once

#include <span>
#include <string>
#include <vector>

#include "rdlab/phase_space.hpp"
#include "rdlab/ulam.hpp"

namespace rdlab {

/// Directed graph on cells with an edge i -> j iff P(i, j) > theta.
class SupportGraph {
 public:
  SupportGraph(std::size_t n, std::vector<std::vector<std::size_t>> adjacency);
  SupportGraph(const TransitionMatrix& p, double theta);

  [[nodiscard]] std::size_t size() const noexcept { return adj_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& successors(std::size_t i) const { return adj_.at(i); }
  [[nodiscard]] std::size_t edge_count() const noexcept;

 private:
  std::vector<std::vector<std::size_t>> adj_;
};

struct Condensation {
  /// Components in Tarjan completion order, each sorted ascending.
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> component_of;
  /// Deduplicated quotient edges (from, to), sorted.
  std::vector<std::pair<std::size_t, std::size_t>> dag_edges;
};

[[nodiscard]] Condensation condense(const SupportGraph& g);

/// Grid-level approximation of an invariant domain.
struct DomainApprox {
  std::vector<std::size_t> cells;                    ///< sorted
  std::vector<std::vector<std::size_t>> classes;     ///< cyclic classes U_0..U_{r-1}
  std::size_t period = 1;
  bool minimal = false;
  double volume = 0.0;                               ///< normalized volume
};

/// Terminal components of the support condensation, ordered by smallest cell.
[[nodiscard]] std::vector<DomainApprox> closed_recurrent_classes(const TransitionMatrix& p, double theta = 0.0);

/// gcd of cycle lengths through the class.  Throws std::invalid_argument when
/// the class is not strongly connected at this theta.
[[nodiscard]] std::size_t cyclic_period(const TransitionMatrix& p, std::span<const std::size_t> cells,
                                        double theta = 0.0);

/// Every support edge leaving U_i ends in U_{(i+1) mod r} or outside the domain.
[[nodiscard]] bool satisfies_cyclic_edges(const TransitionMatrix& p, const DomainApprox& d, double theta = 0.0);

enum class DomainOrder { equal, precedes, succeeds, incomparable };
[[nodiscard]] const char* to_string(DomainOrder o) noexcept;

/// Inclusion-with-rotation order.  `a` precedes `b` when, for some shift s,
/// U^a_{k mod r} is contained in U^b_{(k+s) mod r'} for every k, with at least
/// one strict inclusion.  Periods may differ.
[[nodiscard]] DomainOrder compare_domains(const DomainApprox& a, const DomainApprox& b);

struct TransitivityReport {
  bool passed = false;
  double min_coverage = 0.0;
};

/// Reachability inside the domain from each start cell; passes when every
/// start reaches at least `required` of the domain's cells.
[[nodiscard]] TransitivityReport verify_r_transitivity(const TransitionMatrix& p, const DomainApprox& d,
                                                       std::span<const std::size_t> start_cells,
                                                       double theta = 0.0, double required = 0.99);

/// Number of domain pairs that share a cell, and that touch across a cell face.
struct SeparationReport {
  std::size_t shared_pairs = 0;
  std::size_t adjacent_pairs = 0;
};
[[nodiscard]] SeparationReport separation(const PhaseBox& box, const GridSpec& grid,
                                          const std::vector<DomainApprox>& domains);

/// JSON document {"header":..., "count":..., "pairwise_disjoint":..., "separated":...,
/// "domains":[{cells, classes, period, volume, minimal}]}.
[[nodiscard]] std::string domains_json(const std::vector<DomainApprox>& domains, const PhaseBox& box,
                                       const GridSpec& grid, const std::string& header_comment);

}  // namespace rdlab
