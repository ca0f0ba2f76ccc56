#include "rdlab/domains.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace rdlab {

SupportGraph::SupportGraph(std::size_t n, std::vector<std::vector<std::size_t>> adjacency) : adj_(std::move(adjacency)) {
  if (adj_.size() != n) throw std::invalid_argument("SupportGraph: adjacency size mismatch");
  for (const auto& s : adj_)
    for (std::size_t j : s)
      if (j >= n) throw std::invalid_argument("SupportGraph: edge target out of range");
}

SupportGraph::SupportGraph(const TransitionMatrix& p, double theta) : adj_(p.size()) {
  if (!(theta >= 0.0)) throw std::invalid_argument("SupportGraph: theta must be >= 0");
  for (std::size_t i = 0; i < p.size(); ++i)
    for (const auto& e : p.row(i))
      if (e.prob > theta) adj_[i].push_back(e.col);
}

std::size_t SupportGraph::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : adj_) n += s.size();
  return n;
}

Condensation condense(const SupportGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, none), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  Condensation out;
  out.component_of.assign(n, none);
  std::size_t counter = 0;

  // Iterative Tarjan: call frames hold (node, next successor position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != none) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& succ = g.successors(v);
      if (pos < succ.size()) {
        const std::size_t w = succ[pos++];
        if (index[w] == none) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.component_of[w] = out.components.size();
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w : g.successors(v))
      if (out.component_of[v] != out.component_of[w]) out.dag_edges.push_back({out.component_of[v], out.component_of[w]});
  std::sort(out.dag_edges.begin(), out.dag_edges.end());
  out.dag_edges.erase(std::unique(out.dag_edges.begin(), out.dag_edges.end()), out.dag_edges.end());
  return out;
}

std::size_t cyclic_period(const TransitionMatrix& p, std::span<const std::size_t> cells, double theta) {
  return cyclic_partition(p, cells, theta).size();
}

std::vector<DomainApprox> closed_recurrent_classes(const TransitionMatrix& p, double theta) {
  const SupportGraph g(p, theta);
  const Condensation c = condense(g);
  std::vector<char> has_out(c.components.size(), 0);
  for (const auto& [from, to] : c.dag_edges) has_out[from] = 1;
  std::vector<DomainApprox> out;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    if (has_out[k]) continue;
    DomainApprox d;
    d.cells = c.components[k];
    d.classes = cyclic_partition(p, d.cells, theta);
    d.period = d.classes.size();
    d.minimal = true;
    d.volume = static_cast<double>(d.cells.size()) / static_cast<double>(p.size());
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(), [](const DomainApprox& a, const DomainApprox& b) { return a.cells.front() < b.cells.front(); });
  return out;
}

bool satisfies_cyclic_edges(const TransitionMatrix& p, const DomainApprox& d, double theta) {
  const std::size_t r = d.classes.size();
  std::vector<std::size_t> owner(p.size(), r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t c : d.classes[i]) owner[c] = i;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t c : d.classes[i])
      for (const auto& e : p.row(c))
        if (e.prob > theta && owner[e.col] != r && owner[e.col] != (i + 1) % r) return false;
  return true;
}

const char* to_string(DomainOrder o) noexcept {
  switch (o) {
    case DomainOrder::equal: return "equal";
    case DomainOrder::precedes: return "precedes";
    case DomainOrder::succeeds: return "succeeds";
    case DomainOrder::incomparable: return "incomparable";
  }
  return "incomparable";
}

namespace {

enum class Inclusion { none, equal, strict };

Inclusion included(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (!std::includes(sb.begin(), sb.end(), sa.begin(), sa.end())) return Inclusion::none;
  return sa.size() == sb.size() ? Inclusion::equal : Inclusion::strict;
}

// Some shift s with a_k inside b_{k+s} for all k; reports whether all
// inclusions were equalities.
Inclusion rotated_inclusion(const DomainApprox& a, const DomainApprox& b) {
  const std::size_t r = a.classes.size(), rb = b.classes.size();
  if (r == 0 || rb == 0) return Inclusion::none;
  const std::size_t span = std::lcm(r, rb);
  Inclusion best = Inclusion::none;
  for (std::size_t s = 0; s < rb; ++s) {
    bool ok = true, strict = false;
    for (std::size_t k = 0; k < span && ok; ++k) {
      const Inclusion inc = included(a.classes[k % r], b.classes[(k + s) % rb]);
      if (inc == Inclusion::none) ok = false;
      else if (inc == Inclusion::strict) strict = true;
    }
    if (!ok) continue;
    if (!strict) return Inclusion::equal;
    best = Inclusion::strict;
  }
  return best;
}

}  // namespace

DomainOrder compare_domains(const DomainApprox& a, const DomainApprox& b) {
  const Inclusion ab = rotated_inclusion(a, b);
  if (ab == Inclusion::equal) return DomainOrder::equal;
  if (ab == Inclusion::strict) return DomainOrder::precedes;
  if (rotated_inclusion(b, a) == Inclusion::strict) return DomainOrder::succeeds;
  return DomainOrder::incomparable;
}

TransitivityReport verify_r_transitivity(const TransitionMatrix& p, const DomainApprox& d,
                                         std::span<const std::size_t> start_cells, double theta, double required) {
  std::vector<char> member(p.size(), 0);
  for (std::size_t c : d.cells) member[c] = 1;
  TransitivityReport rep;
  rep.min_coverage = 1.0;
  if (d.cells.empty()) return rep;
  std::vector<char> seen(p.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start : start_cells) {
    if (start >= p.size() || !member[start]) throw std::invalid_argument("verify_r_transitivity: start cell outside the domain");
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, start);
    seen[start] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : p.row(u))
        if (e.prob > theta && member[e.col] && !seen[e.col]) {
          seen[e.col] = 1;
          ++reached;
          stack.push_back(e.col);
        }
    }
    rep.min_coverage = std::min(rep.min_coverage, static_cast<double>(reached) / static_cast<double>(d.cells.size()));
  }
  rep.passed = rep.min_coverage >= required;
  return rep;
}

SeparationReport separation(const PhaseBox& box, const GridSpec& grid, const std::vector<DomainApprox>& domains) {
  check_compatible(box, grid);
  const std::size_t n = grid.total();
  const std::size_t none = domains.size();
  std::vector<std::size_t> owner(n, none);
  std::vector<std::vector<char>> shared(domains.size(), std::vector<char>(domains.size(), 0));
  std::vector<std::vector<char>> touch(domains.size(), std::vector<char>(domains.size(), 0));
  for (std::size_t k = 0; k < domains.size(); ++k)
    for (std::size_t c : domains[k].cells) {
      if (owner[c] != none && owner[c] != k) shared[std::min(owner[c], k)][std::max(owner[c], k)] = 1;
      owner[c] = k;
    }
  for (std::size_t c = 0; c < n; ++c) {
    if (owner[c] == none) continue;
    auto multi = grid.unflatten(c);
    for (std::size_t ax = 0; ax < grid.dim(); ++ax) {
      const std::size_t cnt = grid.count(ax);
      const std::size_t orig = multi[ax];
      std::size_t nb;
      if (orig + 1 < cnt) nb = orig + 1;
      else if (box.axis(ax).mode == Boundary::periodic && cnt > 1) nb = 0;
      else continue;
      multi[ax] = nb;
      const std::size_t o = owner[grid.flatten(multi)];
      multi[ax] = orig;
      if (o != none && o != owner[c]) touch[std::min(o, owner[c])][std::max(o, owner[c])] = 1;
    }
  }
  SeparationReport rep;
  for (std::size_t a = 0; a < domains.size(); ++a)
    for (std::size_t b = a + 1; b < domains.size(); ++b) {
      rep.shared_pairs += shared[a][b];
      rep.adjacent_pairs += touch[a][b];
    }
  return rep;
}

std::string domains_json(const std::vector<DomainApprox>& domains, const PhaseBox& box, const GridSpec& grid,
                         const std::string& header_comment) {
  const SeparationReport sep = separation(box, grid, domains);
  nlohmann::ordered_json doc;
  doc["header"] = header_comment;
  doc["count"] = domains.size();
  doc["pairwise_disjoint"] = sep.shared_pairs == 0;
  doc["separated"] = sep.shared_pairs == 0 && sep.adjacent_pairs == 0;
  auto periods = nlohmann::ordered_json::array();
  auto volumes = nlohmann::ordered_json::array();
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : domains) {
    periods.push_back(d.period);
    volumes.push_back(d.volume);
    nlohmann::ordered_json item;
    item["cells"] = d.cells;
    item["classes"] = d.classes;
    item["period"] = d.period;
    item["volume"] = d.volume;
    item["minimal"] = d.minimal;
    list.push_back(std::move(item));
  }
  doc["periods"] = std::move(periods);
  doc["volumes"] = std::move(volumes);
  doc["domains"] = std::move(list);
  return doc.dump(1) + "\n";
}

}  // namespace rdlab
