#include "rdlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rdlab/domains.hpp"
#include "rdlab/errors.hpp"
#include "rdlab/io.hpp"
#include "rdlab/measures.hpp"
#include "rdlab/parallel.hpp"
#include "rdlab/perturbation.hpp"
#include "rdlab/ulam.hpp"

namespace rdlab::cli {

using json = nlohmann::ordered_json;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    try {
      c.assign(line);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return from_text(os.str(), path.string());
}

void Config::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of(" \t=") != std::string::npos)
    throw ConfigError("invalid config key '" + key + "'");
  values_[key] = value;
}

std::string Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::real(const std::string& key) const { return parse_real(text(key), key); }

double Config::real(const std::string& key, double fallback) const {
  return has(key) ? parse_real(text(key), key) : fallback;
}

std::uint64_t Config::uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_uint(text(key), key) : fallback;
}

std::uint64_t Config::positive(const std::string& key, std::uint64_t fallback) const {
  const std::uint64_t v = uint(key, fallback);
  if (v == 0) throw ConfigError(key + " must be positive");
  return v;
}

std::vector<double> Config::reals(const std::string& key) const { return parse_real_list(text(key), key); }

std::vector<double> Config::reals(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? reals(key) : fallback;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t Config::hash() const { return fnv1a(canonical()); }

// ---------------------------------------------------------------------------
// Shared helpers

ParametricFamily family_from(const Config& config) {
  const std::string name = config.text("family.name");
  FamilyParams params;
  const std::string prefix = "family.";
  for (const auto& [k, v] : config.values())
    if (k.rfind(prefix, 0) == 0 && k != "family.name") params.set(k.substr(prefix.size()), v);
  return make_builtin(name, params);
}

GridSpec grid_from(const Config& config, const PhaseBox& box, const std::string& key) {
  const auto raw = split(config.text(key), ',');
  std::vector<std::size_t> counts;
  for (const auto& r : raw) {
    const auto c = parse_uint(r, key);
    if (c == 0) throw ConfigError(key + ": cell counts must be positive");
    counts.push_back(c);
  }
  if (counts.size() == 1 && box.dim() > 1) counts.assign(box.dim(), counts.front());
  if (counts.size() != box.dim()) throw ConfigError(key + ": expected " + std::to_string(box.dim()) + " cell counts");
  return GridSpec(counts);
}

std::filesystem::path resolve_out_dir(const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (const char* env = std::getenv("RDLAB_OUT"); env != nullptr && *env != '\0') return env;
  return "rdlab_out";
}

std::string header_line(const std::string& subcommand, const Config& config) {
  return "rdlab " + subcommand + " config_hash=" + hex64(config.hash()) + " seed=" +
         std::to_string(config.uint("run.seed", 1));
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"orbit", "ulam",      "domains",   "stationary", "basins",
                                              "hypA",  "hypB",      "bowen",     "sinkcheck",  "sweep"};
  return names;
}

namespace {

Point parse_point(const std::string& s, std::size_t dim, const std::string& key) {
  const auto v = parse_real_list(s, key);
  if (v.size() != dim) throw ConfigError(key + ": expected " + std::to_string(dim) + " coordinates");
  Point p(dim);
  for (std::size_t i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

std::vector<Point> parse_points(const std::string& s, std::size_t dim, const std::string& key) {
  std::vector<Point> out;
  for (const auto& item : split(s, ';'))
    if (!item.empty()) out.push_back(parse_point(item, dim, key));
  if (out.empty()) throw ConfigError(key + ": no points given");
  return out;
}

std::vector<std::size_t> parse_counts(const std::vector<double>& v, const std::string& key) {
  std::vector<std::size_t> out;
  for (double d : v) {
    if (!(d >= 1.0) || std::floor(d) != d) throw ConfigError(key + ": entries must be positive integers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

json point_json(const Point& p) {
  json a = json::array();
  for (double v : p) a.push_back(v);
  return a;
}

// Per-run state shared by the subcommands.
struct Run {
  const Config& cfg;
  const RunOptions& opt;
  std::string cmd;
  ParametricFamily fam;
  std::uint64_t seed;
  std::filesystem::path out;
  std::string header;
  json checks = json::object();

  Run(const std::string& name, const Config& c, const RunOptions& o)
      : cfg(c), opt(o), cmd(name), fam(family_from(c)), seed(c.uint("run.seed", 1)), out(resolve_out_dir(o)),
        header(header_line(name, c)) {}

  void check(const std::string& name, bool ok) { checks[name] = ok; }
  [[nodiscard]] bool all_passed() const {
    for (const auto& [k, v] : checks.items())
      if (!v.get<bool>()) return false;
    return true;
  }

  void write(const std::string& file, const std::string& content) const {
    std::filesystem::create_directories(out);
    std::ofstream f(out / file, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (out / file).string());
    f << content;
  }
  void write_json(const std::string& file, json doc) const {
    doc["checks"] = checks;
    write(file, doc.dump(1) + "\n");
  }
  void say(const std::string& msg) const {
    if (!opt.quiet) std::cout << msg << '\n';
  }

  [[nodiscard]] PerturbationSpace space(double eps) const { return PerturbationSpace::around(fam, eps); }
  [[nodiscard]] PerturbationSpace space() const { return space(cfg.real("noise.epsilon")); }
  [[nodiscard]] GridSpec grid(const std::string& fallback = "") const {
    if (!cfg.has("grid.cells") && !fallback.empty()) {
      Config tmp;
      tmp.set("grid.cells", fallback);
      return grid_from(tmp, fam.box());
    }
    return grid_from(cfg, fam.box());
  }
  [[nodiscard]] UlamParams ulam() const {
    return {cfg.positive("ulam.points_per_cell", 16), cfg.positive("ulam.samples_per_point", 16), seed, opt.threads};
  }
  [[nodiscard]] double theta() const {
    const double t = cfg.real("domains.theta", 0.0);
    if (!(t >= 0.0)) throw ConfigError("domains.theta must be >= 0");
    return t;
  }
};

std::vector<StationaryVector> solve_classes(const Run& r, const TransitionMatrix& p,
                                            const std::vector<DomainApprox>& ds) {
  PowerIteration pi;
  pi.max_iterations = r.cfg.positive("stationary.max_iterations", pi.max_iterations);
  pi.tolerance = r.cfg.real("stationary.tolerance", pi.tolerance);
  if (!(pi.tolerance > 0.0)) throw ConfigError("stationary.tolerance must be positive");
  std::vector<StationaryVector> out(ds.size());
  parallel_for(ds.size(), r.opt.threads, [&](std::size_t k) { out[k] = stationary_vector(p, ds[k].classes, pi); });
  return out;
}

json domain_summary(const std::vector<DomainApprox>& ds) {
  json a = json::array();
  for (const auto& d : ds) a.push_back({{"size", d.cells.size()}, {"period", d.period}, {"volume", d.volume}});
  return a;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_orbit(Run& r) {
  const Point x0 = parse_point(r.cfg.text("orbit.x0"), r.fam.state_dim(), "orbit.x0");
  const auto steps = r.cfg.uint("orbit.steps", 100);
  const auto space = r.space();
  PerturbationStream stream(r.seed, r.cfg.uint("orbit.stream", 0));
  const OrbitSample orbit = sample_orbit(r.fam, space, x0, stream, steps);
  r.write("orbit.csv", orbit_csv(orbit, r.header));
  r.say("orbit: " + std::to_string(orbit.visited.size()) + " points");
  if (!r.cfg.has("orbit.region")) return;
  const Region q = parse_region(r.cfg.text("orbit.region"), r.fam.state_dim());
  const auto horizon = r.cfg.positive("orbit.horizon", 10000);
  const auto max_returns = r.cfg.positive("orbit.returns", 100);
  PerturbationStream rs(r.seed, r.cfg.uint("orbit.stream", 0));
  const auto times = return_times(r.fam, space, x0, rs, q, max_returns, horizon);
  const double prob = estimate_recurrence_probability(r.fam, x0, space, q, r.cfg.positive("orbit.trials", 100),
                                                      horizon, max_returns, derive_seed(r.seed, 1), r.opt.threads);
  r.check("recurrence_probability_positive", prob > 0.0);
  r.write_json("orbit_returns.json",
               {{"header", r.header}, {"return_times", times}, {"recurrence_probability", prob},
                {"horizon", horizon}, {"returns_required", max_returns}});
}

void cmd_ulam(Run& r) {
  const GridSpec grid = r.grid();
  const auto P = build_transition(r.fam, grid, r.space(), r.ulam());
  const auto ds = closed_recurrent_classes(P, r.theta());
  const auto sv = solve_classes(r, P, ds);
  r.write("ulam_matrix.txt", matrix_coo_text(P, r.header));
  json classes = json::array();
  double worst_residual = 0.0;
  for (std::size_t k = 0; k < sv.size(); ++k) {
    r.write("ulam_stationary_" + std::to_string(k) + ".csv", stationary_csv(sv[k], r.header));
    worst_residual = std::max(worst_residual, sv[k].residual);
    classes.push_back({{"size", ds[k].cells.size()},
                       {"period", sv[k].period},
                       {"iterations", sv[k].iterations},
                       {"residual", sv[k].residual}});
  }
  r.check("row_sums", P.max_row_defect() <= 1e-12);
  r.check("stationary_residual", worst_residual <= 1e-8);
  r.write_json("ulam.json", {{"header", r.header},
                             {"cells", P.size()},
                             {"nonzeros", P.nonzeros()},
                             {"max_row_defect", P.max_row_defect()},
                             {"classes", classes}});
  r.say("ulam: " + std::to_string(P.size()) + " cells, " + std::to_string(ds.size()) + " closed classes");
}

void cmd_domains(Run& r) {
  const GridSpec grid = r.grid();
  const double theta = r.theta();
  const auto P = build_transition(r.fam, grid, r.space(), r.ulam());
  const auto ds = closed_recurrent_classes(P, theta);
  bool cyclic = true;
  for (const auto& d : ds) cyclic = cyclic && satisfies_cyclic_edges(P, d, theta);
  r.check("pairwise_disjoint", separation(r.fam.box(), grid, ds).shared_pairs == 0);
  r.check("cyclic_edges", cyclic);
  if (r.cfg.has("assert.count")) r.check("count", ds.size() == r.cfg.uint("assert.count", 0));
  if (r.cfg.has("assert.periods")) {
    const auto want = parse_counts(r.cfg.reals("assert.periods"), "assert.periods");
    std::vector<std::size_t> got;
    for (const auto& d : ds) got.push_back(d.period);
    r.check("periods", got == want);
  }
  json doc = json::parse(domains_json(ds, r.fam.box(), grid, r.header));
  doc["theta"] = theta;
  r.write_json("domains.json", std::move(doc));
  std::string periods;
  for (const auto& d : ds) periods += (periods.empty() ? "" : ",") + std::to_string(d.period);
  r.say("domains: count=" + std::to_string(ds.size()) + " periods=[" + periods + "]");
}

void cmd_stationary(Run& r) {
  const GridSpec grid = r.grid();
  const auto space = r.space();
  const Point x0 = parse_point(r.cfg.text("stationary.x0"), r.fam.state_dim(), "stationary.x0");
  const auto P = build_transition(r.fam, grid, space, r.ulam());
  const auto ds = closed_recurrent_classes(P, r.theta());
  const auto sv = solve_classes(r, P, ds);
  const auto m = cesaro_pushforward(r.fam, x0, space, r.cfg.positive("stationary.orbits", 100),
                                    r.cfg.positive("stationary.steps", 10000), grid, derive_seed(r.seed, 1),
                                    r.opt.threads);
  // Compare with the mixture of class laws weighted by the Cesaro mass they receive.
  std::vector<double> mix(grid.total(), 0.0);
  double absorbed = 0.0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    double w = 0.0;
    for (std::size_t c : ds[k].cells) w += m.weights[c];
    absorbed += w;
    for (std::size_t c = 0; c < grid.total(); ++c) mix[c] += w * sv[k].weights[c];
  }
  if (absorbed > 0.0)
    for (double& v : mix) v /= absorbed;
  const double l1 = l1_distance(m.weights, mix);
  const double l1_uniform = l1_distance(m.weights, uniform_weights(grid.total()));
  const double push = l1_distance(push_forward(P, m.weights), m.weights);
  r.check("normalized", std::abs(m.total() - 1.0) <= 1e-10);
  if (r.cfg.has("assert.max_l1")) r.check("l1_to_ulam", l1 <= r.cfg.real("assert.max_l1"));
  r.write("stationary.csv", measure_csv(m, r.header));
  r.write_json("stationary.json", {{"header", r.header},
                                   {"samples", m.samples},
                                   {"total", m.total()},
                                   {"domains", ds.size()},
                                   {"l1_to_ulam", l1},
                                   {"l1_to_uniform", l1_uniform},
                                   {"push_forward_change", push}});
  r.say("stationary: L1 to Ulam vector " + format_real(l1));
}

void cmd_basins(Run& r) {
  const GridSpec grid = r.grid();
  const auto space = r.space();
  const auto P = build_transition(r.fam, grid, space, r.ulam());
  const auto ds = closed_recurrent_classes(P, r.theta());
  const auto points = parse_points(r.cfg.text("basins.points"), r.fam.state_dim(), "basins.points");
  const auto trials = r.cfg.positive("basins.trials", 1000);
  const auto horizon = r.cfg.positive("basins.horizon", 1000);
  const double delta = r.cfg.real("basins.delta", 0.0);
  const auto neighbors = r.cfg.uint("basins.neighbors", 4);
  json list = json::array();
  bool sums = true;
  double min_best = 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::uint64_t s = derive_seed(r.seed, 100 + i);
    const auto prof = basin_classify(r.fam, points[i], space, grid, ds, trials, horizon, s, r.opt.threads);
    double total = prof.unresolved;
    for (double p : prof.probabilities) total += p;
    sums = sums && std::abs(total - 1.0) <= 1e-9;
    const double best = prof.probabilities.empty() ? 0.0 : *std::max_element(prof.probabilities.begin(), prof.probabilities.end());
    min_best = std::min(min_best, best);
    json item{{"x", point_json(points[i])},
              {"probabilities", prof.probabilities},
              {"unresolved", prof.unresolved},
              {"horizon", prof.horizon},
              {"trials", prof.trials}};
    if (delta > 0.0)
      item["continuity_probe"] =
          basin_continuity_probe(r.fam, points[i], delta, space, grid, ds, trials, horizon, neighbors, s, r.opt.threads);
    list.push_back(std::move(item));
  }
  r.check("profiles_sum_to_one", sums);
  if (r.cfg.has("assert.min_probability")) r.check("min_probability", min_best >= r.cfg.real("assert.min_probability"));
  r.write_json("basins.json", {{"header", r.header}, {"domains", domain_summary(ds)}, {"points", list}});
  r.say("basins: " + std::to_string(points.size()) + " points, " + std::to_string(ds.size()) + " domains");
}

void cmd_hypA(Run& r) {
  const auto space = r.space();
  const Point x0 = parse_point(r.cfg.text("hypA.x0"), r.fam.state_dim(), "hypA.x0");
  const std::size_t dflt = r.fam.state_dim() == 1 ? 16 : 64;
  const auto rep = check_hypothesis_A(r.fam, x0, space, r.cfg.positive("hypA.k", 1), r.cfg.positive("hypA.samples", 100000),
                                      r.cfg.positive("hypA.directions", dflt), r.seed);
  const double ratio = space.radius() > 0.0 ? rep.xi_hat / space.radius() : 0.0;
  if (r.cfg.has("assert.min_ratio")) r.check("min_ratio", ratio >= r.cfg.real("assert.min_ratio"));
  r.write_json("hypA.json", {{"header", r.header},
                             {"k", rep.k},
                             {"epsilon", space.radius()},
                             {"xi_hat", rep.xi_hat},
                             {"xi_over_epsilon", ratio},
                             {"samples", rep.samples},
                             {"directions", rep.directions},
                             {"shrink", rep.shrink}});
  r.say("hypA: xi_hat=" + format_real(rep.xi_hat));
}

void cmd_hypB(Run& r) {
  const auto space = r.space();
  const Point x0 = parse_point(r.cfg.text("hypB.x0"), r.fam.state_dim(), "hypB.x0");
  std::vector<GridSpec> grids;
  for (const auto& g : split(r.cfg.text("hypB.grids"), ';')) {
    Config tmp;
    tmp.set("grid.cells", g);
    grids.push_back(grid_from(tmp, r.fam.box()));
  }
  const auto rep = check_no_atoms(r.fam, x0, space, r.cfg.positive("hypB.k", 1), grids,
                                  r.cfg.positive("hypB.samples", 1000000), r.seed, r.cfg.real("hypB.max_growth", 10.0));
  r.check("no_atoms", rep.passed);
  r.write_json("hypB.json", {{"header", r.header},
                             {"epsilon", space.radius()},
                             {"cells", rep.cells},
                             {"max_masses", rep.max_masses},
                             {"step_ratios", rep.step_ratios},
                             {"density_growth", rep.density_growth},
                             {"passed", rep.passed}});
  r.say(std::string("hypB: audit ") + (rep.passed ? "passed" : "failed"));
}

void cmd_bowen(Run& r) {
  if (r.fam.name() != "bowen-eye") throw ConfigError("bowen: family.name must be bowen-eye");
  FamilyParams params;
  for (const auto& [k, v] : r.cfg.values())
    if (k.rfind("family.", 0) == 0 && k != "family.name") params.set(k.substr(7), v);
  const BowenEye eye = bowen_eye_from(params);
  const Point x0 = parse_point(r.cfg.text("bowen.x0", "0.5,0.005"), 2, "bowen.x0");
  const auto cps = parse_counts(r.cfg.reals("bowen.checkpoints", {1e3, 1e4, 1e5}), "bowen.checkpoints");
  if (cps.size() < 2) throw ConfigError("bowen.checkpoints needs at least 2 entries");
  const Observable phi = Observable::parse(r.cfg.text("bowen.observable", "y"), 2);
  const double eps = r.cfg.real("bowen.epsilon", r.cfg.real("noise.epsilon", 0.02));
  const GridSpec grid = r.grid("100,200");

  PerturbationStream det_stream(r.seed, 0);
  const auto det = running_averages(r.fam, r.space(0.0), x0, det_stream, phi, cps);
  const auto noisy_space = r.space(eps);
  PerturbationStream noisy_stream(r.seed, 1);
  const auto noisy = running_averages(r.fam, noisy_space, x0, noisy_stream, phi, cps);
  const double det_osc = max_pairwise_spread(det);
  const double noisy_tail = std::abs(noisy[noisy.size() - 1] - noisy[noisy.size() - 2]);

  const auto P = build_transition(r.fam, grid, noisy_space, r.ulam());
  const auto ds = closed_recurrent_classes(P, r.theta());
  const auto sv = solve_classes(r, P, ds);
  std::vector<double> weights(grid.total(), 0.0);
  for (const auto& v : sv)
    for (std::size_t c = 0; c < grid.total(); ++c) weights[c] += v.weights[c] / static_cast<double>(sv.size());
  const double radius = r.cfg.real("bowen.radius", 0.05);
  const auto ref = eye.separatrix_samples(r.cfg.positive("bowen.separatrix_samples", 2000));
  const double coverage = support_coverage(r.fam.box(), grid, weights, ref, radius);

  r.check("deterministic_oscillation", det_osc >= r.cfg.real("assert.min_oscillation", 0.05));
  r.check("noisy_convergence", noisy_tail <= r.cfg.real("assert.max_noisy_oscillation", 0.01));
  r.check("single_domain", ds.size() == 1);
  r.check("separatrix_coverage", coverage >= r.cfg.real("assert.min_coverage", 0.95));
  r.write("bowen_stationary.csv", measure_csv(EmpiricalMeasure{grid, weights, 0}, r.header));
  r.write_json("bowen.json", {{"header", r.header},
                              {"x0", point_json(x0)},
                              {"checkpoints", cps},
                              {"deterministic_averages", det},
                              {"deterministic_oscillation", det_osc},
                              {"epsilon", eps},
                              {"noisy_averages", noisy},
                              {"noisy_tail_oscillation", noisy_tail},
                              {"domains", domain_summary(ds)},
                              {"separatrix_radius", radius},
                              {"separatrix_coverage", coverage}});
  r.say("bowen: deterministic oscillation " + format_real(det_osc) + ", noisy " + format_real(noisy_tail) +
        ", domains " + std::to_string(ds.size()) + ", coverage " + format_real(coverage));
}

void cmd_sinkcheck(Run& r) {
  std::vector<Region> us;
  for (const auto& item : split(r.cfg.text("sinkcheck.neighborhoods"), ';'))
    if (!item.empty()) us.push_back(parse_region(item, r.fam.state_dim()));
  const auto eps = r.cfg.reals("sinkcheck.epsilons", {0.01, 0.02, 0.04});
  SinkOptions so;
  so.seed = r.seed;
  so.threads = r.opt.threads;
  so.lyapunov_steps = r.cfg.positive("sinkcheck.lyapunov_steps", so.lyapunov_steps);
  so.ratio_tolerance = r.cfg.real("sinkcheck.ratio_tolerance", so.ratio_tolerance);
  const auto rep = verify_sink_perturbation(r.fam, us, eps, r.cfg.positive("sinkcheck.trials", 32),
                                            r.cfg.positive("sinkcheck.horizon", 2000), so);
  r.check("condition1", rep.condition1);
  r.check("condition2", rep.condition2);
  r.check("condition3", rep.condition3);
  if (r.cfg.has("assert.min_beta")) r.check("min_beta", rep.beta_hat >= r.cfg.real("assert.min_beta"));
  if (r.cfg.has("assert.max_diameter_ratio")) {
    bool ok = true;
    for (double q : rep.diameter_over_epsilon) ok = ok && q <= r.cfg.real("assert.max_diameter_ratio");
    r.check("max_diameter_ratio", ok);
  }
  r.write_json("sinkcheck.json", {{"header", r.header},
                                  {"period", rep.period},
                                  {"condition1", rep.condition1},
                                  {"invariance_margin", rep.invariance_margin},
                                  {"condition2", rep.condition2},
                                  {"lyapunov_max", rep.lyapunov_max},
                                  {"beta_hat", rep.beta_hat},
                                  {"condition3", rep.condition3},
                                  {"epsilons", rep.epsilons},
                                  {"diameters", rep.diameters},
                                  {"diameter_over_epsilon", rep.diameter_over_epsilon}});
  r.say(std::string("sinkcheck: ") + (rep.passed() ? "all conditions pass" : "some condition fails"));
}

void cmd_sweep(Run& r) {
  const GridSpec grid = r.grid();
  const auto eps = r.cfg.reals("sweep.epsilons");
  json rows = json::array();
  std::string csv = "# " + r.header + "\nepsilon,count\n";
  std::vector<std::size_t> counts;
  for (double e : eps) {
    const auto P = build_transition(r.fam, grid, r.space(e), r.ulam());
    const auto ds = closed_recurrent_classes(P, r.theta());
    counts.push_back(ds.size());
    std::vector<std::size_t> periods;
    std::vector<double> volumes;
    for (const auto& d : ds) {
      periods.push_back(d.period);
      volumes.push_back(d.volume);
    }
    rows.push_back({{"epsilon", e}, {"count", ds.size()}, {"periods", periods}, {"volumes", volumes}});
    csv += format_real(e) + "," + std::to_string(ds.size()) + "\n";
  }
  r.check("non_increasing", std::is_sorted(counts.rbegin(), counts.rend()));
  if (r.cfg.has("assert.first_count") && !counts.empty())
    r.check("first_count", counts.front() == r.cfg.uint("assert.first_count", 0));
  if (r.cfg.has("assert.last_count") && !counts.empty())
    r.check("last_count", counts.back() == r.cfg.uint("assert.last_count", 0));
  r.write("sweep.csv", csv);
  r.write_json("sweep.json", {{"header", r.header}, {"rows", rows}});
  std::string line;
  for (std::size_t c : counts) line += (line.empty() ? "" : " ") + std::to_string(c);
  r.say("sweep: counts " + line);
}

}  // namespace

int run_subcommand(const std::string& name, const Config& config, const RunOptions& options) {
  try {
    Run r(name, config, options);
    if (name == "orbit") cmd_orbit(r);
    else if (name == "ulam") cmd_ulam(r);
    else if (name == "domains") cmd_domains(r);
    else if (name == "stationary") cmd_stationary(r);
    else if (name == "basins") cmd_basins(r);
    else if (name == "hypA") cmd_hypA(r);
    else if (name == "hypB") cmd_hypB(r);
    else if (name == "bowen") cmd_bowen(r);
    else if (name == "sinkcheck") cmd_sinkcheck(r);
    else if (name == "sweep") cmd_sweep(r);
    else throw ConfigError("unknown subcommand '" + name + "'");
    if (options.assert_thresholds && !r.all_passed()) {
      std::cerr << "rdlab " << name << ": threshold check failed: " << r.checks.dump() << '\n';
      return kAssertFailed;
    }
    return kOk;
  } catch (const NumericalError& e) {
    std::cerr << "rdlab " << name << ": numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {  // includes ConfigError
    std::cerr << "rdlab " << name << ": configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::out_of_range& e) {
    std::cerr << "rdlab " << name << ": configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::logic_error& e) {
    std::cerr << "rdlab " << name << ": configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "rdlab " << name << ": output error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "rdlab " << name << ": numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace rdlab::cli
