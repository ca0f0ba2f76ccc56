#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rdlab/cli.hpp"
#include "rdlab/errors.hpp"

using namespace rdlab;
using namespace rdlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rdlab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

RunOptions quiet_in(const fs::path& dir, unsigned threads = 1, bool assert_thresholds = false) {
  RunOptions o;
  o.out_dir = dir;
  o.threads = threads;
  o.quiet = true;
  o.assert_thresholds = assert_thresholds;
  return o;
}

Config double_sink() {
  return Config::from_text(
      "family.name = double-sink\nfamily.c = 0.5\ngrid.cells = 256\nnoise.epsilon = 0.05\nrun.seed = 3\n"
      "ulam.points_per_cell = 8\nulam.samples_per_point = 8\n");
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = Config::from_text("# comment\n a.b = 1.5 \n\nc.d=x,y\na.b = 2\nlist = 1, 2,3e1\n");
  CHECK(c.real("a.b") == 2.0);
  CHECK(c.text("c.d") == "x,y");
  CHECK(c.reals("list") == std::vector<double>{1.0, 2.0, 30.0});
  CHECK(c.real("missing", 7.0) == 7.0);
  CHECK(c.uint("missing", 4) == 4);
  CHECK_THROWS_AS((void)c.real("missing"), ConfigError);
  CHECK_THROWS_AS((void)c.real("c.d"), ConfigError);
  CHECK_THROWS_AS(Config::from_text("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::from_text(" = 3\n"), ConfigError);
  Config z;
  z.assign("n=0");
  CHECK(z.uint("n", 5) == 0);
  CHECK_THROWS_AS((void)z.positive("n", 5), ConfigError);
  z.assign("m=1e6");
  CHECK(z.uint("m", 0) == 1000000);
  CHECK_THROWS_AS(z.assign("broken"), ConfigError);
}

TEST_CASE("config hash is order independent and value sensitive") {
  const auto a = Config::from_text("x=1\ny=2\n");
  const auto b = Config::from_text("y=2\nx=1\n");
  const auto c = Config::from_text("x=1\ny=3\n");
  CHECK(a.canonical() == "x=1\ny=2\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  const std::string h = header_line("orbit", a);
  CHECK(h.rfind("rdlab orbit config_hash=", 0) == 0);
  CHECK(h.size() == std::string("rdlab orbit config_hash=").size() + 16 + std::string(" seed=1").size());
  CHECK(h.substr(h.size() - 7) == " seed=1");
}

TEST_CASE("family and grid from config") {
  auto c = double_sink();
  const auto fam = family_from(c);
  CHECK(fam.name() == "double-sink");
  CHECK(grid_from(c, fam.box()).total() == 256);
  auto t = Config::from_text("family.name=torus-additive\nfamily.dim=2\nfamily.base=cat\ngrid.cells=16\n");
  const auto tf = family_from(t);
  CHECK(grid_from(t, tf.box()).total() == 256);
  t.set("grid.cells", "4,8");
  CHECK(grid_from(t, tf.box()).total() == 32);
  t.set("grid.cells", "4,8,2");
  CHECK_THROWS_AS((void)grid_from(t, tf.box()), ConfigError);
  CHECK_THROWS_AS((void)family_from(Config::from_text("family.name=nope\n")), ConfigError);
}

TEST_CASE("output directory resolution") {
  RunOptions o;
  o.out_dir = "/tmp/explicit";
  CHECK(resolve_out_dir(o) == fs::path("/tmp/explicit"));
  o.out_dir.clear();
  ::setenv("RDLAB_OUT", "/tmp/from_env", 1);
  CHECK(resolve_out_dir(o) == fs::path("/tmp/from_env"));
  ::unsetenv("RDLAB_OUT");
  CHECK(resolve_out_dir(o) == fs::path("rdlab_out"));
}

TEST_CASE("orbit with zero steps is the initial point") {
  const auto dir = scratch("orbit0");
  const auto c = Config::from_text("family.name=logistic-noise\nnoise.epsilon=0.01\norbit.x0=0.3\norbit.steps=0\n");
  REQUIRE(run_subcommand("orbit", c, quiet_in(dir)) == kOk);
  CHECK(slurp(dir / "orbit.csv") == "# " + header_line("orbit", c) + "\nstep,x0\n0,0.29999999999999999\n");
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto c = double_sink();
  CHECK(run_subcommand("nope", c, quiet_in(dir)) == kConfigError);
  auto bad = c;
  bad.set("noise.epsilon", "abc");
  CHECK(run_subcommand("domains", bad, quiet_in(dir)) == kConfigError);
  auto far = c;
  far.set("noise.epsilon", "5");
  CHECK(run_subcommand("domains", far, quiet_in(dir)) == kConfigError);
  auto slow = c;
  slow.set("stationary.max_iterations", "1");
  CHECK(run_subcommand("ulam", slow, quiet_in(dir)) == kNumericalError);
  auto wrong = c;
  wrong.set("assert.count", "5");
  CHECK(run_subcommand("domains", wrong, quiet_in(dir)) == kOk);
  CHECK(run_subcommand("domains", wrong, quiet_in(dir, 1, true)) == kAssertFailed);
  auto right = c;
  right.set("assert.count", "2");
  right.set("assert.periods", "1,1");
  CHECK(run_subcommand("domains", right, quiet_in(dir, 1, true)) == kOk);
}

TEST_CASE("domains on the double sink") {
  const auto dir = scratch("domains");
  REQUIRE(run_subcommand("domains", double_sink(), quiet_in(dir)) == kOk);
  const auto doc = nlohmann::json::parse(slurp(dir / "domains.json"));
  CHECK(doc["count"] == 2);
  CHECK(doc["periods"] == nlohmann::json::array({1, 1}));
  CHECK(doc["pairwise_disjoint"] == true);
  CHECK(doc["header"] == header_line("domains", double_sink()));
}

TEST_CASE("outputs are identical across thread counts") {
  auto c = double_sink();
  c.set("basins.points", "0.8;0;-0.3");
  c.set("basins.trials", "500");
  c.set("basins.horizon", "300");
  c.set("basins.delta", "0.01");
  c.set("stationary.x0", "0.5");
  c.set("stationary.orbits", "20");
  c.set("stationary.steps", "2000");
  for (const std::string cmd : {"domains", "basins", "ulam", "stationary"}) {
    CAPTURE(cmd);
    const auto d1 = scratch(cmd + "_1"), d4 = scratch(cmd + "_4");
    REQUIRE(run_subcommand(cmd, c, quiet_in(d1, 1)) == kOk);
    REQUIRE(run_subcommand(cmd, c, quiet_in(d4, 4)) == kOk);
    for (const auto& entry : fs::directory_iterator(d1)) {
      const auto name = entry.path().filename();
      CAPTURE(name.string());
      const std::string a = slurp(entry.path());
      CHECK(a == slurp(d4 / name));
      // Every artifact carries the header with hash and seed.
      CHECK(a.find(header_line(cmd, c)) != std::string::npos);
    }
  }
}

TEST_CASE("sweep reports non-increasing counts on the triple sink") {
  const auto dir = scratch("sweep");
  const auto c = Config::from_text(
      "family.name=triple-sink\ngrid.cells=256\nulam.points_per_cell=16\nulam.samples_per_point=16\n"
      "sweep.epsilons=0.01,0.05,0.2,0.3\nassert.first_count=3\nassert.last_count=1\n");
  CHECK(run_subcommand("sweep", c, quiet_in(dir, 0, true)) == kOk);
  const auto doc = nlohmann::json::parse(slurp(dir / "sweep.json"));
  CHECK(doc["checks"]["non_increasing"] == true);
  CHECK(slurp(dir / "sweep.csv").find("epsilon,count\n0.01,3\n") != std::string::npos);
}
