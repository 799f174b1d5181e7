#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>

#include "stripbem/cli.hpp"
#include "stripbem/problems.hpp"

using namespace stripbem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stripbem_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "# Example 1\n"
      "example = zshape-singular\n"
      "p=1\n"
      "  q = 2   # trailing comment\n"
      "k = 5\n"
      "strategy = maximum\n"
      "c = 2\n"
      "theta = 0.25\n"
      "budget_ngamma = 1500\n"
      "max_steps = 17\n"
      "tau = off\n"
      "surrogate = on\n"
      "tau_mesh = refined\n"
      "output = runs/x\n"
      "seed = 42\n"
      "timings = on\n"
      "mesh_steps = 4, 0,4 ,9\n");
  CHECK(cfg.example == "zshape-singular");
  CHECK(cfg.options.p == 1);
  CHECK(cfg.options.q == 2);
  CHECK(cfg.options.k == 5);
  CHECK(cfg.options.marking.strategy == MarkingStrategy::maximum);
  CHECK(cfg.options.marking.c == 2.0);
  CHECK(cfg.options.marking.theta == 0.25);
  CHECK(cfg.options.budget_ngamma == 1500);
  CHECK(cfg.options.max_steps == 17);
  CHECK(!cfg.options.tau);
  CHECK(cfg.options.surrogate);
  CHECK(cfg.options.tau_mesh == TauMesh::refined_strip);
  CHECK(cfg.output == fs::path("runs/x"));
  CHECK(cfg.seed == 42);
  CHECK(cfg.timings);
  CHECK(cfg.mesh_steps == std::vector<std::size_t>{0, 4, 9});

  const auto again = parse_config(format_config(cfg));
  CHECK(format_config(again) == format_config(cfg));

  const auto defaults = parse_config("");
  CHECK(defaults.example == "square-smooth");
  CHECK(defaults.options.p == 0);
  CHECK(defaults.options.q == 1);
  CHECK(defaults.options.k == 3);
  CHECK(defaults.options.marking.strategy == MarkingStrategy::doerfler);
  CHECK(defaults.options.marking.theta == 0.5);
  CHECK(defaults.options.budget_ngamma == 3000);
  CHECK(defaults.options.tau);
  CHECK(defaults.options.surrogate);
  CHECK(!defaults.timings);
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(parse_config("p = 0\nfoo = 1\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("p = 0\np = 1\n"), doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("just words\n"), doctest::Contains("key = value"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = zero\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("q = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("k = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("k = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("theta = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("theta = 0.5x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("strategy = maximum\nc = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("strategy = greedy\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("tau = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("tau_mesh = fine\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example = circle\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mesh_steps = 1,x\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/stripbem.cfg"), ConfigError);
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> expo(-300.0, 300.0);
  std::vector<StepReport> reps;
  for (std::size_t i = 0; i < 40; ++i) {
    StepReport r;
    r.ell = i;
    r.n_gamma = 64 + 7 * i;
    r.n_omega = 224 + 13 * i;
    r.n_mesh = 512 + 31 * i;
    r.eta = std::pow(10.0, expo(rng)) * 1.234567890123;
    r.osc = std::pow(10.0, expo(rng)) / 3.0;
    r.tau = i % 3 == 0 ? 0.0 : std::nextafter(0.1 * i, 1.0);
    r.err_surrogate = i == 5 ? std::numeric_limits<double>::denorm_min() : 1.0 / (i + 1);
    r.n_marked = i;
    r.t_bem_s = 0.1 * i;
    r.t_fem_s = 1e-7;
    r.t_mixed_s = 3.0;
    reps.push_back(r);
  }
  const auto text = format_csv(reps, true);
  CHECK(text.substr(0, text.find('\n')) == kCsvHeader);
  const auto back = parse_csv(text);
  REQUIRE(back.size() == reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    CHECK(back[i].ell == reps[i].ell);
    CHECK(back[i].n_gamma == reps[i].n_gamma);
    CHECK(back[i].n_omega == reps[i].n_omega);
    CHECK(back[i].n_mesh == reps[i].n_mesh);
    CHECK(back[i].eta == reps[i].eta);
    CHECK(back[i].osc == reps[i].osc);
    CHECK(back[i].tau == reps[i].tau);
    CHECK(back[i].err_surrogate == reps[i].err_surrogate);
    CHECK(back[i].n_marked == reps[i].n_marked);
    CHECK(back[i].t_bem_s == reps[i].t_bem_s);
    CHECK(back[i].t_fem_s == reps[i].t_fem_s);
    CHECK(back[i].t_mixed_s == reps[i].t_mixed_s);
  }
  CHECK(format_csv(back, true) == text);

  for (const auto& r : parse_csv(format_csv(reps, false))) {
    CHECK(r.t_bem_s == 0.0);
    CHECK(r.t_fem_s == 0.0);
    CHECK(r.t_mixed_s == 0.0);
  }

  CHECK_THROWS_AS(parse_csv(""), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n"), ConfigError);
  CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"), ConfigError);
}

TEST_CASE("single zero report") {
  const StepReport zero;
  const auto text = format_csv(std::span<const StepReport>(&zero, 1), false);
  CHECK(text == std::string(kCsvHeader) + "\n0,0,0,0,0,0,0,0,0,0,0,0\n");
}

TEST_CASE("plot script smoke test") {
  std::vector<StepReport> reps(3);
  for (std::size_t i = 0; i < 3; ++i) {
    reps[i].ell = i;
    reps[i].n_gamma = 64 << i;
    reps[i].eta = 1.0 / (i + 1);
    reps[i].osc = 0.5 / (i + 1);
  }
  for (int p : {0, 1}) {
    const auto g = plot_script(reps, p);
    CHECK(g.find("set datafile separator ','") != std::string::npos);
    CHECK(g.find("file = 'steps.csv'") != std::string::npos);
    CHECK(g.find("set logscale xy") != std::string::npos);
    CHECK(g.find("polygon") != std::string::npos);
    CHECK(g.find(p == 0 ? "'3/2'" : "'5/2'") != std::string::npos);
    // every column reference exists in the table
    const std::regex col(R"(\$(\d+)|using (\d+):(\d+))");
    int refs = 0;
    for (auto it = std::sregex_iterator(g.begin(), g.end(), col); it != std::sregex_iterator(); ++it) {
      for (int k = 1; k <= 3; ++k)
        if ((*it)[k].matched) {
          const int c = std::stoi((*it)[k]);
          CHECK(c >= 1);
          CHECK(c <= 12);
          ++refs;
        }
    }
    CHECK(refs > 10);
    // balanced quotes and parentheses on every line
    std::istringstream lines(g);
    for (std::string line; std::getline(lines, line);) {
      CHECK(std::count(line.begin(), line.end(), '\'') % 2 == 0);
      CHECK(std::count(line.begin(), line.end(), '(') == std::count(line.begin(), line.end(), ')'));
    }
  }
  CHECK(plot_script({}, 0).find("polygon") == std::string::npos);
}

TEST_CASE("run: budget at the initial size writes one row") {
  RunConfig cfg;
  cfg.options.budget_ngamma = 64;
  cfg.output = scratch("single");
  cfg.mesh_steps = {0};
  const auto out = run(cfg);
  CHECK(out.exit_code == 0);
  const auto rows = parse_csv(slurp(cfg.output / "steps.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n_gamma == 64);
  CHECK(rows[0].n_mesh == 512);
  CHECK(rows[0].n_marked == 0);
  CHECK(rows[0].t_bem_s == 0.0);
  CHECK(fs::exists(cfg.output / "plot.gp"));
  CHECK(parse_config(slurp(cfg.output / "config.txt")).options.budget_ngamma == 64);

  std::ifstream mesh_file(cfg.output / "meshes" / "mesh_0.txt");
  REQUIRE(mesh_file);
  const Mesh2D m = read_mesh(mesh_file);
  CHECK(m.num_triangles() == 512);
  std::string word;
  std::size_t n = 0;
  mesh_file >> word >> n;
  CHECK(word == "strip");
  CHECK(n == rows[0].n_omega);
  fs::remove_all(cfg.output);
}

TEST_CASE("run: identical configs give identical csv bytes") {
  RunConfig cfg = parse_config("example = zshape-singular\nbudget_ngamma = 180\ntau_mesh = refined\n");
  cfg.output = scratch("det_a");
  REQUIRE(run(cfg).exit_code == 0);
  const auto a = slurp(cfg.output / "steps.csv");
  fs::remove_all(cfg.output);
  cfg.output = scratch("det_b");
  REQUIRE(run(cfg).exit_code == 0);
  const auto b = slurp(cfg.output / "steps.csv");
  fs::remove_all(cfg.output);
  CHECK(a == b);
  CHECK(parse_csv(a).size() > 2);
}

TEST_CASE("run: unwritable output") {
  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "file"; }
  RunConfig cfg;
  cfg.options.budget_ngamma = 10;
  cfg.output = blocker / "sub";
  CHECK_THROWS_AS(run(cfg), IoError);
  CHECK_THROWS_AS(emit_report(std::vector<StepReport>(1), blocker / "sub", 0, false), IoError);
  fs::remove(blocker);
}

TEST_CASE("mesh dump") {
  RunConfig cfg;
  cfg.options.budget_ngamma = 100;
  std::ostringstream s0, s2;
  dump_mesh(cfg, 0, s0);
  dump_mesh(cfg, 2, s2);
  std::istringstream i0(s0.str()), i2(s2.str());
  const Mesh2D m0 = read_mesh(i0);
  const Mesh2D m2 = read_mesh(i2);
  CHECK(m0.num_triangles() == 512);
  CHECK(m2.num_triangles() > m0.num_triangles());
  CHECK_THROWS_AS(dump_mesh(cfg, 500, s0), ConfigError);
}
