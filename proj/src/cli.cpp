#include "stripbem/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

#include "stripbem/error.hpp"
#include "stripbem/problems.hpp"

namespace stripbem {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view v, std::string_view key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool parse_switch(std::string_view v, std::string_view key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("expected on/off for " + std::string(key) + ", got '" + std::string(v) + "'");
}

std::string_view on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

void RunConfig::validate() const {
  parse_example_id(example);
  options.validate();
  if (output.empty()) throw ConfigError("output directory must not be empty");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  using Setter = std::function<void(std::string_view, std::string_view)>;
  const std::map<std::string_view, Setter> setters = {
      {"example", [&](auto v, auto) { cfg.example = std::string(v); }},
      {"p", [&](auto v, auto k) { cfg.options.p = parse_number<int>(v, k); }},
      {"q", [&](auto v, auto k) { cfg.options.q = parse_number<int>(v, k); }},
      {"k", [&](auto v, auto k) { cfg.options.k = parse_number<int>(v, k); }},
      {"strategy",
       [&](auto v, auto) {
         if (v == "doerfler")
           cfg.options.marking.strategy = MarkingStrategy::doerfler;
         else if (v == "maximum")
           cfg.options.marking.strategy = MarkingStrategy::maximum;
         else
           throw ConfigError("strategy must be doerfler or maximum, got '" + std::string(v) + "'");
       }},
      {"theta", [&](auto v, auto k) { cfg.options.marking.theta = parse_number<double>(v, k); }},
      {"c", [&](auto v, auto k) { cfg.options.marking.c = parse_number<double>(v, k); }},
      {"budget_ngamma", [&](auto v, auto k) { cfg.options.budget_ngamma = parse_number<std::size_t>(v, k); }},
      {"max_steps", [&](auto v, auto k) { cfg.options.max_steps = parse_number<std::size_t>(v, k); }},
      {"tau", [&](auto v, auto k) { cfg.options.tau = parse_switch(v, k); }},
      {"surrogate", [&](auto v, auto k) { cfg.options.surrogate = parse_switch(v, k); }},
      {"tau_mesh",
       [&](auto v, auto) {
         if (v == "strip")
           cfg.options.tau_mesh = TauMesh::strip;
         else if (v == "refined")
           cfg.options.tau_mesh = TauMesh::refined_strip;
         else
           throw ConfigError("tau_mesh must be strip or refined, got '" + std::string(v) + "'");
       }},
      {"output", [&](auto v, auto) { cfg.output = std::string(v); }},
      {"seed", [&](auto v, auto k) { cfg.seed = parse_number<std::uint64_t>(v, k); }},
      {"timings", [&](auto v, auto k) { cfg.timings = parse_switch(v, k); }},
      {"mesh_steps",
       [&](auto v, auto k) {
         cfg.mesh_steps.clear();
         while (!v.empty()) {
           const auto comma = v.find(',');
           const auto item = trim(v.substr(0, comma));
           if (!item.empty()) cfg.mesh_steps.push_back(parse_number<std::size_t>(item, k));
           v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
         }
         std::sort(cfg.mesh_steps.begin(), cfg.mesh_steps.end());
         cfg.mesh_steps.erase(std::unique(cfg.mesh_steps.begin(), cfg.mesh_steps.end()), cfg.mesh_steps.end());
       }},
  };

  std::map<std::string, int> seen;
  int lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (auto [pos, fresh] = seen.emplace(std::string(key), lineno); !fresh)
      throw ConfigError(where + "duplicate key '" + std::string(key) + "' (first on line " +
                        std::to_string(pos->second) + ")");
    if (value.empty() && key != "mesh_steps") throw ConfigError(where + "empty value for '" + std::string(key) + "'");
    try {
      it->second(value, key);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_config(const RunConfig& cfg) {
  const auto& o = cfg.options;
  std::ostringstream out;
  out << "example = " << cfg.example << "\n"
      << "p = " << o.p << "\nq = " << o.q << "\nk = " << o.k << "\n"
      << "strategy = " << (o.marking.strategy == MarkingStrategy::doerfler ? "doerfler" : "maximum") << "\n"
      << "theta = " << format_double(o.marking.theta) << "\n"
      << "c = " << format_double(o.marking.c) << "\n"
      << "budget_ngamma = " << o.budget_ngamma << "\n"
      << "max_steps = " << o.max_steps << "\n"
      << "tau = " << on_off(o.tau) << "\n"
      << "surrogate = " << on_off(o.surrogate) << "\n"
      << "tau_mesh = " << (o.tau_mesh == TauMesh::strip ? "strip" : "refined") << "\n"
      << "output = " << cfg.output.string() << "\n"
      << "seed = " << cfg.seed << "\n"
      << "timings = " << on_off(cfg.timings) << "\n"
      << "mesh_steps = ";
  for (std::size_t i = 0; i < cfg.mesh_steps.size(); ++i) out << (i ? "," : "") << cfg.mesh_steps[i];
  out << "\n";
  return out.str();
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw NumericalError("cannot format double");
  return std::string(buf, ptr);
}

std::string format_csv(std::span<const StepReport> reports, bool timings) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    const auto t = [&](double s) { return format_double(timings ? s : 0.0); };
    out += std::to_string(r.ell) + ',' + std::to_string(r.n_gamma) + ',' + std::to_string(r.n_omega) + ',' +
           std::to_string(r.n_mesh) + ',' + format_double(r.eta) + ',' + format_double(r.osc) + ',' +
           format_double(r.tau) + ',' + format_double(r.err_surrogate) + ',' + std::to_string(r.n_marked) + ',' +
           t(r.t_bem_s) + ',' + t(r.t_fem_s) + ',' + t(r.t_mixed_s) + '\n';
  }
  return out;
}

std::vector<StepReport> parse_csv(std::string_view text) {
  std::vector<StepReport> out;
  bool header = true;
  int lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw ConfigError("csv: unexpected header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    while (true) {
      const auto c = line.find(',');
      f.push_back(line.substr(0, c));
      if (c == std::string_view::npos) break;
      line = line.substr(c + 1);
    }
    const auto where = "csv line " + std::to_string(lineno);
    if (f.size() != 12) throw ConfigError(where + ": expected 12 fields");
    StepReport r;
    r.ell = parse_number<std::size_t>(f[0], where);
    r.n_gamma = parse_number<std::size_t>(f[1], where);
    r.n_omega = parse_number<std::size_t>(f[2], where);
    r.n_mesh = parse_number<std::size_t>(f[3], where);
    r.eta = parse_number<double>(f[4], where);
    r.osc = parse_number<double>(f[5], where);
    r.tau = parse_number<double>(f[6], where);
    r.err_surrogate = parse_number<double>(f[7], where);
    r.n_marked = parse_number<std::size_t>(f[8], where);
    r.t_bem_s = parse_number<double>(f[9], where);
    r.t_fem_s = parse_number<double>(f[10], where);
    r.t_mixed_s = parse_number<double>(f[11], where);
    out.push_back(r);
  }
  if (header) throw ConfigError("csv: missing header");
  return out;
}

std::string plot_script(std::span<const StepReport> reports, int p, std::string_view csv_name) {
  const double rate = p + 1.5;
  std::ostringstream g;
  g << "# gnuplot -c plot.gp   (run inside the output directory)\n"
    << "set datafile separator ','\n"
    << "set terminal svg size 900,650 dynamic\n"
    << "set logscale xy\n"
    << "set format y '10^{%L}'\n"
    << "set xlabel '#boundary segments'\n"
    << "set key outside right\n"
    << "set grid\n"
    << "file = '" << csv_name << "'\n";

  // slope triangle under the last decade of eta + osc
  if (!reports.empty() && reports.back().n_gamma > 0 && reports.back().eta + reports.back().osc > 0.0) {
    const auto& last = reports.back();
    const double x1 = static_cast<double>(last.n_gamma);
    const double x0 = x1 / std::sqrt(10.0);
    const double y0 = 0.3 * (last.eta + last.osc) * std::pow(x1 / x0, rate);
    const double y1 = y0 * std::pow(x0 / x1, rate);
    g << "set object 1 polygon from " << format_double(x0) << ',' << format_double(y0) << " to "
      << format_double(x1) << ',' << format_double(y1) << " to " << format_double(x0) << ','
      << format_double(y1) << " to " << format_double(x0) << ',' << format_double(y0)
      << " fillstyle empty border lc rgb 'black'\n"
      << "set label 1 '" << (p == 0 ? "3/2" : "5/2") << "' at " << format_double(x0 / 1.25) << ','
      << format_double(std::sqrt(y0 * y1)) << " right\n";
  }

  // columns: 2 n_gamma, 5 eta, 6 osc, 7 tau, 8 err_surrogate
  g << "set output 'rates.svg'\n"
    << "set title 'estimators and error (p = " << p << ")'\n"
    << "plot file skip 1 using 2:5 with linespoints title 'eta', \\\n"
    << "     file skip 1 using 2:6 with linespoints title 'osc', \\\n"
    << "     file skip 1 using 2:($5 + $6) with linespoints title 'eta + osc', \\\n"
    << "     file skip 1 using 2:($7 > 0 ? $7 : NaN) with linespoints title 'tau', \\\n"
    << "     file skip 1 using 2:($8 > 0 ? $8 : NaN) with linespoints title 'error surrogate'\n"
    << "unset object 1\n"
    << "unset label 1\n"
    << "set output 'ratios.svg'\n"
    << "set title 'reliability'\n"
    << "unset logscale y\n"
    << "set format y '%g'\n"
    << "plot file skip 1 using 2:($5 > 0 ? $8 / $5 : NaN) with linespoints title 'err / eta', \\\n"
    << "     file skip 1 using 2:($8 > 0 ? $7 / $8 : NaN) with linespoints title 'tau / err'\n"
    << "set output\n";
  return g.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
}

}  // namespace

void emit_report(std::span<const StepReport> reports, const std::filesystem::path& dir, int p, bool timings) {
  make_dir(dir);
  write_file(dir / "steps.csv", format_csv(reports, timings));
  write_file(dir / "plot.gp", plot_script(reports, p));
}

void write_step_mesh(std::ostream& out, const StepState& state) {
  write_mesh(out, state.mesh);
  out << "strip " << state.strip.elements.size() << "\n";
  for (auto t : state.strip.elements) out << t << "\n";
  out << "marked " << state.marked.size() << "\n";
  for (auto t : state.marked) out << t << "\n";
}

RunOutcome run(const RunConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const auto problem = build_example(cfg.example);
  make_dir(cfg.output);
  const auto mesh_dir = cfg.output / "meshes";
  if (!cfg.mesh_steps.empty()) make_dir(mesh_dir);

  RunOutcome outcome;
  outcome.result = run_adaptive(problem, cfg.options, [&](const StepState& st) {
    const auto& r = st.report;
    if (progress)
      *progress << "step " << r.ell << "  #gamma " << r.n_gamma << "  #omega " << r.n_omega << "  #mesh " << r.n_mesh
                << "  eta " << r.eta << "  osc " << r.osc << "  tau " << r.tau << "  err " << r.err_surrogate
                << std::endl;
    if (std::binary_search(cfg.mesh_steps.begin(), cfg.mesh_steps.end(), r.ell)) {
      std::ostringstream m;
      write_step_mesh(m, st);
      write_file(mesh_dir / ("mesh_" + std::to_string(r.ell) + ".txt"), m.str());
    }
  });
  write_file(cfg.output / "config.txt", format_config(cfg));
  if (!outcome.result.steps.empty()) emit_report(outcome.result.steps, cfg.output, cfg.options.p, cfg.timings);

  if (outcome.result.failure) {
    try {
      std::rethrow_exception(outcome.result.failure);
    } catch (const IoError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      outcome.exit_code = 3;
      outcome.message = e.what();
    }
  }
  return outcome;
}

void dump_mesh(const RunConfig& cfg, std::size_t step, std::ostream& out) {
  cfg.validate();
  const auto problem = build_example(cfg.example);
  auto options = cfg.options;
  options.max_steps = std::min(options.max_steps, step + 1);
  options.tau = false;
  options.surrogate = false;
  bool written = false;
  const auto res = run_adaptive(problem, options, [&](const StepState& st) {
    if (st.report.ell == step) {
      write_step_mesh(out, st);
      written = true;
    }
  });
  if (res.failure) std::rethrow_exception(res.failure);
  if (!written)
    throw ConfigError("run stops after step " + std::to_string(res.steps.empty() ? 0 : res.steps.back().ell) +
                      ", before step " + std::to_string(step));
}

}  // namespace stripbem
