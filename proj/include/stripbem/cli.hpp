#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stripbem/adapt.hpp"
#include "stripbem/error.hpp"

namespace stripbem {

/// Output directory cannot be created or written.
class IoError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string example = "square-smooth";
  AdaptiveOptions options;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;  // reserved
  bool timings = false;    // zero timing columns unless set
  std::vector<std::size_t> mesh_steps;

  void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment. Keys: example, p, q, k, strategy,
/// theta, c, budget_ngamma, max_steps, tau, surrogate, tau_mesh, output, seed,
/// timings, mesh_steps (comma separated). Throws ConfigError naming the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "ell,n_gamma,n_omega,n_mesh,eta,osc,tau,err_surrogate,n_marked,t_bem_s,t_fem_s,t_mixed_s";

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

std::string format_csv(std::span<const StepReport> reports, bool timings);
/// Throws ConfigError on a malformed table.
std::vector<StepReport> parse_csv(std::string_view text);

/// gnuplot script reading `csv_name` from its own directory: rates of eta, osc,
/// eta + osc, tau and the error surrogate against #boundary segments with
/// reference-slope triangles, and the ratios err/eta and tau/err.
std::string plot_script(std::span<const StepReport> reports, int p, std::string_view csv_name = "steps.csv");

/// Writes steps.csv and plot.gp into `dir`, creating it if needed. Throws IoError.
void emit_report(std::span<const StepReport> reports, const std::filesystem::path& dir, int p, bool timings);

/// write_mesh output followed by "strip <n>" and "marked <n>" lines of triangle ids.
void write_step_mesh(std::ostream& out, const StepState& state);

struct RunOutcome {
  AdaptiveResult result;
  int exit_code = 0;  // 0 done, 3 numerical failure
  std::string message;
};

/// Runs the adaptive loop for `cfg`, writes the report and the requested meshes
/// to cfg.output. Config problems throw ConfigError, file problems IoError.
RunOutcome run(const RunConfig& cfg, std::ostream* progress = nullptr);

/// Mesh, strip and marking of step `step` of the run described by `cfg`.
/// Throws ConfigError if the run stops before that step.
void dump_mesh(const RunConfig& cfg, std::size_t step, std::ostream& out);

}  // namespace stripbem
