// Command-line front end: table1, figure {2|3|4|5}, qpt, stirap.
//
// Exit status: 0 success, 1 validation error, 2 tolerance breach,
// 3 numerical failure.

#include "rydcz/report.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit : int { ok = 0, invalid = 1, tolerance_breach = 2, numerical = 3 };

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rydcz::validation_error({"cannot write output file '" + path + "'"});
  out << text;
}

std::string render(const rydcz::json& j) { return j.dump(2) + "\n"; }

rydcz::OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return rydcz::OutputFormat::csv;
  if (s == "json") return rydcz::OutputFormat::json;
  throw rydcz::validation_error({"--format: expected csv or json, got '" + s + "'"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circular-Rydberg blockade CZ gate: tables, figures, tomography and STIRAP ladder"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, preset, out_path, format, preset_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "INI run configuration");
  app.add_option("--preset", preset, "named preset from the preset directory");
  app.add_option("--preset-dir", preset_dir, "directory holding <preset>.ini files");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", format, "csv or json");
  app.add_option("--seed", seed, "seed for the finite-shot sampling mode");

  auto* table1 = app.add_subcommand("table1", "Table 1 with reference values, computed values and deviations");

  auto* figure = app.add_subcommand("figure", "figure series as CSV");
  int which = 0;
  std::optional<double> grid_start, grid_stop;
  std::optional<int> grid_points;
  figure->add_option("which", which, "2, 3, 4 or 5")->required();
  figure->add_option("--start", grid_start, "first abscissa (R in um, or n for figure 3)");
  figure->add_option("--stop", grid_stop, "last abscissa");
  figure->add_option("--points", grid_points, "number of grid points");

  auto* qpt = app.add_subcommand("qpt", "simulated process tomography for one configuration");

  auto* stirap = app.add_subcommand("stirap", "STIRAP ladder into a circular state");
  int n_final = 112;
  stirap->add_option("--n-final", n_final, "principal quantum number of the final circular state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }

  try {
    if (!preset_dir.empty()) setenv("RYDCZ_PRESET_DIR", preset_dir.c_str(), 1);
    rydcz::RunConfig config;
    if (!preset.empty()) config = rydcz::load_preset(preset);
    if (!config_path.empty()) config = rydcz::load_config(config_path, config);
    if (seed) config.seed = *seed;
    if (out_path.empty()) out_path = config.output_path;

    if (*table1) {
      const auto fmt = format.empty() ? rydcz::OutputFormat::csv : parse_format(format);
      const auto report = rydcz::cmd_table1();
      emit(fmt == rydcz::OutputFormat::csv ? rydcz::to_csv(report) : render(rydcz::to_json(report)), out_path);
      if (!report.converged()) return numerical;
      return report.all_within_tolerance() ? ok : tolerance_breach;
    }
    if (*figure) {
      if (!format.empty() && format != "csv") throw rydcz::validation_error({"figure: only csv output is supported"});
      auto grid = rydcz::default_figure_grid(which);
      if (grid_start) grid.start = *grid_start;
      if (grid_stop) grid.stop = *grid_stop;
      if (grid_points) grid.points = *grid_points;
      emit(rydcz::cmd_figure(which, grid), out_path);
      return ok;
    }
    if (*qpt) {
      const auto fmt = format.empty() ? config.format : parse_format(format);
      const auto report = rydcz::cmd_qpt(config);
      emit(fmt == rydcz::OutputFormat::csv ? rydcz::to_csv(report) : render(rydcz::to_json(report)), out_path);
      return report.result.converged ? ok : numerical;
    }
    if (*stirap) {
      const auto fmt = format.empty() ? rydcz::OutputFormat::csv : parse_format(format);
      const auto report = rydcz::cmd_stirap(n_final);
      emit(fmt == rydcz::OutputFormat::csv ? rydcz::to_csv(report) : render(rydcz::to_json(report)), out_path);
      return ok;
    }
  } catch (const rydcz::validation_error& e) {
    std::cerr << e.what() << "\n";
    return invalid;
  } catch (const rydcz::not_psd_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numerical;
  }
  return invalid;
}
