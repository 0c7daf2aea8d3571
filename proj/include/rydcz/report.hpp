#pragma once

// Report builders behind the command-line verbs. Each returns plain data plus
// CSV (RFC 4180, CRLF line ends) and JSON renderings; nothing here touches
// files or the process exit status.

#include "rydcz/atomic.hpp"
#include "rydcz/blockade.hpp"
#include "rydcz/config.hpp"
#include "rydcz/error_model.hpp"
#include "rydcz/tomography.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace rydcz {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw std::invalid_argument("CsvWriter: row has the wrong number of fields");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
  }

  [[nodiscard]] std::string str() const { return out_.str(); }

  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char ch : field) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + '"';
  }

 private:
  std::size_t columns_;
  std::ostringstream out_;
};

/// Evaluate f over [0, count) on up to hardware_concurrency threads.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F f) {
  std::vector<T> out(count);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < count; i += workers) out[i] = f(i);
    }));
  for (auto& t : tasks) t.get();
  return out;
}

// ---------------------------------------------------------------------------
// JSON helpers

inline json complex_matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json optional_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------
// Table 1

struct Tolerance {
  enum class Kind { relative, factor } kind;
  double value;

  [[nodiscard]] bool accepts(double reference, double computed) const {
    if (kind == Kind::relative) return std::abs(computed - reference) <= value * std::abs(reference);
    if (!(reference > 0.0) || !(computed > 0.0)) return false;
    return std::max(computed / reference, reference / computed) <= value;
  }
  [[nodiscard]] std::string describe() const {
    return kind == Kind::relative ? format_number(100.0 * value) + "%" : "x" + format_number(value);
  }
};

struct Table1Cell {
  std::string quantity;
  std::string unit;
  std::optional<double> reference;
  double computed = 0.0;
  Tolerance tolerance;

  [[nodiscard]] std::optional<double> relative_deviation() const {
    if (!reference) return std::nullopt;
    return (computed - *reference) / *reference;
  }
  [[nodiscard]] bool pass() const { return !reference || tolerance.accepts(*reference, computed); }
};

struct Table1Column {
  std::string label;
  int n = 0;
  double temperature = 0.0;
  double separation = 0.0;
  std::vector<Table1Cell> cells;
  bool qpt_converged = true;
};

struct Table1Report {
  std::vector<Table1Column> columns;

  [[nodiscard]] bool all_within_tolerance() const {
    for (const auto& c : columns)
      for (const auto& cell : c.cells)
        if (!cell.pass()) return false;
    return true;
  }
  [[nodiscard]] bool converged() const {
    return std::all_of(columns.begin(), columns.end(), [](const auto& c) { return c.qpt_converged; });
  }
};

inline const std::vector<std::string>& table1_presets() {
  static const std::vector<std::string> names{"cs80-0K", "cs100-0K", "cs110-0K", "cs110-77K", "cs110-300K"};
  return names;
}

inline Table1Column table1_column(const RunConfig& config) {
  const auto gate = resolve_gate(config);
  const auto& p = gate.params;
  const QptResult qpt = run_full_qpt(p, qpt_options(config));
  const auto& ref = config.reference;
  using K = Tolerance::Kind;
  Table1Column col{config.name, config.n, config.temperature, config.separation, {}, qpt.converged};
  col.cells = {
      {"rabi_frequency", "MHz", ref.rabi_MHz, to_hz(p.omega) * 1e-6, {K::relative, 0.02}},
      {"blockade_shift", "GHz", ref.blockade_GHz, to_hz(p.blockade_B) * 1e-9, {K::relative, 0.02}},
      {"lifetime", "ms", ref.lifetime_ms, p.tau * 1e3, {K::relative, 0.03}},
      {"E_cb", "", ref.e_cb, qpt.min_error, {K::relative, 0.05}},
      {"trace_loss", "", ref.trace_loss, qpt.mean_trace_loss, {K::factor, 1.5}},
      {"E_O", "", ref.e_o, qpt.process_error, {K::factor, 1.5}},
  };
  return col;
}

inline Table1Report cmd_table1(const std::filesystem::path& preset_dir = preset_directory()) {
  std::vector<RunConfig> configs;
  for (const auto& name : table1_presets()) configs.push_back(load_preset(name, preset_dir));
  Table1Report report;
  report.columns = parallel_map<Table1Column>(configs.size(), [&](std::size_t i) { return table1_column(configs[i]); });
  return report;
}

inline std::string to_csv(const Table1Report& r) {
  CsvWriter w({"column", "n", "temperature_K", "separation_um", "quantity", "unit", "reference", "computed",
               "relative_deviation", "tolerance", "pass"});
  for (const auto& c : r.columns)
    for (const auto& cell : c.cells) {
      const auto dev = cell.relative_deviation();
      w.row({c.label, std::to_string(c.n), format_number(c.temperature), format_number(c.separation / micrometre),
             cell.quantity, cell.unit, cell.reference ? format_number(*cell.reference) : "", format_number(cell.computed),
             dev ? format_number(*dev) : "", cell.tolerance.describe(), cell.pass() ? "true" : "false"});
    }
  return w.str();
}

inline json to_json(const Table1Report& r) {
  json cols = json::array();
  for (const auto& c : r.columns) {
    json cells = json::array();
    for (const auto& cell : c.cells) {
      const auto dev = cell.relative_deviation();
      cells.push_back({{"quantity", cell.quantity},
                       {"unit", cell.unit},
                       {"reference", cell.reference ? json(*cell.reference) : json(nullptr)},
                       {"computed", cell.computed},
                       {"relative_deviation", dev ? json(*dev) : json(nullptr)},
                       {"tolerance", cell.tolerance.describe()},
                       {"pass", cell.pass()}});
    }
    cols.push_back({{"label", c.label},
                    {"n", c.n},
                    {"temperature_K", c.temperature},
                    {"separation_um", c.separation / micrometre},
                    {"qpt_converged", c.qpt_converged},
                    {"cells", std::move(cells)}});
  }
  return {{"report", "table1"}, {"all_within_tolerance", r.all_within_tolerance()}, {"columns", std::move(cols)}};
}

// ---------------------------------------------------------------------------
// Figures

struct Grid {
  double start;
  double stop;
  int points;

  void validate(const std::string& what) const {
    if (points < 2) throw validation_error({what + ": grid needs at least 2 points"});
    if (!(stop > start) || !std::isfinite(start) || !std::isfinite(stop))
      throw validation_error({what + ": grid must satisfy start < stop"});
  }
  [[nodiscard]] double at(int i) const { return start + (stop - start) * i / (points - 1); }
};

inline Grid default_figure_grid(int which) {
  if (which == 3) return {2.0, 150.0, 149};
  return {1.0, 10.0, 91};  // separation in micrometres
}

inline std::string cmd_figure(int which, const Grid& grid) {
  if (which < 2 || which > 5) throw validation_error({"figure: expected 2, 3, 4 or 5"});
  grid.validate("figure " + std::to_string(which));
  if (which == 3) {
    if (grid.start < 2.0 || std::floor(grid.start) != grid.start || std::floor(grid.stop) != grid.stop)
      throw validation_error({"figure 3: n grid must use integers >= 2"});
    const int n0 = static_cast<int>(grid.start), n1 = static_cast<int>(grid.stop);
    CsvWriter w({"n", "circular_lifetime_ms_0K", "circular_lifetime_ms_300K", "ns_lifetime_ms_0K", "ns_lifetime_ms_300K"});
    const auto rows = parallel_map<std::vector<std::string>>(static_cast<std::size_t>(n1 - n0 + 1), [&](std::size_t i) {
      const int n = n0 + static_cast<int>(i);
      return std::vector<std::string>{std::to_string(n), format_number(lifetime(n, 0.0) * 1e3),
                                      format_number(lifetime(n, 300.0) * 1e3), "", ""};
    });
    for (const auto& r : rows) w.row(r);
    return w.str();
  }
  if (grid.start <= 0.0) throw validation_error({"figure: separations must be positive"});

  std::vector<std::string> header{"R_um", "excluded"};
  std::vector<std::function<double(double)>> series;
  if (which == 2) {
    for (int n : {90, 100, 110}) {
      header.push_back("B_GHz_n" + std::to_string(n) + "_parallel");
      series.push_back([n](double r) { return to_hz(blockade_shift(n, r).blockade_shift) * 1e-9; });
    }
    header.push_back("B_GHz_n100_perpendicular");
    series.push_back([](double r) { return to_hz(blockade_shift_perpendicular(100, r)) * 1e-9; });
  } else {
    for (int n : {80, 100, 110}) {
      const double tau = lifetime_0K(n);
      if (which == 4) {
        header.push_back("E_min_n" + std::to_string(n));
        series.push_back([n, tau](double r) { return min_error(blockade_shift(n, r).blockade_shift, tau); });
      } else {
        header.push_back("rabi_MHz_n" + std::to_string(n));
        series.push_back([n, tau](double r) { return to_hz(optimal_rabi(blockade_shift(n, r).blockade_shift, tau)) * 1e-6; });
      }
    }
  }
  CsvWriter w(header);
  const auto rows = parallel_map<std::vector<std::string>>(static_cast<std::size_t>(grid.points), [&](std::size_t i) {
    const double r_um = grid.at(static_cast<int>(i));
    const double r = r_um * micrometre;
    std::vector<std::string> row{format_number(r_um), PairGeometry(r).inside_exclusion() ? "true" : "false"};
    for (const auto& s : series) row.push_back(format_number(s(r)));
    return row;
  });
  for (const auto& r : rows) w.row(r);
  return w.str();
}

// ---------------------------------------------------------------------------
// QPT

inline json config_json(const RunConfig& c) {
  return {{"name", c.name},
          {"species", c.species},
          {"n", c.n},
          {"temperature_K", c.temperature},
          {"separation_um", c.separation / micrometre},
          {"exclusion_radius_um", c.exclusion_radius / micrometre},
          {"orientation", c.orientation == Orientation::parallel ? "parallel" : "perpendicular"},
          {"likelihood", c.likelihood == Likelihood::least_squares ? "least_squares" : "cross_entropy"},
          {"sampling", c.sampling},
          {"shots", c.shots},
          {"seed", c.seed},
          {"frame_correction", c.frame_correction}};
}

struct QptReport {
  RunConfig config;
  ResolvedGate gate;
  QptResult result;
};

inline QptReport cmd_qpt(const RunConfig& config) {
  const auto gate = resolve_gate(config);
  return {config, gate, run_full_qpt(gate.params, qpt_options(config))};
}

inline json to_json(const QptReport& r) {
  const auto& p = r.gate.params;
  json labels = json::array();
  for (int m = 0; m < pauli_count; ++m) labels.push_back(pauli_label(m));
  json records = json::array();
  for (const auto& rec : r.result.records) {
    json probs = json::object();
    for (int s = 0; s < setting_count; ++s)
      probs[setting_label(s)] = json(std::vector<double>(rec.probabilities[s].begin(), rec.probabilities[s].end()));
    records.push_back({{"input", rec.label},
                       {"trace_loss", rec.trace_loss},
                       {"probabilities", std::move(probs)},
                       {"reconstruction",
                        {{"rho", complex_matrix_json(rec.reconstruction.rho.matrix())},
                         {"converged", rec.reconstruction.converged},
                         {"iterations", rec.reconstruction.iterations},
                         {"gradient_norm", rec.reconstruction.gradient_norm},
                         {"objective", rec.reconstruction.objective}}}});
  }
  const auto& chi = r.result.chi;
  return {{"report", "qpt"},
          {"config", config_json(r.config)},
          {"parameters",
           {{"rabi_MHz", to_hz(p.omega) * 1e-6},
            {"blockade_GHz", to_hz(p.blockade_B) * 1e-9},
            {"lifetime_ms", optional_number(p.tau * 1e3)},
            {"omega10_GHz", to_hz(p.omega_10) * 1e-9},
            {"gate_time_us", cz_sequence_duration(p.omega) * 1e6},
            {"inside_exclusion", r.gate.inside_exclusion}}},
          {"errors",
           {{"E_O", r.result.process_error},
            {"E_cb", r.result.min_error},
            {"E_1", r.result.intrinsic_error},
            {"mean_trace_loss", r.result.mean_trace_loss}}},
          {"converged", r.result.converged},
          {"chi",
           {{"basis", std::move(labels)},
            {"physical", complex_matrix_json(chi.physical.matrix())},
            {"raw", complex_matrix_json(chi.raw.matrix())},
            {"fit",
             {{"converged", chi.converged},
              {"iterations", chi.iterations},
              {"gradient_norm", chi.gradient_norm},
              {"tp_residual", chi.tp_residual},
              {"fit_residual", chi.fit_residual}}}}},
          {"records", std::move(records)}};
}

inline std::string to_csv(const QptReport& r) {
  CsvWriter w({"input", "trace_loss", "mle_converged", "mle_iterations", "mle_gradient_norm", "E_O", "E_cb", "mean_trace_loss"});
  for (const auto& rec : r.result.records)
    w.row({rec.label, format_number(rec.trace_loss), rec.reconstruction.converged ? "true" : "false",
           std::to_string(rec.reconstruction.iterations), format_number(rec.reconstruction.gradient_norm),
           format_number(r.result.process_error), format_number(r.result.min_error),
           format_number(r.result.mean_trace_loss)});
  return w.str();
}

// ---------------------------------------------------------------------------
// STIRAP ladder

struct StirapReport {
  StirapChain chain;
  double intermediate_population = 1e-4;
  double omega = to_rad_s(5e6);
  double intermediate_tau = 100e-6;
  double error_estimate = 0.0;

  [[nodiscard]] double max_link_hz() const {
    double m = 0.0;
    for (const auto& l : chain.links) m = std::max(m, l.frequency_hz);
    return m;
  }
  [[nodiscard]] double min_link_hz() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& l : chain.links) m = std::min(m, l.frequency_hz);
    return m;
  }
};

inline StirapReport cmd_stirap(int n_final = 112) {
  StirapReport r;
  r.chain = stirap_chain(n_final);
  r.error_estimate = stirap_intermediate_error(r.intermediate_population, r.omega, r.intermediate_tau);
  return r;
}

inline std::string state_label(const RydbergLevel& s) {
  return "|" + std::to_string(s.n) + "," + std::to_string(s.l) + "," + std::to_string(s.m) + ">";
}

inline std::string to_csv(const StirapReport& r) {
  CsvWriter w({"record", "psi_index", "n", "l", "m", "frequency_GHz", "value"});
  const auto& s = r.chain.states;
  for (std::size_t i = 0; i < s.size(); ++i)
    w.row({"state", std::to_string(r.chain.first_index + static_cast<int>(i)), std::to_string(s[i].n),
           std::to_string(s[i].l), std::to_string(s[i].m), "", ""});
  for (std::size_t i = 0; i < r.chain.links.size(); ++i)
    w.row({"link", std::to_string(r.chain.first_index + static_cast<int>(i)), "", "", "",
           format_number(r.chain.links[i].frequency_hz * 1e-9), ""});
  w.row({"max_link", "", "", "", "", format_number(r.max_link_hz() * 1e-9), ""});
  w.row({"min_link", "", "", "", "", format_number(r.min_link_hz() * 1e-9), ""});
  w.row({"intermediate_error", "", "", "", "", "", format_number(r.error_estimate)});
  return w.str();
}

inline json to_json(const StirapReport& r) {
  json states = json::array(), links = json::array();
  for (std::size_t i = 0; i < r.chain.states.size(); ++i) {
    const auto& s = r.chain.states[i];
    states.push_back({{"psi_index", r.chain.first_index + static_cast<int>(i)}, {"n", s.n}, {"l", s.l}, {"m", s.m}});
  }
  for (std::size_t i = 0; i < r.chain.links.size(); ++i) {
    const auto& l = r.chain.links[i];
    links.push_back({{"from", state_label(l.lower_index_state)},
                     {"to", state_label(l.upper_index_state)},
                     {"frequency_GHz", l.frequency_hz * 1e-9}});
  }
  return {{"report", "stirap"},
          {"states", std::move(states)},
          {"links", std::move(links)},
          {"max_link_GHz", r.max_link_hz() * 1e-9},
          {"min_link_GHz", r.min_link_hz() * 1e-9},
          {"intermediate_error",
           {{"population", r.intermediate_population},
            {"rabi_MHz", to_hz(r.omega) * 1e-6},
            {"intermediate_lifetime_us", r.intermediate_tau * 1e6},
            {"estimate", r.error_estimate}}}};
}

}  // namespace rydcz
