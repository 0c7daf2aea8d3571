#include "rydcz/json_schema.hpp"
#include "rydcz/report.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace rydcz;
namespace fs = std::filesystem;

namespace {

json load_schema(const std::string& name) {
  std::ifstream in(fs::path(RYDCZ_SCHEMA_DIR) / name);
  return json::parse(in);
}

struct RunResult {
  int status;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + RYDCZ_CLI + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t k;
  while ((k = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), k);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("rydcz_test_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST(Config, DefaultsAndUnits) {
  const RunConfig c = parse_config(
      "[atom]\nn = 100\ntemperature_K = 77\n[geometry]\nseparation_um = 3\n"
      "[gate]\nrabi_MHz = 4\nlifetime_ms = inf\n[tomography]\nsampling = true\nshots = 500\nseed = 9\n");
  EXPECT_EQ(c.n, 100);
  EXPECT_DOUBLE_EQ(c.temperature, 77.0);
  EXPECT_DOUBLE_EQ(c.separation, 3e-6);
  EXPECT_DOUBLE_EQ(*c.omega, to_rad_s(4e6));
  EXPECT_TRUE(std::isinf(*c.tau));
  EXPECT_TRUE(c.sampling);
  EXPECT_EQ(c.shots, 500u);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, ListsEveryProblem) {
  try {
    parse_config("[atom]\nn = 1\ntemperature_K = -3\n[gate]\nrabi_MHz = banana\n[bogus]\nx = 1\n[output]\ncolour = red\n",
                 "bad.ini");
    FAIL() << "expected validation_error";
  } catch (const validation_error& e) {
    const auto& p = e.problems();
    const auto mentions = [&](const std::string& s) {
      return std::any_of(p.begin(), p.end(), [&](const auto& x) { return x.find(s) != std::string::npos; });
    };
    EXPECT_GE(p.size(), 5u);
    EXPECT_TRUE(mentions("bogus"));
    EXPECT_TRUE(mentions("colour"));
    EXPECT_TRUE(mentions("rabi_MHz"));
    EXPECT_TRUE(mentions("atom.n"));
    EXPECT_TRUE(mentions("temperature_K"));
    for (const auto& x : p) EXPECT_EQ(x.rfind("bad.ini", 0), 0u) << x;
  }
}

TEST(Config, InfiniteLifetimeNeedsExplicitRabi) {
  EXPECT_THROW(parse_config("[gate]\nlifetime_ms = inf\n"), validation_error);
}

TEST(Config, PresetsResolveToTableColumns) {
  for (const auto& name : table1_presets()) {
    const RunConfig c = load_preset(name);
    EXPECT_EQ(c.name, name);
    EXPECT_TRUE(c.reference.e_o.has_value()) << name;
    const auto g = resolve_gate(c);
    EXPECT_NEAR(to_hz(g.params.omega) * 1e-6, *c.reference.rabi_MHz, 0.02 * *c.reference.rabi_MHz) << name;
  }
  EXPECT_THROW(load_preset("no-such-preset"), validation_error);
}

TEST(Csv, Rfc4180Quoting) {
  CsvWriter w({"a", "b"});
  w.row({"plain", "has,comma"});
  w.row({"say \"hi\"", "two\nlines"});
  EXPECT_EQ(w.str(), "a,b\r\nplain,\"has,comma\"\r\n\"say \"\"hi\"\"\",\"two\nlines\"\r\n");
  EXPECT_THROW(w.row({"only one"}), std::invalid_argument);
}

TEST(Csv, FigureOutputsHaveMonotoneAbscissa) {
  for (int which : {2, 3, 4, 5}) {
    std::istringstream in(cmd_figure(which, default_figure_grid(which)));
    std::string line;
    std::getline(in, line);
    ASSERT_FALSE(line.empty());
    EXPECT_EQ(line.back(), '\r');
    double last = -1e300;
    int rows = 0;
    while (std::getline(in, line)) {
      const double x = std::stod(line.substr(0, line.find(',')));
      EXPECT_GT(x, last);
      last = x;
      ++rows;
    }
    EXPECT_EQ(rows, default_figure_grid(which).points);
  }
  EXPECT_THROW(cmd_figure(7, {1, 2, 3}), validation_error);
  EXPECT_THROW(cmd_figure(2, {1, 2, 1}), validation_error);
  EXPECT_THROW(cmd_figure(4, {3, 2, 5}), validation_error);
}

TEST(Csv, FigureTwoCrossPoint) {
  const std::string csv = cmd_figure(2, {2.0, 3.0, 2});
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_NE(header.find("n110"), std::string::npos);
  // R, excluded, n90, n100, n110
  std::vector<std::string> cells;
  std::stringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
  EXPECT_NEAR(std::stod(cells[4]), 8.71, 0.02 * 8.71);
}

TEST(Schema, ValidatorRejectsBadDocuments) {
  const JsonSchemaValidator v(json::parse(R"({"type":"object","required":["a"],"additionalProperties":false,
    "properties":{"a":{"type":"number","minimum":0}}})"));
  EXPECT_TRUE(v.validate(json::parse(R"({"a":1})")).empty());
  EXPECT_FALSE(v.validate(json::parse(R"({"a":-1})")).empty());
  EXPECT_FALSE(v.validate(json::parse(R"({"b":1})")).empty());
  EXPECT_FALSE(v.validate(json::parse(R"([1])")).empty());
}

TEST(Schema, StirapReportConforms) {
  const auto errors = JsonSchemaValidator(load_schema("stirap_report.schema.json")).validate(to_json(cmd_stirap()));
  EXPECT_TRUE(errors.empty()) << (errors.empty() ? "" : errors.front());
}

TEST(Schema, QptReportConformsAndRoundTrips) {
  const auto report = to_json(cmd_qpt(load_preset("ideal")));
  const auto errors = JsonSchemaValidator(load_schema("qpt_report.schema.json")).validate(report);
  EXPECT_TRUE(errors.empty()) << (errors.empty() ? "" : errors.front());
  EXPECT_EQ(json::parse(report.dump()), report);
}

TEST(Cli, QptIsByteIdenticalAcrossRuns) {
  const auto a = run_cli("qpt --preset ideal");
  const auto b = run_cli("qpt --preset ideal");
  EXPECT_EQ(a.status, 0);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_LE(j["errors"]["E_O"].get<double>(), 1e-8);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("stirap").status, 0);
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("frobnicate").status, 1);
  EXPECT_EQ(run_cli("qpt --preset nowhere").status, 1);
  EXPECT_EQ(run_cli("stirap --format yaml").status, 1);
  EXPECT_EQ(run_cli("figure 9").status, 1);
  const auto bad = temp_file("bad.ini", "[gate]\nrabi_MHz = -1\n[extra]\nk = v\n");
  EXPECT_EQ(run_cli("qpt --config \"" + bad.string() + "\"").status, 1);
  fs::remove(bad);
}

TEST(Cli, ToleranceBreachGivesExitTwo) {
  // a preset directory whose reference values are deliberately wrong
  const fs::path dir = fs::temp_directory_path() / "rydcz_test_presets";
  fs::create_directories(dir);
  for (const auto& name : table1_presets()) {
    std::ifstream in(preset_directory() / (name + ".ini"));
    std::stringstream text;
    text << in.rdbuf();
    std::string s = text.str();
    if (name == "cs80-0K") s.replace(s.find("rabi_MHz = 3.82"), 15, "rabi_MHz = 9.99");
    std::ofstream(dir / (name + ".ini")) << s;
  }
  const auto r = run_cli("table1 --preset-dir \"" + dir.string() + "\" --format json");
  EXPECT_EQ(r.status, 2);
  const auto j = json::parse(r.out);
  const auto errors = JsonSchemaValidator(load_schema("table1_report.schema.json")).validate(j);
  EXPECT_TRUE(errors.empty()) << (errors.empty() ? "" : errors.front());
  fs::remove_all(dir);
}

TEST(Cli, OutputFileAndCsvFormat) {
  const fs::path out = fs::temp_directory_path() / "rydcz_test_stirap.csv";
  EXPECT_EQ(run_cli("stirap --out \"" + out.string() + "\"").status, 0);
  std::ifstream in(out, std::ios::binary);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.back(), '\r');
  fs::remove(out);
}
