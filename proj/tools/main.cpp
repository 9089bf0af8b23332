// evomax command-line interface.
//
//   evomax run <config>     run one scenario from a key = value config file
//   evomax suite            structural identity suite over isotropic sizes
//   evomax schema           print the config schema and output formats
//   evomax list             list scenario names
//
// Exit codes: 0 all checks pass, 1 failures or runtime errors, 2 schema
// violation (the message names the offending config key).  report.json is
// byte-identical for identical config + seed; timestamps go to run_meta.txt.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evomax/scenarios.hpp"

namespace {

std::filesystem::path resolve_outdir(const std::string& configured) {
  if (const char* env = std::getenv("EVOMAX_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::filesystem::path(configured);
}

std::string now_utc() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int report_and_exit(const evomax::ScenarioResult& r, const std::filesystem::path& outdir,
                    double elapsed_ms) {
  evomax::write_text_file(outdir / "report.json", evomax::report_json_text(r));
  std::ostringstream meta;
  meta << "timestamp " << now_utc() << "\n"
       << "elapsed_ms " << elapsed_ms << "\n";
  evomax::write_text_file(outdir / "run_meta.txt", meta.str());

  std::size_t failed = 0;
  for (const auto& e : r.identities) {
    std::cout << (e.pass ? "pass" : "FAIL") << "  " << e.name << "  residual "
              << std::scientific << std::setprecision(3) << e.residual << " (tol "
              << e.tolerance << ")";
    if (!e.note.empty()) std::cout << "  [" << e.note << "]";
    std::cout << "\n" << std::defaultfloat;
    if (!e.pass) ++failed;
  }
  if (r.identities.empty())
    std::cout << "scenario " << r.scenario << ": no identity checks; outputs written\n";
  std::cout << r.identities.size() << " identity checks, " << failed << " failed\n"
            << "report: " << (outdir / "report.json").string() << "\n";
  return r.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "evomax: structure-preserving discrete solvers and identity checks for "
      "evolutionary electromagnetic systems"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand(
      "run", "run one scenario described by a key = value config file (see `schema`)");
  run->add_option("config", config_path, "path to the config file")->required();

  std::vector<int> sizes{2, 3, 4};
  std::uint64_t seed = 1;
  std::string suite_out = "out";
  CLI::App* suite = app.add_subcommand(
      "suite", "run the structural identity suite over isotropic grid sizes");
  suite->add_option("--sizes", sizes, "grid sizes, e.g. --sizes 2,3,4")->delimiter(',');
  suite->add_option("--seed", seed, "seed for the random probes");
  suite->add_option("--output-dir", suite_out,
                    "output directory (EVOMAX_OUTPUT_DIR overrides)");

  CLI::App* schema =
      app.add_subcommand("schema", "print the config schema and the output file formats");
  CLI::App* list = app.add_subcommand("list", "list available scenario names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema->parsed()) {
      std::cout << evomax::schema_text();
      return 0;
    }
    if (list->parsed()) {
      for (const auto& n : evomax::scenario_names()) std::cout << n << "\n";
      return 0;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
    };

    if (run->parsed()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return 1;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      const evomax::ScenarioConfig cfg =
          evomax::validate_config(evomax::parse_config_text(buf.str()));
      const std::filesystem::path outdir = resolve_outdir(cfg.output_dir);
      std::filesystem::create_directories(outdir);
      const evomax::ScenarioResult r = evomax::run_scenario(cfg, outdir);
      return report_and_exit(r, outdir, elapsed_ms());
    }

    // suite
    if (sizes.empty()) {
      std::cerr << "error: --sizes must name at least one grid size\n";
      return 1;
    }
    for (int s : sizes)
      if (s < 2) {
        std::cerr << "error: --sizes entries must be >= 2 (got " << s << ")\n";
        return 1;
      }
    const std::filesystem::path outdir = resolve_outdir(suite_out);
    std::filesystem::create_directories(outdir);
    const evomax::ScenarioResult r = evomax::run_suite(sizes, seed);
    return report_and_exit(r, outdir, elapsed_ms());
  } catch (const evomax::ConfigError& e) {
    std::cerr << "schema violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
