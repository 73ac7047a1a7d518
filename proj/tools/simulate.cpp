// simulate - command-line front end of the scenario runner.
//
//   simulate timetrace|power-sweep|atom-sweep|beta-fit|custom --config FILE
//            [--seed U64] [--out DIR] [--samples INT] [--dt NS] [--format csv|json]
//
// Exit status: 0 success, 2 configuration error, 3 numerical-invariant
// violation, 1 anything else (I/O).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cascadewg/experiments.hpp"
#include "cascadewg/io.hpp"
#include "cascadewg/parallel.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace cascadewg;

  CLI::App app{"Cascaded chiral waveguide-QED simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> samples;
  std::optional<double> dt;
  std::optional<std::string> format;

  for (const char* name : {"timetrace", "power-sweep", "atom-sweep", "beta-fit", "custom"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
    sub->add_option("--config", config_path, "JSON scenario file")->required();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--samples", samples, "Monte Carlo samples per point");
    sub->add_option("--dt", dt, "time step in ns");
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    const ScenarioKind kind = scenario_from_string(app.get_subcommands().front()->get_name());
    ScenarioConfig config = load_config(config_path, kind);
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (samples) config.n_samples = *samples;
    if (dt) config.dt = *dt;
    if (format) config.format = format_from_string(*format);
    config.validate();

    for (const auto& path : run_scenario(config, worker_count())) {
      std::cout << path.string() << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IntegrationError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
