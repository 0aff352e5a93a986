#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "photongen/errors.hpp"
#include "photongen/io/config.hpp"
#include "photongen/io/csv.hpp"
#include "photongen/io/runner.hpp"

namespace io = photongen::io;

int main(int argc, char** argv) {
  CLI::App app{"Simulate a flux-tunable single-photon source: transmon in front of a SQUID mirror."};
  app.set_version_flag("--version", std::string(io::version()));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::string profile;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  auto* profile_opt = app.add_option("--profile", profile, "Device profile: paper2017 or estimated");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads, 0 for all cores");
  for (auto* opt : {config_opt, out_opt, seed_opt, profile_opt, threads_opt}) opt->configurable(false);
  app.fallthrough();

  const std::map<std::string, std::string> help = {
      {"spectro-sweep", "Reflection spectroscopy over flux: synthetic traces and fitted rates"},
      {"fit-curve", "Fit the SQUID and coupling parameters to a Gamma_1(flux) curve"},
      {"rabi", "Integrated emission against Rabi pulse length at fixed flux"},
      {"decay", "Free decay of the emitted quadrature after a pi/2 pulse"},
      {"triggered", "Store at the decoupling point, then release on demand"},
      {"shaped", "Emission along square, exponential or cubic flux edges"},
      {"invert-shape", "Design the flux trajectory for a target wavepacket and verify it"},
      {"fidelity-table", "Preparation and emitted-state fidelity against storage time"},
  };
  for (const auto& name : io::subcommands()) {
    app.add_subcommand(name, help.at(name));
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  io::ParseOverrides overrides;
  if (*profile_opt) overrides.profile = profile;
  if (*seed_opt) overrides.seed = seed;
  if (*threads_opt) overrides.threads = threads;
  if (*out_opt) overrides.output_dir = out_dir;

  std::string error_dir = *out_opt ? out_dir : std::string("out");
  try {
    const io::RunConfig config = *config_opt ? io::parse_config(io::read_file(config_path), overrides)
                                              : io::default_config(subcommand, overrides);
    error_dir = config.output_dir;
    const io::RunReport report = io::run_subcommand(subcommand, config);
    std::cout << report.summary;
    std::cerr << subcommand << ": wrote " << report.checksums.size() + 1 << " files to " << report.output_dir
              << " in " << report.wall_clock << " s\n";
    return 0;
  } catch (const photongen::Error& e) {
    std::cerr << "error [" << photongen::to_string(e.code()) << "]: " << e.what() << "\n";
    io::write_error_record(error_dir, subcommand, photongen::to_string(e.code()), e.what());
    return io::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    io::write_error_record(error_dir, subcommand, "internal", e.what());
    return 1;
  }
}
