#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ambient/commands.hpp"
#include "ambient/error.hpp"
#include "ambient/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTolerance = 2;
constexpr int kExitIo = 3;

int exit_code_for(ambient::Errc code) { return code == ambient::Errc::IoError ? kExitIo : kExitValidation; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ambient-rf: ambient OFDM sensing simulator and processing pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string scenario_arg;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  double tolerance = 1e-3;
  app.add_option("--scenario", scenario_arg, "Scenario file, or a bundled preset name (reference, oracle_scaled, static)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Overrides run.rng_seed");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--tolerance", tolerance, "Oracle amplitude tolerance (phase tolerance is 10x, in rad)")
      ->check(CLI::PositiveNumber);

  std::string input_dir;
  auto* simulate = app.add_subcommand("simulate", "Generate per-channel baseband files");
  auto* oracle = app.add_subcommand("oracle", "Check time-domain mixing against the analytic baseband");
  auto* sanitize = app.add_subcommand("sanitize", "Sanitize a baseband directory into sanitized.csv");
  sanitize->add_option("--input", input_dir, "Directory holding baseband/")->required();
  auto* beamform = app.add_subcommand("beamform", "Differential beamforming heatmaps from a baseband directory");
  beamform->add_option("--input", input_dir, "Directory holding baseband/")->required();
  auto* velocity = app.add_subcommand("velocity", "Velocity trace from sanitized.csv");
  velocity->add_option("--input", input_dir, "Directory holding sanitized.csv")->required();
  auto* pipeline = app.add_subcommand("pipeline", "simulate (unless --input has baseband) -> sanitize -> velocity -> beamform");
  pipeline->add_option("--input", input_dir, "Existing baseband directory");

  std::string pred, gt, task = "mask";
  auto* metrics = app.add_subcommand("metrics", "AP/AR/PCK from prediction and ground-truth CSVs");
  metrics->add_option("--pred", pred, "Prediction CSV")->required();
  metrics->add_option("--gt", gt, "Ground-truth CSV")->required();
  metrics->add_option("--task", task, "mask or keypoint")->check(CLI::IsMember({"mask", "keypoint"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    ambient::set_thread_count(threads);
    const bool needs_out = !oracle->parsed() && !metrics->parsed();
    if (needs_out && out_dir.empty()) {
      std::cerr << "error: --out is required for this command\n";
      return kExitValidation;
    }
    if (metrics->parsed()) {
      ambient::run_metrics(pred, gt, task == "mask" ? ambient::MetricTask::Mask : ambient::MetricTask::Keypoint,
                           out_dir.empty() ? "." : out_dir, std::cout);
      return kExitOk;
    }

    if (scenario_arg.empty()) scenario_arg = oracle->parsed() ? "oracle_scaled" : "reference";
    auto sc = ambient::load_scenario(scenario_arg);
    if (seed) {
      sc.run.rng_seed = *seed;
      sc.finalize();
    }

    if (oracle->parsed()) {
      ambient::OracleOptions opt;
      opt.amplitude_tol = tolerance;
      opt.phase_tol = 10.0 * tolerance;
      const auto rep = ambient::run_oracle(sc, opt);
      std::cout << "oracle: " << rep.symbols << " symbols, " << rep.samples << " samples\n"
                << "  max relative amplitude error " << rep.max_amplitude_rel_err << " (tol " << opt.amplitude_tol
                << ")\n"
                << "  max phase error " << rep.max_phase_err_rad << " rad (tol " << opt.phase_tol << ")\n"
                << "  runtime " << rep.runtime_s << " s\n"
                << (rep.pass ? "PASS" : "FAIL") << "\n";
      if (!out_dir.empty()) ambient::write_json(ambient::fs::path(out_dir) / "oracle.json", rep.to_json());
      return rep.pass ? kExitOk : kExitTolerance;
    }

    const ambient::fs::path out(out_dir);
    const ambient::fs::path in(input_dir);
    if (simulate->parsed()) ambient::run_simulate(sc, out, std::cout);
    else if (sanitize->parsed()) ambient::run_sanitize(sc, in, out, std::cout);
    else if (beamform->parsed()) ambient::run_beamform(sc, in, out, std::cout);
    else if (velocity->parsed()) ambient::run_velocity(sc, in, out, std::cout);
    else if (pipeline->parsed()) ambient::run_pipeline(sc, in, out, std::cout);
    return kExitOk;
  } catch (const ambient::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
