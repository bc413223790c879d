#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rws/error.hpp"
#include "rws/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

std::string name_list() {
  std::string s;
  for (const auto& n : rws::lab::experiment_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

int run(const std::string& experiment, const std::string& config_path, const std::vector<std::string>& sets,
        const std::string& out, std::optional<std::uint64_t> seed) {
  using rws::lab::Config;
  if (!rws::lab::is_experiment(experiment)) {
    std::cerr << "rws-lab: unknown experiment '" << experiment << "'; known experiments: " << name_list() << '\n';
    return kExitInvalid;
  }
  std::optional<Config> file;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "rws-lab: invalid-parameter: cannot open config " << config_path << '\n';
      return kExitInvalid;
    }
    Config parsed = Config::parse(in, nullptr, false);
    if (parsed.is_discarded()) {
      std::cerr << "rws-lab: invalid-parameter: config " << config_path << " is not valid JSON\n";
      return kExitInvalid;
    }
    file = std::move(parsed);
  }
  const Config cfg = rws::lab::resolve_config(experiment, file, sets, seed);
  const std::string dir = out.empty() ? "out/" + experiment : out;
  const auto result = rws::lab::run_experiment(experiment, cfg, dir);
  std::cout << experiment << " config-sha256=" << result.config_digest << '\n';
  for (const auto& o : result.outputs) std::cout << "  " << dir << '/' << o.path << "  " << o.sha256 << '\n';
  std::cout << "  " << dir << "/manifest.json\n";
  std::cout << result.summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rws-lab: random wavelet series experiments"};
  app.require_subcommand(1);

  std::string experiment, config_path, out;
  std::vector<std::string> sets;
  std::uint64_t seed_value = 0;
  auto* run_cmd = app.add_subcommand("run", "Run one named experiment");
  run_cmd->add_option("experiment", experiment, "Experiment name")->required();
  run_cmd->add_option("--config", config_path, "Flat JSON config or a previous manifest.json");
  run_cmd->add_option("--set", sets, "Override key=value (repeatable)")->allow_extra_args(false);
  run_cmd->add_option("--out", out, "Output directory (default out/<experiment>)");
  auto* seed_opt = run_cmd->add_option("--seed", seed_value, "Master seed");

  auto* list_cmd = app.add_subcommand("list", "List experiments and their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& n : rws::lab::experiment_names())
        std::cout << n << ' ' << rws::lab::default_config(n).dump() << '\n';
      return kExitOk;
    }
    std::optional<std::uint64_t> seed;
    if (seed_opt->count() > 0) seed = seed_value;
    return run(experiment, config_path, sets, out, seed);
  } catch (const rws::Error& e) {
    std::cerr << "rws-lab: " << e.what() << '\n';
    return e.kind() == rws::ErrorKind::NumericalFailure ? kExitNumerical : kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "rws-lab: invalid-parameter: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "rws-lab: numerical-failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
