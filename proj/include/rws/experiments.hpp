#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rws/coefficients.hpp"

namespace rws::lab {

using Config = nlohmann::json;

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Complete defaults; every experiment runs bare.
Config default_config(const std::string& name);

/// defaults <- file values <- key=value overrides <- seed. The file may be a
/// flat object or a manifest (its "config" member is used). Unknown keys and
/// type mismatches raise InvalidParameter.
Config resolve_config(const std::string& name, const std::optional<Config>& file,
                      const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed);

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunResult {
  std::string experiment;
  Config config;
  std::string config_digest;
  std::vector<OutputFile> outputs;
  Config summary;
};

/// Runs one experiment, writing CSV/JSON outputs and manifest.json into out_dir.
RunResult run_experiment(const std::string& name, const Config& resolved, const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view data);

/// "loglog-prop46", "geometric:s", "power:s:a:b:c", "sparse:q:s:a:b:c".
RateDescriptor parse_rate(const std::string& text);

}  // namespace rws::lab
