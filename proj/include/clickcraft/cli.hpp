#ifndef CLICKCRAFT_CLI_HPP
#define CLICKCRAFT_CLI_HPP

// Config-driven runner behind the `clickcraft` executable. Kept as a library
// so the protocols can be exercised in-process.

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clickcraft/pfunc.hpp"

namespace clickcraft::cli {

inline constexpr int config_schema = 1;

enum class Format { csv, json };

Format parse_format(const std::string& text);

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<double> eta;
    std::optional<int> k;
    std::vector<int> n;
    std::optional<std::string> grid; // "re0,re1,im0,im1,nre,nim"
    std::optional<Format> format;
};

struct OutputFile {
    std::string name;
    std::string content;
};

/// files[0] is the primary output; the manifest, if requested, comes last.
struct RunResult {
    std::vector<OutputFile> files;
    nlohmann::json resolved; // config after defaults and overrides
};

/// Reads and parses a JSON config; ConfigError on I/O or syntax problems.
nlohmann::json load_config(const std::filesystem::path& path);

RunResult run(const std::string& protocol, nlohmann::json config, const Overrides& overrides, bool manifest);

/// Writes every file below `dir`, creating it if needed.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

/// 0 ok, 1 config, 2 validation, 3 numerical.
int exit_code(const std::exception& e);

std::vector<std::string> protocols();

// formatting, exposed for tests

/// %.17g; NumericalError on non-finite values.
std::string format_double(double x);

/// 100 x rounded half-to-even at two decimals, e.g. 0.168 -> "16.80".
std::string format_percent(double probability);

GridSpec parse_grid(const std::string& text);

} // namespace clickcraft::cli

#endif
