#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughkit_cli/json_out.hpp"

namespace roughkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One file of command output. The first file of a command is its main report.
struct OutputFile {
  std::string name;
  std::string content;
};

struct RunConfig {
  std::string subcommand;
  Json config = Json::object();  ///< parsed --config file, empty object when absent
  std::optional<std::uint64_t> seed;
  std::string out_dir;           ///< empty: main report goes to stdout
  std::string path_file;         ///< sig and pvar input
  std::size_t level = 3;
  std::optional<double> p;
};

/// sig-v1 signature of a CSV path.
std::vector<OutputFile> cmd_sig(const RunConfig& run);
/// pvar-v1 report; p < 1 is a usage error.
std::vector<OutputFile> cmd_pvar(const RunConfig& run);
/// price-v1 report of the optimised stopping policy.
std::vector<OutputFile> cmd_price(const RunConfig& run);
/// filter-v1 report plus the filter CSV.
std::vector<OutputFile> cmd_filter(const RunConfig& run);
/// control-lab-v1 report plus dpp, degeneracy, hjb and continuity CSVs.
std::vector<OutputFile> cmd_control_lab(const RunConfig& run);

/// Parses argv, runs the subcommand and writes its files; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roughkit::cli
