#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sbcheck::cli {

/// Exit codes of `run`.
inline constexpr int kHolds = 0;
inline constexpr int kFails = 1;
inline constexpr int kUsage = 2;

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string format = "text";
  std::string mode = "weak";
  std::string stage = "flat";
  std::optional<std::string> ctl;
  std::optional<std::string> at;
  std::optional<std::string> relation_file;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::size_t b_states = 6;
  std::size_t s_states = 2;
  double density = 0.3;
  double s_density = 0.5;
  bool color = false;
};

/// `args` excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace sbcheck::cli
