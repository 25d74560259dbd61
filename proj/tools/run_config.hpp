#pragma once
// Command-line configuration shared by every bowen-press command.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bowen_press/families.hpp"
#include "bowen_press/pressure.hpp"

namespace bowen::cli {

/// A rejected flag or flag combination; the message names the flag.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  ///< pressure, curve, delta, repeller, gps, verify
  std::optional<FamilyKind> family;
  std::optional<cplx> lambda;  ///< exp / tan parameter
  std::optional<cplx> c;       ///< quad parameter
  std::optional<ExtendedPoint> z;
  std::optional<double> t;
  std::vector<double> t_grid;
  std::optional<int> depth;
  int cutoff = 4;
  std::optional<double> prune;  ///< log-weight pruning threshold (<= 0)
  int far_panels = 16;
  bool decay_cutoff = false;
  bool ignore_tail = false;
  double tol = 0.01;
  std::string output;  ///< empty: stdout
  std::uint64_t seed = 7;
  long samples = 10000;
  int ring_samples = 64;
  int budget = 64;
  std::string suite = "all";
  double level = 10.0;
  double ratio = 2.0;
  int gps_depth = 32;
  std::string format = "json";
  int threads = 0;  ///< 0: BOWEN_PRESS_THREADS or 1

  FamilySpec family_spec() const;  ///< throws ConfigError when the family flags are missing
  ExtendedPoint base_point() const;  ///< --z or 1+2i
  TruncationPolicy policy() const;
  int thread_count() const;
};

/// Parses argv (argv[0] is the program name). Throws ConfigError on any invalid flag or combination.
/// Returns nullopt when help was requested; the help text goes to help_out.
std::optional<RunConfig> parse_run_config(int argc, const char* const* argv, std::string& help_out);

/// Flags (without program name) that parse back to an equal configuration.
std::vector<std::string> to_flags(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

/// "a:b:n" (n evenly spaced points) or a comma-separated list.
std::vector<double> parse_t_grid(const std::string& text);

}  // namespace bowen::cli
