#pragma once

// Verification and sampling driver behind the command-line tool.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "loopsoup/io.hpp"

namespace loopsoup::harness {

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kInputError = 2, kInconclusive = 3 };

/// Monte Carlo suites report "inconclusive" below this sample count.
inline constexpr std::size_t kMinMcSamples = 1000;

struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t samples = 20000;         // per Monte Carlo suite
  std::size_t wilson_samples = 100000;
  int loop_length = 12;                // L for loop-sum identities
  int lerw_length = 12;
  int pushforward_length = 8;
  std::map<std::string, double> tolerances;  // check id -> override
  std::vector<std::string> matrix_fixtures;  // extra matrix JSON files
  std::vector<std::string> graph_fixtures;   // extra graph JSON files
  std::string output;                  // empty: stdout
  bool record_timing = false;          // runtime_ms breaks bit-exact reruns

  double tolerance(const std::string& check, double fallback) const;
  /// Throws InvalidInput when counts or tolerances are out of range.
  void validate() const;
};

io::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const io::json& doc);

enum class Status { Pass, Fail, Inconclusive };

struct CheckReport {
  std::string check;
  std::string anchor;  // identity being checked
  std::string fixture;
  std::string inputs_digest;
  io::json lhs;
  io::json rhs;
  double error = 0.0;
  double tolerance = 0.0;
  std::optional<double> bound;  // certified truncation bound, when the check has one
  Status status = Status::Pass;
  std::optional<double> runtime_ms;

  bool pass() const { return status == Status::Pass; }
};

io::json report_to_json(const CheckReport& report);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string digest(const std::string& text);

/// Deterministic identity suites. Throws Error (input problems) before any
/// check runs when a fixture file is unreadable or not acceptable.
std::vector<CheckReport> run_verify(const RunConfig& config);

/// Randomized suites, deterministic given the seed.
std::vector<CheckReport> run_mc(const RunConfig& config);

int exit_code(const std::vector<CheckReport>& reports);

void write_reports(const std::vector<CheckReport>& reports, std::ostream& out);

enum class SampleKind { Soup, Gff, Tree, Field };

std::optional<SampleKind> parse_sample_kind(const std::string& name);

struct SampleRequest {
  SampleKind kind = SampleKind::Soup;
  std::size_t count = 1;
  double intensity = 1.0;           // soups and fields
  std::optional<std::string> matrix_path;
  std::optional<std::string> graph_path;
};

/// Streams JSON-lines samples with seed/substream metadata.
void run_sample(const RunConfig& config, const SampleRequest& request, std::ostream& out);

}  // namespace loopsoup::harness
