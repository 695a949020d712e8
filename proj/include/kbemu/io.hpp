#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/design.hpp"
#include "kbemu/diagnostics.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/models.hpp"
#include "kbemu/study.hpp"

namespace kbemu::io {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Shortest text that round-trips: %.17g.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// --- emulator configuration ----------------------------------------------------

struct BoundaryEntry {
  std::size_t axis = 0;
  double location = 0.0;
  std::string evaluator;
};

struct EmulatorConfig {
  double beta = 0.0;
  double sigma2 = 1.0;
  std::vector<double> thetas;
  std::vector<BoundaryEntry> boundaries;
  double jitter = kDefaultJitter;

  PriorSpec prior() const;
  BoundaryConfig resolve(const models::EvaluatorRegistry& registry) const;
};

/// Errors are ConfigError with the offending field path in the message.
EmulatorConfig parse_emulator_config(const std::string& json_text);
std::string to_json(const EmulatorConfig& config);

// --- Arabidopsis parameters ------------------------------------------------------

/// {"rates": {name: value, ...}, "initial_state": {name: value, ...}, "t_end": T}.
/// Every rate and species must be present; unknown names are rejected.
models::ArabidopsisSpec parse_arabidopsis_spec(const std::string& json_text);
std::string to_json(const models::ArabidopsisSpec& spec);

/// Placeholder parameter file shipped in the data directory.
std::string default_arabidopsis_path();
models::ArabidopsisSpec load_arabidopsis_spec(const std::string& path);

// --- tables ------------------------------------------------------------------------

/// Lines of "# key: value" placed at the top of CSV outputs.
std::string comment_header(const std::vector<std::pair<std::string, std::string>>& fields);

std::string design_csv(const Design& design, const std::vector<std::string>& names,
                       const std::string& header = {});
std::string design_json(const Design& design, const std::vector<std::string>& names,
                        const std::vector<std::pair<std::string, double>>& criteria,
                        const std::string& config_hash, std::uint64_t run_seed);

/// Points and outputs read from CSV: header row of names, last column is the output.
/// Lines starting with '#' are skipped.
struct Table {
  std::vector<std::string> names;  // input names
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
};
Table parse_table_csv(const std::string& text);

std::string report_csv(const DiagnosticReport& report, const std::vector<std::string>& names,
                       const std::string& header = {});
std::string summary_json(const DiagnosticSummary& summary);

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::vector<std::string>& names,
                      const std::string& header = {});

std::string study_csv(const study::StudyResult& result, const std::string& header = {});
std::string study_json(const study::StudyResult& result, const std::string& model,
                       std::uint64_t seed, const std::string& config_hash);

}  // namespace kbemu::io
