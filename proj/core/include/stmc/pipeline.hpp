#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stmc/config.hpp"
#include "stmc/identity.hpp"
#include "stmc/ingest.hpp"
#include "stmc/network.hpp"

// Orchestration of the analysis over a project database directory:
//
//   manifest.txt
//   raw/        normalized inputs, identities, issue links, ingest warnings
//   windows/    window grid and per-window artifact metrics
//   networks/   per network: graphs, motif counts, null models, measures
//   results/    per grid cell, scenario and motif family: model fits
//   reports/    figure data as CSV and SVG
namespace stmc::pipeline {

std::string_view version();

enum class Stage { ingest, build, motifs, nullmodel, measures, regress, report };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view token);

struct RunOptions {
  std::size_t jobs = 1;
  /// key=value progress and warning lines; null silences them.
  std::ostream* log = nullptr;
};

/// Parsed project data with resolved identities and issue links.
struct Corpus {
  std::vector<ingest::CommitRecord> commits;  // sorted by authored_at
  std::vector<ingest::MailMessage> messages;
  std::vector<ingest::IssueRecord> issues;
  IdentityMap identities;
  std::vector<std::pair<std::string, std::string>> links;  // (hash, key)
  std::optional<network::DepLayer> dsm;
  Report report;
};

/// Reads the sources named in `config.paths`.
Corpus load_sources(const AnalysisConfig& config);

/// Windows over every configured source.
std::vector<network::Window> corpus_windows(const Corpus& corpus,
                                            const AnalysisConfig& config);

struct ScenarioPair {
  std::size_t quality_window = 0;
  std::size_t motif_window = 0;

  bool operator==(const ScenarioPair&) const = default;
};

/// isochronous (n, n); advanced (n, n + 1); retarded (n, n - 1). Advanced
/// and retarded need at least two windows (DataError otherwise).
std::vector<ScenarioPair> scenario_pairs(Scenario scenario,
                                         std::size_t window_count);

void run_stage(Stage stage, const AnalysisConfig& config,
               const RunOptions& options = {});

/// Every stage in order; the null-model stage only when enabled.
void run_all(const AnalysisConfig& config, const RunOptions& options = {});

/// Regression for one grid cell and scenario; writes
/// results/<cell>/<scenario>/<family>/.
void run_scenario(const AnalysisConfig& config, const GridCell& cell,
                  Scenario scenario, const RunOptions& options = {});

/// Writes reports/ from the results present in `database`; returns the
/// files written (none when there are no results).
std::vector<std::filesystem::path> emit_reports(
    const std::filesystem::path& database);

}  // namespace stmc::pipeline
