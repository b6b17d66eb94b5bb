#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stmc/ingest.hpp"
#include "stmc/motifs.hpp"
#include "stmc/network.hpp"
#include "stmc/nullmodel.hpp"
#include "stmc/semantic.hpp"
#include "stmc/stats.hpp"

namespace stmc::pipeline {

enum class DepMechanism { cochange, dsm, semantic };
enum class Channel { mail, issues, mail_issues };
enum class Scenario { isochronous, advanced, retarded };

std::string_view to_string(DepMechanism d);
std::string_view to_string(Channel c);  // "mail", "issues", "mail+issues"
std::string_view to_string(Scenario s);
DepMechanism parse_dep_mechanism(std::string_view token);
Channel parse_channel(std::string_view token);
Scenario parse_scenario(std::string_view token);

/// One network (dependency x channel) combined with one quality.
struct GridCell {
  DepMechanism dependency = DepMechanism::cochange;
  Channel channel = Channel::mail_issues;
  stats::Regressand quality = stats::Regressand::bug_density;

  /// "<dependency>-<channel>"
  std::string network_name() const;
  /// "<dependency>-<channel>-<quality>"
  std::string name() const;
};

struct Paths {
  std::filesystem::path commits;
  std::filesystem::path mbox;
  std::filesystem::path issues;
  std::filesystem::path dsm;
  std::filesystem::path snapshots;
  std::filesystem::path database = "db";
};

struct RegressionConfig {
  stats::PrepareOptions prepare;
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t folds = 10;
  std::size_t lambda_count = 100;
  double lambda_ratio = 1e-3;
};

struct AnalysisConfig {
  std::vector<DepMechanism> dependency = {DepMechanism::cochange};
  std::vector<Channel> channel = {Channel::mail_issues};
  std::vector<stats::Regressand> quality = {stats::Regressand::bug_density,
                                            stats::Regressand::churn};
  std::vector<Scenario> scenario = {Scenario::isochronous, Scenario::advanced,
                                    Scenario::retarded};
  motifs::Semantics motif_semantics = motifs::Semantics::induced;
  network::MailMode mail_mode = network::MailMode::thread_participants;
  network::WindowConfig window;
  network::CochangeOptions cochange;
  semantic::SemanticOptions semantic;
  nullmodel::RewireConfig rewire;
  bool nullmodel_enabled = true;
  RegressionConfig regression;
  std::uint64_t master_seed = 0;
  std::string issue_key_pattern = std::string(ingest::kDefaultIssueKeyPattern);
  bool strict = false;
  Paths paths;

  /// Networks in configuration order, without duplicates.
  std::vector<std::pair<DepMechanism, Channel>> networks() const;
  std::vector<GridCell> cells() const;

  /// Throws ConfigError for invalid values or grid cells lacking inputs.
  void validate() const;

  /// Normalized key = value listing of every field (stable across runs).
  std::string canonical_text() const;
};

/// Parses "key = value" lines; '#' starts a comment, lists are comma
/// separated. Relative paths are resolved against `base_dir`. Unknown keys
/// and malformed values raise ConfigError naming the line.
AnalysisConfig parse_config(std::istream& in,
                            const std::filesystem::path& base_dir = {});
AnalysisConfig load_config(const std::filesystem::path& file);

/// A commented configuration file listing every key with its default.
std::string default_config_text();

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view text);

}  // namespace stmc::pipeline
