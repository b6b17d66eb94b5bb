#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stmc/ingest.hpp"
#include "stmc/motifs.hpp"
#include "stmc/time.hpp"

// Synthetic project histories with known communication behaviour and planted
// quality effects.
namespace stmc::synth {

inline constexpr Timestamp kDefaultStart{
    std::chrono::seconds(1577836800)};  // 2020-01-01

struct SyntheticSpec {
  std::uint32_t developers = 24;
  std::uint32_t artifacts = 96;
  std::uint32_t windows = 8;
  std::uint32_t modules = 4;
  /// Probability that two developers sharing a triangle or square pattern
  /// in a window communicate in that window.
  double p_comm = 0.5;
  /// Extra expected bugs per unit of max(0, AM - M) participation of the
  /// effect family; 0 plants nothing.
  double effect = 0;
  motifs::Family effect_family = motifs::Family::square;
  /// Expected bugs per line and unit of branch density.
  double bug_rate = 0.002;
  double commits_per_developer = 4;
  std::uint32_t window_days = 90;
  std::uint64_t seed = 1;
  Timestamp start = kDefaultStart;

  /// Throws ConfigError unless probabilities lie in [0, 1] and counts >= 1.
  void validate() const;
};

struct SyntheticCorpus {
  std::vector<ingest::CommitRecord> commits;
  std::vector<ingest::MailMessage> messages;
  std::vector<ingest::IssueRecord> issues;
  /// (commit hash, path) -> contents after that commit; only the snapshots
  /// that some window uses as its reference are kept.
  std::map<std::pair<std::string, std::string>, std::string> snapshots;
  /// Static dependencies (from, to).
  std::vector<std::pair<std::string, std::string>> dsm;
};

SyntheticCorpus synth_generate(const SyntheticSpec& spec);

/// Writes commits.log, mail.mbox, issues.json, dsm.csv, snapshots/ and a
/// configuration file stmc.conf pointing at them into `dir`.
void write_corpus(const SyntheticCorpus& corpus,
                  const std::filesystem::path& dir);

}  // namespace stmc::synth
