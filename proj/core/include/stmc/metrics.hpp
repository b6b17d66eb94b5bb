#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stmc/errors.hpp"
#include "stmc/ingest.hpp"
#include "stmc/network.hpp"
#include "stmc/time.hpp"

// Per-artifact quality and complexity covariates.
namespace stmc::metrics {

/// Newline count, plus one for a non-empty final line without newline.
std::size_t loc_of_snapshot(std::string_view contents);

/// Sum of added + deleted lines over changes to `path`.
std::uint64_t churn_per_window(std::span<const ingest::CommitRecord> commits,
                               std::string_view path);
std::map<std::string, std::uint64_t> churn_by_path(
    std::span<const ingest::CommitRecord> commits);

struct BugStats {
  std::uint64_t bug_count = 0;
  std::optional<double> bug_density;  // absent when loc == 0

  bool operator==(const BugStats&) const = default;
};

/// Distinct bug issues with at least one linked commit in `commits` that
/// touches `path`.
BugStats bug_stats_per_window(
    std::span<const std::pair<std::string, std::string>> links,
    std::span<const ingest::IssueRecord> issues,
    std::span<const ingest::CommitRecord> commits, std::string_view path,
    std::size_t loc);

/// Bug counts for every path touched by a linked bug-fix commit.
std::map<std::string, std::uint64_t> bug_counts_by_path(
    std::span<const std::pair<std::string, std::string>> links,
    std::span<const ingest::IssueRecord> issues,
    std::span<const ingest::CommitRecord> commits);

struct LanguageProfile {
  std::string name;
  std::vector<std::string> extensions;
  std::vector<std::string> branch_tokens;
  std::string block_open = "{";
  std::string block_close = "}";
  std::string line_comment;
  std::pair<std::string, std::string> block_comment;
  std::vector<std::string> string_quotes;
};

class LanguageProfiles {
 public:
  /// The table shipped with the library.
  static const LanguageProfiles& builtin();
  /// Throws ConfigError on a malformed table.
  static LanguageProfiles from_json(std::string_view text);

  /// Profile for the path's extension (case-sensitive), or nullptr.
  const LanguageProfile* for_path(std::string_view path) const;
  const std::vector<LanguageProfile>& profiles() const { return profiles_; }

 private:
  std::vector<LanguageProfile> profiles_;
  std::map<std::string, std::size_t, std::less<>> by_extension_;
};

struct Complexity {
  std::uint32_t max_nesting = 0;
  std::optional<double> avg_cyclomatic;  // absent without functions
  std::size_t function_count = 0;

  bool operator==(const Complexity&) const = default;
};

/// Comments and string literals are ignored. A function is an outermost
/// block whose opening delimiter follows a parameter list that is itself
/// preceded by a name other than a control keyword. Nesting is counted from
/// the function body (depth 0); without functions it is the raw block depth.
/// Cyclomatic complexity per function = 1 + branch tokens in its body.
Complexity complexity_estimates(std::string_view contents,
                                const LanguageProfile& profile);

/// File contents after each commit: <root>/<commit hash>/<path>. A file
/// missing from a commit directory did not exist after that commit.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::optional<std::string> read(std::string_view hash,
                                  std::string_view path) const;
  void write(std::string_view hash, std::string_view path,
             std::string_view contents) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

/// Per-path commit history in authored order.
class FileHistory {
 public:
  struct Entry {
    Timestamp at;
    std::string hash;
    std::uint64_t added = 0;
    std::uint64_t deleted = 0;
  };

  explicit FileHistory(std::span<const ingest::CommitRecord> commits);

  /// Last commit touching `path` authored before `end`: the reference
  /// snapshot of a window ending at `end`.
  const Entry* reference(std::string_view path, Timestamp end) const;
  /// Line count obtained by replaying numstat deltas before `end`.
  std::int64_t replayed_loc(std::string_view path, Timestamp end) const;

  /// Paths with at least one commit before `end`.
  std::vector<std::string> paths_before(Timestamp end) const;

 private:
  std::map<std::string, std::vector<Entry>, std::less<>> entries_;
};

struct ArtifactMetrics {
  std::string path;
  std::size_t window_index = 0;
  std::size_t loc = 0;
  std::uint64_t churn = 0;
  std::uint64_t bug_count = 0;
  std::optional<double> bug_density;
  std::optional<std::uint32_t> max_nesting;
  std::optional<double> avg_cyclomatic;
  std::uint32_t dev_count = 0;  // distinct modifiers in the window

  bool operator==(const ArtifactMetrics&) const = default;
};

struct MetricsInputs {
  std::span<const ingest::CommitRecord> commits;  // whole history, sorted
  std::span<const std::pair<std::string, std::string>> links;
  std::span<const ingest::IssueRecord> issues;
  const FileHistory* history = nullptr;
  const SnapshotStore* snapshots = nullptr;  // null: LOC by replay only
  const LanguageProfiles* profiles = nullptr;
  const IdentityMap* identities = nullptr;
};

/// Metrics of every path that exists at the window's reference snapshot.
/// Paths whose snapshot is missing are dropped; loc == 0 leaves the density
/// absent. Both cases are reported.
std::vector<ArtifactMetrics> window_metrics(const MetricsInputs& in,
                                            const network::Window& window,
                                            Report& report);

void write_metrics_csv(std::ostream& out,
                       std::span<const ArtifactMetrics> rows);
std::vector<ArtifactMetrics> read_metrics_csv(std::istream& in);

}  // namespace stmc::metrics
