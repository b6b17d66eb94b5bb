#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stmc/errors.hpp"
#include "stmc/identity.hpp"
#include "stmc/ingest.hpp"
#include "stmc/time.hpp"

// Time windows and the three-layer socio-technical graph built per window:
// developer communication, developer-artifact modification and
// artifact-artifact dependency.
namespace stmc::network {

struct WindowConfig {
  Duration width = days(90);
  Duration cochange_history = days(365);
  /// Overrides the derived origin (latest first-event across sources).
  std::optional<Timestamp> origin;

  /// Throws ConfigError unless width > 0 and cochange_history >= width.
  void validate() const;
};

/// Half-open interval [start, end).
struct Window {
  std::size_t index = 0;
  Timestamp start;
  Timestamp end;

  bool contains(Timestamp t) const { return start <= t && t < end; }
  bool operator==(const Window&) const = default;
};

/// Timestamps of one data source, used to place the window grid.
struct SourceEvents {
  std::string name;
  std::vector<Timestamp> times;
};

/// Contiguous windows of `cfg.width` from the origin (the latest among the
/// sources' first events) until the last event of any source. An empty
/// source raises ConfigError naming it.
std::vector<Window> build_windows(std::span<const SourceEvents> sources,
                                  const WindowConfig& cfg);

/// Index of the window holding `t`, if any.
std::optional<std::size_t> window_of(std::span<const Window> windows,
                                     Timestamp t);

// Layers keyed by domain identifiers. Unordered pairs are stored with
// first < second.
using PersonPair = std::pair<PersonId, PersonId>;
using ArtifactPair = std::pair<std::string, std::string>;
using CommLayer = std::map<PersonPair, std::uint32_t>;
using ModLayer = std::map<std::pair<PersonId, std::string>, std::uint32_t>;
using DepLayer = std::map<ArtifactPair, std::uint32_t>;

/// Commits with authored_at in [start, end).
std::vector<ingest::CommitRecord> commits_between(
    std::span<const ingest::CommitRecord> commits, Timestamp start,
    Timestamp end);

/// Edge (person, path) for every path a person's commits touch; the weight is
/// the number of such commits.
ModLayer build_mod_layer(std::span<const ingest::CommitRecord> commits,
                         const IdentityMap& identities);

enum class MailMode { thread_participants, direct_reply };

MailMode parse_mail_mode(std::string_view token);

/// Reply edges between message authors. A message's parent is the first of
/// In-Reply-To, then References (last to first), that names a message in the
/// given set; messages without a resolvable parent start a thread, and those
/// that named an unknown parent are counted in `dangling`.
CommLayer build_comm_layer_mail(std::span<const ingest::MailMessage> messages,
                                const IdentityMap& identities, MailMode mode,
                                std::size_t* dangling = nullptr);

/// Edge between every pair of distinct persons commenting on the same issue
/// within the window; weight = number of shared issues.
CommLayer build_comm_layer_issues(std::span<const ingest::IssueRecord> issues,
                                  const IdentityMap& identities,
                                  const Window& window);

/// Union of both layers, weights summed.
CommLayer merge_comm_layers(const CommLayer& a, const CommLayer& b);

struct CochangeOptions {
  std::size_t max_files = 50;
};

/// Edge between every two paths touched by the same commit; commits touching
/// more than `max_files` distinct paths contribute nothing and are counted in
/// `skipped`.
DepLayer build_dep_cochange(std::span<const ingest::CommitRecord> commits,
                            const CochangeOptions& options = {},
                            std::size_t* skipped = nullptr);

/// Dependency CSV with header "from,to" or "from,to,weight". Pairs are
/// symmetrized, self-pairs dropped. Unknown layouts raise DataError.
DepLayer import_dsm(std::istream& in);

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  std::uint32_t weight = 1;

  bool operator==(const Edge&) const = default;
};

/// Socio-technical graph of one window. Vertex lists are sorted; edges refer
/// to positions in them. comm and dep edges have u < v; mod edges have u a
/// developer position and v an artifact position. Edge lists are sorted.
struct STGraph {
  std::size_t window_index = 0;
  std::vector<PersonId> developers;
  std::vector<std::string> artifacts;
  std::vector<Edge> comm;
  std::vector<Edge> mod;
  std::vector<Edge> dep;

  bool operator==(const STGraph&) const = default;
};

/// Builds the graph; developers are persons with a mod or comm incidence,
/// artifacts are paths with a mod or dep incidence.
STGraph assemble_graph(std::size_t window_index, const CommLayer& comm,
                       const ModLayer& mod, const DepLayer& dep);

/// Checks every structural invariant; returns a description of the first
/// violation, or nullopt.
std::optional<std::string> check_invariants(const STGraph& g);

/// Unweighted index form of a graph, shared by motif counting and rewiring.
struct Topology {
  std::uint32_t developer_count = 0;
  std::uint32_t artifact_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> comm;  // u < v
  std::vector<std::pair<std::uint32_t, std::uint32_t>> mod;   // (dev, art)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dep;   // u < v

  bool operator==(const Topology&) const = default;
};

Topology topology_of(const STGraph& g);

/// Replaces the edges of `g` by those of `t` (weights reset to 1).
STGraph with_topology(const STGraph& g, const Topology& t);

struct DegreeSequence {
  std::vector<std::uint32_t> comm;
  std::vector<std::uint32_t> dep;
  std::vector<std::uint32_t> mod_developers;
  std::vector<std::uint32_t> mod_artifacts;

  bool operator==(const DegreeSequence&) const = default;
};

/// Per-layer degree lists sorted non-increasing; vertices without incident
/// edges in a layer are not listed for it.
DegreeSequence degree_sequences(const STGraph& g);

/// Writes vertices.csv (id,type) and comm.csv, mod.csv, dep.csv (u,v,weight)
/// into `dir`.
void write_graph(const std::filesystem::path& dir, const STGraph& g);
STGraph read_graph(const std::filesystem::path& dir, std::size_t window_index);

}  // namespace stmc::network
