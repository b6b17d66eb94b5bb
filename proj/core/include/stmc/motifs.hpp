#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stmc/network.hpp"

// Triangle and square socio-technical motifs.
//
// Triangle: two developers modify one artifact. Square: two developers each
// modify one of two dependent artifacts. The pattern is a motif when the two
// developers communicate and an anti-motif when they do not.
namespace stmc::motifs {

/// induced: the developer/artifact cross pairs of a square must be non-edges
/// (d1 does not modify a2, d2 does not modify a1). partial: only the pattern
/// edges are required; each vertex set is counted once.
enum class Semantics { induced, partial };

Semantics parse_semantics(std::string_view token);
std::string_view to_string(Semantics s);

enum class Family { triangle, square };
std::string_view to_string(Family f);

enum class MotifKind { triangle_motif, triangle_antimotif, square_motif,
                       square_antimotif };
inline constexpr std::array<MotifKind, 4> kAllKinds = {
    MotifKind::triangle_motif, MotifKind::triangle_antimotif,
    MotifKind::square_motif, MotifKind::square_antimotif};
std::string_view to_string(MotifKind k);

struct MotifCounts {
  std::size_t window_index = 0;
  std::uint64_t triangle_motifs = 0;
  std::uint64_t triangle_antimotifs = 0;
  std::uint64_t square_motifs = 0;
  std::uint64_t square_antimotifs = 0;
  Semantics semantics = Semantics::induced;

  std::uint64_t get(MotifKind k) const;
  bool operator==(const MotifCounts&) const = default;
};

/// Occurrences of one artifact in each pattern.
struct Participation {
  std::uint64_t triangle_motif = 0;
  std::uint64_t triangle_antimotif = 0;
  std::uint64_t square_motif = 0;
  std::uint64_t square_antimotif = 0;

  bool operator==(const Participation&) const = default;
};

/// Rows align with STGraph::artifacts.
struct ParticipationTable {
  std::vector<std::string> artifacts;
  std::vector<Participation> rows;

  bool operator==(const ParticipationTable&) const = default;
};

/// Motif counting over an index-form graph. Construction builds the lookup
/// structures once; the counting calls are const and may run concurrently.
class MotifCounter {
 public:
  explicit MotifCounter(const network::Topology& topology);

  /// (motifs, anti-motifs)
  std::pair<std::uint64_t, std::uint64_t> triangles(
      std::vector<Participation>* participation = nullptr) const;
  std::pair<std::uint64_t, std::uint64_t> squares(
      Semantics semantics,
      std::vector<Participation>* participation = nullptr) const;

  bool communicates(std::uint32_t a, std::uint32_t b) const;

 private:
  std::uint32_t developer_count_;
  std::uint32_t artifact_count_;
  std::vector<std::uint32_t> modifier_offsets_;  // CSR over artifacts
  std::vector<std::uint32_t> modifiers_;         // sorted per artifact
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dep_;
  std::vector<std::uint64_t> comm_bits_;         // dense when small
  std::vector<std::uint64_t> comm_keys_;         // sorted keys otherwise
  bool dense_;
};

std::pair<std::uint64_t, std::uint64_t> count_triangles(
    const network::STGraph& g);
std::pair<std::uint64_t, std::uint64_t> count_squares(
    const network::STGraph& g, Semantics semantics = Semantics::induced);

MotifCounts count_motifs(const network::STGraph& g,
                         Semantics semantics = Semantics::induced);
MotifCounts count_motifs(const network::Topology& t, Semantics semantics,
                         std::size_t window_index = 0);

ParticipationTable participation(const network::STGraph& g,
                                 Semantics semantics = Semantics::induced);

/// Counts and participation from one pass.
std::pair<MotifCounts, ParticipationTable> count_with_participation(
    const network::STGraph& g, Semantics semantics = Semantics::induced);

}  // namespace stmc::motifs
