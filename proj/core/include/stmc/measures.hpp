#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stmc/errors.hpp"
#include "stmc/metrics.hpp"
#include "stmc/motifs.hpp"

// The congruence measures r and l.
namespace stmc::measures {

/// r = 2 (AM - M) / (AM + M), with r(0, 0) = 0.
double motif_percent_diff(double antimotifs, double motifs);

/// l = (AM - M) / loc; nullopt when loc == 0.
std::optional<double> loc_norm_diff(double antimotifs, double motifs,
                                    double loc);

struct MeasureRecord {
  std::size_t window_index = 0;
  std::string scope;  // "global" or the artifact path
  motifs::Family family = motifs::Family::triangle;
  std::uint64_t motifs = 0;
  std::uint64_t antimotifs = 0;
  std::optional<std::size_t> loc;  // artifact scope only
  double r = 0;
  std::optional<double> l;

  bool is_global() const { return !loc.has_value(); }
  bool operator==(const MeasureRecord&) const = default;
};

inline constexpr std::string_view kGlobalScope = "global";

/// One global record per family, then one record per (artifact, family) for
/// artifacts with known loc. Artifacts with loc == 0 are omitted and
/// reported.
std::vector<MeasureRecord> window_measure_table(
    const motifs::ParticipationTable& participation,
    std::span<const metrics::ArtifactMetrics> metrics,
    const motifs::MotifCounts& counts, Report* report = nullptr);

void write_measures_csv(std::ostream& out,
                        std::span<const MeasureRecord> rows);
std::vector<MeasureRecord> read_measures_csv(std::istream& in);

}  // namespace stmc::measures
