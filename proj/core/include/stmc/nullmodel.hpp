#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stmc/motifs.hpp"
#include "stmc/network.hpp"

// Configuration-model significance tests for motif counts.
namespace stmc::nullmodel {

struct RewireConfig {
  std::uint32_t swaps_per_edge = 100;  // Q
  std::uint32_t replicates = 1000;     // N
  std::uint64_t master_seed = 0;

  /// Throws ConfigError unless Q >= 1 and N >= 2.
  void validate() const;
};

/// splitmix64-style mix of (master, window, replicate).
std::uint64_t replicate_seed(std::uint64_t master_seed,
                             std::uint64_t window_index,
                             std::uint64_t replicate);

/// mt19937_64 with a portable bounded draw, so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool coin() { return next() >> 63; }

 private:
  std::mt19937_64 engine_;
};

/// Degree-preserving double-edge swaps, Q * |E| attempts per layer, layers
/// processed in the order comm, mod, dep from one RNG stream. A swap is
/// rejected when it would create a self-loop or a duplicate edge.
network::Topology rewire(const network::Topology& t, std::uint64_t seed,
                         std::uint32_t swaps_per_edge);
network::STGraph rewire(const network::STGraph& g, std::uint64_t seed,
                        std::uint32_t swaps_per_edge = 100);

enum class Layer { comm, mod, dep };

/// |A ∩ B| / |A ∪ B| over one layer's edge sets; 1 for two empty layers.
double edge_jaccard(const network::Topology& a, const network::Topology& b,
                    Layer layer);

struct TTest {
  double t = 0;
  double p = 1;
};

/// Two-sided one-sample t-test of mean(sample) against `observed`; a
/// zero-variance sample gives p = 1 when its mean equals `observed` and
/// p = 0 otherwise. Throws Error for fewer than two samples.
TTest t_test_one_sample(std::span<const double> sample, double observed);

struct EmpiricalP {
  double upper = 1;  // (1 + #{x >= observed}) / (N + 1)
  double lower = 1;  // (1 + #{x <= observed}) / (N + 1)
  double p = 1;      // min(1, 2 * min(upper, lower))
};

EmpiricalP empirical_p(std::span<const double> sample, double observed);

struct NullDistribution {
  std::size_t window_index = 0;
  motifs::MotifKind kind = motifs::MotifKind::triangle_motif;
  std::vector<double> samples;
  double observed = 0;
  double mean = 0;
  double sd = 0;
  double t_statistic = 0;
  double p_t = 1;
  double p_empirical = 1;
};

/// Fills mean, sd and both p values from samples and observed.
void summarize(NullDistribution& d);

/// All four motif kinds from one set of N replicates. Replicate i of window
/// w is rewired with replicate_seed(master_seed, w, i), so the result does
/// not depend on `jobs`.
std::array<NullDistribution, 4> sample_null_all(
    const network::Topology& t, std::size_t window_index,
    motifs::Semantics semantics, const RewireConfig& cfg,
    std::size_t jobs = 1);

NullDistribution sample_null(const network::STGraph& g, motifs::MotifKind kind,
                             const RewireConfig& cfg,
                             motifs::Semantics semantics =
                                 motifs::Semantics::induced,
                             std::size_t jobs = 1);

struct EcdfPoint {
  double p = 0;
  double fraction = 0;  // share of values <= p

  bool operator==(const EcdfPoint&) const = default;
};

struct GroupedP {
  std::string group;
  double p = 0;
};

/// Step points (distinct p, fraction <= p) per group; empty groups do not
/// appear.
std::map<std::string, std::vector<EcdfPoint>> pvalue_ecdf(
    std::span<const GroupedP> values);

/// Value of a step function at x.
double ecdf_at(std::span<const EcdfPoint> curve, double x);

void write_nullmodel_csv(std::ostream& out,
                         std::span<const NullDistribution> rows);
/// Summary rows only (samples are not stored).
std::vector<NullDistribution> read_nullmodel_csv(std::istream& in);
void write_ecdf_csv(std::ostream& out,
                    const std::map<std::string, std::vector<EcdfPoint>>& ecdf);

}  // namespace stmc::nullmodel
