#include "stmc/nullmodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

#include "stmc/csv.hpp"
#include "stmc/errors.hpp"
#include "stmc/parallel.hpp"

namespace stmc::nullmodel {

void RewireConfig::validate() const {
  if (swaps_per_edge < 1) throw ConfigError("swaps_per_edge must be >= 1");
  if (replicates < 2) throw ConfigError("replicates must be >= 2");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master_seed,
                             std::uint64_t window_index,
                             std::uint64_t replicate) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ window_index);
  return splitmix64(h ^ replicate);
}

__extension__ using u128 = unsigned __int128;

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's nearly divisionless method.
  u128 m = static_cast<u128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<u128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

// Open-addressing set of packed edges with backward-shift deletion.
class EdgeSet {
 public:
  explicit EdgeSet(std::size_t expected) {
    std::size_t cap = std::bit_ceil(std::max<std::size_t>(16, expected * 4));
    slots_.assign(cap, 0);
    mask_ = cap - 1;
    shift_ = 64 - static_cast<unsigned>(std::countr_zero(cap));
  }

  bool contains(std::uint64_t key) const {
    key += 1;
    for (std::size_t i = hash(key);; i = (i + 1) & mask_) {
      if (slots_[i] == key) return true;
      if (slots_[i] == 0) return false;
    }
  }

  void insert(std::uint64_t key) {
    key += 1;
    std::size_t i = hash(key);
    while (slots_[i] != 0 && slots_[i] != key) i = (i + 1) & mask_;
    slots_[i] = key;
  }

  void erase(std::uint64_t key) {
    key += 1;
    std::size_t i = hash(key);
    while (slots_[i] != key) {
      if (slots_[i] == 0) return;
      i = (i + 1) & mask_;
    }
    std::size_t j = i;
    while (true) {
      j = (j + 1) & mask_;
      if (slots_[j] == 0) break;
      std::size_t home = hash(slots_[j]);
      // Move slots_[j] into the hole at i if its home is not in (i, j].
      if (((j - home) & mask_) >= ((j - i) & mask_)) {
        slots_[i] = slots_[j];
        i = j;
      }
    }
    slots_[i] = 0;
  }

 private:
  // Fibonacci hashing; the top bits of the product depend on both halves
  // of the packed pair.
  std::size_t hash(std::uint64_t key) const {
    return static_cast<std::size_t>((key * 0x9e3779b97f4a7c15ULL) >> shift_);
  }

  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
  unsigned shift_ = 64;
};

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void swap_layer(EdgeList& edges, bool bipartite, std::uint64_t attempts,
                Rng& rng) {
  const std::size_t m = edges.size();
  if (m < 2) return;
  EdgeSet set(m);
  for (auto [u, v] : edges) set.insert(pack(u, v));
  for (std::uint64_t k = 0; k < attempts; ++k) {
    std::size_t i = rng.below(m);
    std::size_t j = rng.below(m - 1);
    if (j >= i) ++j;
    auto [u1, v1] = edges[i];
    auto [u2, v2] = edges[j];
    std::pair<std::uint32_t, std::uint32_t> e1, e2;
    if (bipartite) {
      e1 = {u1, v2};
      e2 = {u2, v1};
    } else {
      if (rng.coin()) std::swap(u2, v2);
      if (u1 == v2 || u2 == v1) continue;
      e1 = std::minmax(u1, v2);
      e2 = std::minmax(u2, v1);
    }
    if (e1 == e2) continue;
    std::uint64_t k1 = pack(e1.first, e1.second);
    std::uint64_t k2 = pack(e2.first, e2.second);
    if (set.contains(k1) || set.contains(k2)) continue;
    set.erase(pack(edges[i].first, edges[i].second));
    set.erase(pack(edges[j].first, edges[j].second));
    set.insert(k1);
    set.insert(k2);
    edges[i] = e1;
    edges[j] = e2;
  }
}

}  // namespace

network::Topology rewire(const network::Topology& t, std::uint64_t seed,
                         std::uint32_t swaps_per_edge) {
  network::Topology out = t;
  Rng rng(seed);
  swap_layer(out.comm, false,
             static_cast<std::uint64_t>(swaps_per_edge) * out.comm.size(), rng);
  swap_layer(out.mod, true,
             static_cast<std::uint64_t>(swaps_per_edge) * out.mod.size(), rng);
  swap_layer(out.dep, false,
             static_cast<std::uint64_t>(swaps_per_edge) * out.dep.size(), rng);
  std::sort(out.comm.begin(), out.comm.end());
  std::sort(out.mod.begin(), out.mod.end());
  std::sort(out.dep.begin(), out.dep.end());
  return out;
}

network::STGraph rewire(const network::STGraph& g, std::uint64_t seed,
                        std::uint32_t swaps_per_edge) {
  return network::with_topology(
      g, rewire(network::topology_of(g), seed, swaps_per_edge));
}

double edge_jaccard(const network::Topology& a, const network::Topology& b,
                    Layer layer) {
  auto pick = [layer](const network::Topology& t) {
    EdgeList e = layer == Layer::comm  ? t.comm
                 : layer == Layer::mod ? t.mod
                                       : t.dep;
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  };
  auto ea = pick(a), eb = pick(b);
  EdgeList common;
  std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(),
                        std::back_inserter(common));
  std::size_t uni = ea.size() + eb.size() - common.size();
  return uni == 0 ? 1.0 : static_cast<double>(common.size()) / uni;
}

TTest t_test_one_sample(std::span<const double> sample, double observed) {
  const std::size_t n = sample.size();
  if (n < 2) throw Error("t-test needs at least two samples");
  double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTest r;
  if (sd == 0) {
    if (mean == observed) {
      r.t = 0;
      r.p = 1;
    } else {
      r.t = mean > observed ? INFINITY : -INFINITY;
      r.p = 0;
    }
    return r;
  }
  r.t = (mean - observed) / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  r.p = std::min(1.0, 2 * boost::math::cdf(boost::math::complement(
                              dist, std::fabs(r.t))));
  return r;
}

EmpiricalP empirical_p(std::span<const double> sample, double observed) {
  std::size_t ge = 0, le = 0;
  for (double x : sample) {
    if (x >= observed) ++ge;
    if (x <= observed) ++le;
  }
  const double denom = static_cast<double>(sample.size() + 1);
  EmpiricalP r;
  r.upper = (1.0 + ge) / denom;
  r.lower = (1.0 + le) / denom;
  r.p = std::min(1.0, 2 * std::min(r.upper, r.lower));
  return r;
}

void summarize(NullDistribution& d) {
  const auto& s = d.samples;
  const double n = static_cast<double>(s.size());
  d.mean = s.empty() ? 0 : std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0;
  for (double x : s) ss += (x - d.mean) * (x - d.mean);
  d.sd = s.size() > 1 ? std::sqrt(ss / (n - 1)) : 0;
  if (s.size() >= 2) {
    auto t = t_test_one_sample(s, d.observed);
    d.t_statistic = t.t;
    d.p_t = t.p;
  }
  if (!s.empty()) d.p_empirical = empirical_p(s, d.observed).p;
}

std::array<NullDistribution, 4> sample_null_all(
    const network::Topology& t, std::size_t window_index,
    motifs::Semantics semantics, const RewireConfig& cfg, std::size_t jobs) {
  cfg.validate();
  std::vector<motifs::MotifCounts> counts(cfg.replicates);
  parallel_for(cfg.replicates, jobs, [&](std::size_t i) {
    auto seed = replicate_seed(cfg.master_seed, window_index, i);
    counts[i] = motifs::count_motifs(rewire(t, seed, cfg.swaps_per_edge),
                                     semantics, window_index);
  });
  auto observed = motifs::count_motifs(t, semantics, window_index);
  std::array<NullDistribution, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    auto kind = motifs::kAllKinds[k];
    auto& d = out[k];
    d.window_index = window_index;
    d.kind = kind;
    d.observed = static_cast<double>(observed.get(kind));
    d.samples.reserve(counts.size());
    for (const auto& c : counts)
      d.samples.push_back(static_cast<double>(c.get(kind)));
    summarize(d);
  }
  return out;
}

NullDistribution sample_null(const network::STGraph& g, motifs::MotifKind kind,
                             const RewireConfig& cfg,
                             motifs::Semantics semantics, std::size_t jobs) {
  auto all = sample_null_all(network::topology_of(g), g.window_index,
                             semantics, cfg, jobs);
  for (auto& d : all)
    if (d.kind == kind) return std::move(d);
  return {};
}

std::map<std::string, std::vector<EcdfPoint>> pvalue_ecdf(
    std::span<const GroupedP> values) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& v : values) groups[v.group].push_back(v.p);
  std::map<std::string, std::vector<EcdfPoint>> out;
  for (auto& [group, ps] : groups) {
    std::sort(ps.begin(), ps.end());
    std::vector<EcdfPoint> curve;
    const double n = static_cast<double>(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i + 1 < ps.size() && ps[i + 1] == ps[i]) continue;
      curve.push_back({ps[i], static_cast<double>(i + 1) / n});
    }
    out.emplace(group, std::move(curve));
  }
  return out;
}

double ecdf_at(std::span<const EcdfPoint> curve, double x) {
  double f = 0;
  for (const auto& pt : curve) {
    if (pt.p > x) break;
    f = pt.fraction;
  }
  return f;
}

namespace {
const csv::Row kNullHeader = {"window", "kind", "observed", "mean",
                              "sd",     "t",    "p_t",      "p_empirical"};

motifs::MotifKind parse_kind(const std::string& s) {
  for (auto k : motifs::kAllKinds)
    if (motifs::to_string(k) == s) return k;
  throw DataError("unknown motif kind '" + s + "'");
}
}  // namespace

void write_nullmodel_csv(std::ostream& out,
                         std::span<const NullDistribution> rows) {
  csv::Writer w(out);
  w.row(kNullHeader);
  for (const auto& d : rows) {
    w.field(d.window_index)
        .field(motifs::to_string(d.kind))
        .field(d.observed)
        .field(d.mean)
        .field(d.sd)
        .field(d.t_statistic)
        .field(d.p_t)
        .field(d.p_empirical);
    w.end_row();
  }
}

std::vector<NullDistribution> read_nullmodel_csv(std::istream& in) {
  auto rows = csv::parse(in);
  if (rows.empty() || rows.front() != kNullHeader)
    throw DataError("nullmodel csv: unexpected header");
  std::vector<NullDistribution> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != kNullHeader.size())
      throw FormatError("nullmodel csv", r + 1, "wrong field count");
    NullDistribution d;
    d.window_index = std::stoull(f[0]);
    d.kind = parse_kind(f[1]);
    d.observed = csv::parse_double(f[2]);
    d.mean = csv::parse_double(f[3]);
    d.sd = csv::parse_double(f[4]);
    d.t_statistic = csv::parse_double(f[5]);
    d.p_t = csv::parse_double(f[6]);
    d.p_empirical = csv::parse_double(f[7]);
    out.push_back(std::move(d));
  }
  return out;
}

void write_ecdf_csv(std::ostream& out,
                    const std::map<std::string, std::vector<EcdfPoint>>& ecdf) {
  csv::Writer w(out);
  w.row({"group", "p", "fraction"});
  for (const auto& [group, curve] : ecdf)
    for (const auto& pt : curve) {
      w.field(group).field(pt.p).field(pt.fraction);
      w.end_row();
    }
}

}  // namespace stmc::nullmodel
