#include "stmc/motifs.hpp"

#include <algorithm>

#include "stmc/errors.hpp"

namespace stmc::motifs {
namespace {

// Dense adjacency up to this many developers (16384^2 bits = 32 MiB).
constexpr std::uint32_t kDenseLimit = 16384;

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

Semantics parse_semantics(std::string_view token) {
  if (token == "induced") return Semantics::induced;
  if (token == "partial") return Semantics::partial;
  throw ConfigError("unknown motif semantics '" + std::string(token) + "'");
}

std::string_view to_string(Semantics s) {
  return s == Semantics::induced ? "induced" : "partial";
}

std::string_view to_string(Family f) {
  return f == Family::triangle ? "triangle" : "square";
}

std::string_view to_string(MotifKind k) {
  switch (k) {
    case MotifKind::triangle_motif: return "triangle_motif";
    case MotifKind::triangle_antimotif: return "triangle_antimotif";
    case MotifKind::square_motif: return "square_motif";
    case MotifKind::square_antimotif: return "square_antimotif";
  }
  return "?";
}

std::uint64_t MotifCounts::get(MotifKind k) const {
  switch (k) {
    case MotifKind::triangle_motif: return triangle_motifs;
    case MotifKind::triangle_antimotif: return triangle_antimotifs;
    case MotifKind::square_motif: return square_motifs;
    case MotifKind::square_antimotif: return square_antimotifs;
  }
  return 0;
}

MotifCounter::MotifCounter(const network::Topology& t)
    : developer_count_(t.developer_count),
      artifact_count_(t.artifact_count),
      dep_(t.dep),
      dense_(t.developer_count <= kDenseLimit) {
  modifier_offsets_.assign(artifact_count_ + 1, 0);
  for (auto [d, a] : t.mod) ++modifier_offsets_[a + 1];
  for (std::uint32_t a = 0; a < artifact_count_; ++a)
    modifier_offsets_[a + 1] += modifier_offsets_[a];
  modifiers_.resize(t.mod.size());
  std::vector<std::uint32_t> fill(modifier_offsets_.begin(),
                                  modifier_offsets_.end() - 1);
  for (auto [d, a] : t.mod) modifiers_[fill[a]++] = d;
  for (std::uint32_t a = 0; a < artifact_count_; ++a)
    std::sort(modifiers_.begin() + modifier_offsets_[a],
              modifiers_.begin() + modifier_offsets_[a + 1]);

  if (dense_) {
    const std::uint64_t n = developer_count_;
    comm_bits_.assign((n * n + 63) / 64, 0);
    for (auto [u, v] : t.comm) {
      std::uint64_t i = static_cast<std::uint64_t>(u) * n + v;
      std::uint64_t j = static_cast<std::uint64_t>(v) * n + u;
      comm_bits_[i >> 6] |= std::uint64_t{1} << (i & 63);
      comm_bits_[j >> 6] |= std::uint64_t{1} << (j & 63);
    }
  } else {
    comm_keys_.reserve(t.comm.size());
    for (auto [u, v] : t.comm) comm_keys_.push_back(pair_key(u, v));
    std::sort(comm_keys_.begin(), comm_keys_.end());
  }
}

bool MotifCounter::communicates(std::uint32_t a, std::uint32_t b) const {
  if (dense_) {
    std::uint64_t i = static_cast<std::uint64_t>(a) * developer_count_ + b;
    return (comm_bits_[i >> 6] >> (i & 63)) & 1u;
  }
  return std::binary_search(comm_keys_.begin(), comm_keys_.end(),
                            pair_key(a, b));
}

std::pair<std::uint64_t, std::uint64_t> MotifCounter::triangles(
    std::vector<Participation>* participation) const {
  std::uint64_t motifs = 0, anti = 0;
  for (std::uint32_t a = 0; a < artifact_count_; ++a) {
    const auto* begin = modifiers_.data() + modifier_offsets_[a];
    const auto* end = modifiers_.data() + modifier_offsets_[a + 1];
    std::uint64_t m = 0, am = 0;
    for (const auto* i = begin; i != end; ++i)
      for (const auto* j = i + 1; j != end; ++j)
        communicates(*i, *j) ? ++m : ++am;
    motifs += m;
    anti += am;
    if (participation) {
      (*participation)[a].triangle_motif += m;
      (*participation)[a].triangle_antimotif += am;
    }
  }
  return {motifs, anti};
}

std::pair<std::uint64_t, std::uint64_t> MotifCounter::squares(
    Semantics semantics, std::vector<Participation>* participation) const {
  std::uint64_t motifs = 0, anti = 0;
  std::vector<std::uint32_t> only_first, only_second, shared;
  for (auto [a1, a2] : dep_) {
    const auto* b1 = modifiers_.data() + modifier_offsets_[a1];
    const auto* e1 = modifiers_.data() + modifier_offsets_[a1 + 1];
    const auto* b2 = modifiers_.data() + modifier_offsets_[a2];
    const auto* e2 = modifiers_.data() + modifier_offsets_[a2 + 1];
    std::uint64_t m = 0, am = 0;
    if (semantics == Semantics::induced) {
      only_first.clear();
      only_second.clear();
      std::set_difference(b1, e1, b2, e2, std::back_inserter(only_first));
      std::set_difference(b2, e2, b1, e1, std::back_inserter(only_second));
      for (auto d1 : only_first)
        for (auto d2 : only_second) communicates(d1, d2) ? ++m : ++am;
    } else {
      shared.clear();
      std::set_intersection(b1, e1, b2, e2, std::back_inserter(shared));
      auto in_shared = [&](std::uint32_t d) {
        return std::binary_search(shared.begin(), shared.end(), d);
      };
      for (const auto* i = b1; i != e1; ++i) {
        bool i_shared = in_shared(*i);
        for (const auto* j = b2; j != e2; ++j) {
          if (*i == *j) continue;
          // Both assignments qualify when both developers touch both
          // artifacts; count that vertex set once.
          if (i_shared && *i > *j && in_shared(*j)) continue;
          communicates(*i, *j) ? ++m : ++am;
        }
      }
    }
    motifs += m;
    anti += am;
    if (participation) {
      (*participation)[a1].square_motif += m;
      (*participation)[a1].square_antimotif += am;
      (*participation)[a2].square_motif += m;
      (*participation)[a2].square_antimotif += am;
    }
  }
  return {motifs, anti};
}

std::pair<std::uint64_t, std::uint64_t> count_triangles(
    const network::STGraph& g) {
  return MotifCounter(network::topology_of(g)).triangles();
}

std::pair<std::uint64_t, std::uint64_t> count_squares(
    const network::STGraph& g, Semantics semantics) {
  return MotifCounter(network::topology_of(g)).squares(semantics);
}

MotifCounts count_motifs(const network::Topology& t, Semantics semantics,
                         std::size_t window_index) {
  MotifCounter counter(t);
  MotifCounts c;
  c.window_index = window_index;
  c.semantics = semantics;
  std::tie(c.triangle_motifs, c.triangle_antimotifs) = counter.triangles();
  std::tie(c.square_motifs, c.square_antimotifs) = counter.squares(semantics);
  return c;
}

MotifCounts count_motifs(const network::STGraph& g, Semantics semantics) {
  return count_motifs(network::topology_of(g), semantics, g.window_index);
}

std::pair<MotifCounts, ParticipationTable> count_with_participation(
    const network::STGraph& g, Semantics semantics) {
  MotifCounter counter(network::topology_of(g));
  ParticipationTable table;
  table.artifacts = g.artifacts;
  table.rows.resize(g.artifacts.size());
  MotifCounts c;
  c.window_index = g.window_index;
  c.semantics = semantics;
  std::tie(c.triangle_motifs, c.triangle_antimotifs) =
      counter.triangles(&table.rows);
  std::tie(c.square_motifs, c.square_antimotifs) =
      counter.squares(semantics, &table.rows);
  return {c, std::move(table)};
}

ParticipationTable participation(const network::STGraph& g,
                                 Semantics semantics) {
  return count_with_participation(g, semantics).second;
}

}  // namespace stmc::motifs
