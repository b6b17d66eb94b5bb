#pragma once

// Random socio-technical graphs and an exhaustive motif enumerator used as
// the reference for the fast counters.

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "stmc/motifs.hpp"
#include "stmc/network.hpp"

namespace stmc::testkit {

inline network::STGraph random_graph(std::mt19937_64& gen, std::uint32_t max_dev,
                                     std::uint32_t max_art) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::uint32_t nd = 1 + static_cast<std::uint32_t>(gen() % max_dev);
  const std::uint32_t na = 1 + static_cast<std::uint32_t>(gen() % max_art);
  const double pc = u(gen), pm = u(gen), pd = u(gen);
  network::STGraph g;
  for (std::uint32_t d = 0; d < nd; ++d) g.developers.push_back(d);
  for (std::uint32_t a = 0; a < na; ++a) g.artifacts.push_back("f" + std::to_string(a));
  for (std::uint32_t i = 0; i < nd; ++i)
    for (std::uint32_t j = i + 1; j < nd; ++j)
      if (u(gen) < pc) g.comm.push_back({i, j, 1});
  for (std::uint32_t d = 0; d < nd; ++d)
    for (std::uint32_t a = 0; a < na; ++a)
      if (u(gen) < pm) g.mod.push_back({d, a, 1});
  for (std::uint32_t i = 0; i < na; ++i)
    for (std::uint32_t j = i + 1; j < na; ++j)
      if (u(gen) < pd) g.dep.push_back({i, j, 1});
  return g;
}

struct Enumerated {
  motifs::MotifCounts counts;
  std::vector<motifs::Participation> participation;
};

// Visits every developer pair with every artifact (triangles) and every
// 4-vertex set {d1, d2, a1, a2} (squares), checking both role assignments.
inline Enumerated enumerate_motifs(const network::STGraph& g,
                                   motifs::Semantics semantics) {
  const auto nd = g.developers.size(), na = g.artifacts.size();
  std::vector<std::vector<bool>> comm(nd, std::vector<bool>(nd));
  std::vector<std::vector<bool>> mod(nd, std::vector<bool>(na));
  std::vector<std::vector<bool>> dep(na, std::vector<bool>(na));
  for (const auto& e : g.comm) comm[e.u][e.v] = comm[e.v][e.u] = true;
  for (const auto& e : g.mod) mod[e.u][e.v] = true;
  for (const auto& e : g.dep) dep[e.u][e.v] = dep[e.v][e.u] = true;

  Enumerated out;
  out.counts.semantics = semantics;
  out.participation.resize(na);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t d1 = 0; d1 < nd; ++d1)
      for (std::size_t d2 = d1 + 1; d2 < nd; ++d2) {
        if (!mod[d1][a] || !mod[d2][a]) continue;
        if (comm[d1][d2]) {
          ++out.counts.triangle_motifs;
          ++out.participation[a].triangle_motif;
        } else {
          ++out.counts.triangle_antimotifs;
          ++out.participation[a].triangle_antimotif;
        }
      }
  auto fits = [&](std::size_t x, std::size_t ax, std::size_t y, std::size_t ay) {
    if (!mod[x][ax] || !mod[y][ay]) return false;
    if (semantics == motifs::Semantics::partial) return true;
    return !mod[x][ay] && !mod[y][ax];
  };
  for (std::size_t a1 = 0; a1 < na; ++a1)
    for (std::size_t a2 = a1 + 1; a2 < na; ++a2) {
      if (!dep[a1][a2]) continue;
      for (std::size_t d1 = 0; d1 < nd; ++d1)
        for (std::size_t d2 = d1 + 1; d2 < nd; ++d2) {
          if (!fits(d1, a1, d2, a2) && !fits(d1, a2, d2, a1)) continue;
          if (comm[d1][d2]) {
            ++out.counts.square_motifs;
            ++out.participation[a1].square_motif;
            ++out.participation[a2].square_motif;
          } else {
            ++out.counts.square_antimotifs;
            ++out.participation[a1].square_antimotif;
            ++out.participation[a2].square_antimotif;
          }
        }
    }
  return out;
}

// First way in which `after` fails to be a degree-preserving, simple,
// type-correct rewiring of `before`, or nullopt.
inline std::optional<std::string> rewire_violation(const network::Topology& before,
                                                   const network::Topology& after) {
  using Pairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  auto check = [](const Pairs& a, const Pairs& b, std::uint32_t nu, std::uint32_t nv,
                  bool bipartite, const char* name) -> std::optional<std::string> {
    if (a.size() != b.size()) return std::string(name) + ": edge count changed";
    std::vector<int> du(nu), dv(bipartite ? nv : nu);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (auto [u, v] : a) {
      ++du[u];
      ++(bipartite ? dv[v] : du[v]);
    }
    for (auto [u, v] : b) {
      if (u >= nu || v >= (bipartite ? nv : nu)) return std::string(name) + ": vertex out of range";
      if (!bipartite && u == v) return std::string(name) + ": self-loop";
      auto key = bipartite ? std::pair(u, v) : std::pair(std::min(u, v), std::max(u, v));
      if (!seen.insert(key).second) return std::string(name) + ": duplicate edge";
      --du[u];
      --(bipartite ? dv[v] : du[v]);
    }
    for (int d : du) if (d) return std::string(name) + ": degree changed";
    for (int d : dv) if (d) return std::string(name) + ": degree changed";
    return std::nullopt;
  };
  if (before.developer_count != after.developer_count ||
      before.artifact_count != after.artifact_count)
    return "vertex counts changed";
  if (auto e = check(before.comm, after.comm, before.developer_count, 0, false, "comm")) return e;
  if (auto e = check(before.mod, after.mod, before.developer_count, before.artifact_count, true, "mod")) return e;
  return check(before.dep, after.dep, before.artifact_count, 0, false, "dep");
}

}  // namespace stmc::testkit
