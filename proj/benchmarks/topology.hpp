#pragma once

#include <random>

#include "stmc/network.hpp"

// Random layered graph with the given vertex counts and edge densities.
inline stmc::network::Topology random_topology(std::uint32_t developers,
                                               std::uint32_t artifacts,
                                               double p_comm, double p_mod,
                                               double p_dep,
                                               std::uint64_t seed = 1) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution comm(p_comm), mod(p_mod), dep(p_dep);
  stmc::network::Topology t;
  t.developer_count = developers;
  t.artifact_count = artifacts;
  for (std::uint32_t i = 0; i < developers; ++i)
    for (std::uint32_t j = i + 1; j < developers; ++j)
      if (comm(gen)) t.comm.emplace_back(i, j);
  for (std::uint32_t d = 0; d < developers; ++d)
    for (std::uint32_t a = 0; a < artifacts; ++a)
      if (mod(gen)) t.mod.emplace_back(d, a);
  for (std::uint32_t i = 0; i < artifacts; ++i)
    for (std::uint32_t j = i + 1; j < artifacts; ++j)
      if (dep(gen)) t.dep.emplace_back(i, j);
  return t;
}
