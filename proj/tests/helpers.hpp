#pragma once

#include <cmath>
#include <cstdint>

#include "apc/ingest.hpp"

namespace apc::testing {

inline PartitionedSystem e1_system() {
  return partition_rows(Matrix::from_rows({{1, 0}, {1, 1}}), Vector{1, 2}, 2, Vector{1, 1});
}

// Square or tall N(0,1) system with a known solution, split into m blocks.
inline PartitionedSystem random_system(std::size_t n, std::size_t rows, std::size_t m, std::uint64_t seed,
                                       double mean = 0.0) {
  SyntheticSystem s = synth_gaussian(n, rows, mean, seed);
  return partition_rows(std::move(s.a), std::move(s.b), m, std::move(s.x_star));
}

inline bool close_rel(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::abs(want);
}

}  // namespace apc::testing
