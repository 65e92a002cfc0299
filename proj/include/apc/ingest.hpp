#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "apc/linalg.hpp"

namespace apc {

// ---------------------------------------------------------------------------
// Matrix Market

// Supported: "coordinate real general", "coordinate pattern general" (all
// listed entries become 1.0), "array real general". Coordinate input may be
// read with `integer` as a synonym for real. Complex, hermitian, symmetric
// and skew-symmetric files are rejected with UnsupportedFormat.
Matrix parse_matrix_market(std::istream& in);
Matrix parse_matrix_market(std::string_view text);

// Coordinate real general, nonzeros only, values in shortest round-trip form.
void write_matrix_market(std::ostream& out, const Matrix& m);
// Array real general, one column.
void write_matrix_market_vector(std::ostream& out, std::span<const double> v);

// Reads a right-hand side or solution vector: either a Matrix Market file
// with a single column, or whitespace-separated numbers.
Vector read_vector(std::istream& in);

// ---------------------------------------------------------------------------
// Random systems

// xoshiro256** seeded through splitmix64. Fixed for reproducible fixtures.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);
  std::uint64_t next();
  // Uniform on (0, 1]: 53 random bits.
  double uniform_open0();
  // Box-Muller; both outputs of each pair are used (cos first, then sin).
  double gaussian();

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_;
};

struct SyntheticSystem {
  Matrix a;
  Vector b;
  Vector x_star;
};

// A (rows x cols) with i.i.d. N(mean, 1) entries drawn row-major, then x*
// with i.i.d. N(0, 1) entries, and b = A x*.
SyntheticSystem synth_gaussian(std::size_t cols, std::size_t rows, double mean, std::uint64_t seed);

// Seeded x* and b = A x* for a matrix that ships without a right-hand side.
SyntheticSystem synth_rhs(Matrix a, std::uint64_t seed);

// Fisher-Yates row shuffle of (A, b) driven by the generator above.
void permute_rows(Matrix& a, Vector& b, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Partitioning

struct Block {
  Matrix a;
  Vector b;
};

struct PartitionedSystem {
  Matrix a;
  Vector b;
  std::size_t m = 0;
  std::size_t p = 0;
  std::vector<Block> blocks;
  std::optional<Vector> x_star;

  std::size_t rows() const noexcept { return a.rows(); }
  std::size_t cols() const noexcept { return a.cols(); }
};

// Contiguous blocks of p = N/m rows. Throws IndivisibleRows,
// RankDeficientBlock (naming the block) or InconsistentSystem when x_star
// does not satisfy A x* = b to 1e-8 relative.
PartitionedSystem partition_rows(Matrix a, Vector b, std::size_t m,
                                 std::optional<Vector> x_star = std::nullopt);

// Stack the blocks back into (A, b).
std::pair<Matrix, Vector> restack(const PartitionedSystem& sys);

}  // namespace apc
