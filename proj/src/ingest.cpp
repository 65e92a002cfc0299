#include "apc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "apc/error.hpp"
#include "apc/format.hpp"

namespace apc {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::MalformedEntry,
                "line " + std::to_string(line_no) + ": bad value '" + std::string(tok) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::MalformedEntry,
                "line " + std::to_string(line_no) + ": bad integer '" + std::string(tok) + "'");
  }
  if (v < 0) {
    throw Error(ErrorCode::IndexOutOfBounds,
                "line " + std::to_string(line_no) + ": negative value " + std::to_string(v));
  }
  return static_cast<std::size_t>(v);
}

// Next non-comment, non-blank line; false at end of stream.
bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '%') continue;
    if (split_ws(line).empty()) continue;
    return true;
  }
  return false;
}

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

// ---------------------------------------------------------------------------
// Matrix Market

Matrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::UnsupportedFormat, "empty input");
  ++line_no;
  const auto header = split_ws(line);
  if (header.size() < 2 || header[0] != "%%MatrixMarket" || lower(std::string(header[1])) != "matrix") {
    throw Error(ErrorCode::UnsupportedFormat, "missing '%%MatrixMarket matrix' header");
  }
  if (header.size() != 5) {
    throw Error(ErrorCode::UnsupportedFormat, "header needs format, field and symmetry");
  }
  const std::string format = lower(std::string(header[2]));
  const std::string field = lower(std::string(header[3]));
  const std::string symmetry = lower(std::string(header[4]));

  if (format != "coordinate" && format != "array") {
    throw Error(ErrorCode::UnsupportedFormat, "format '" + format + "'");
  }
  if (field == "complex") throw Error(ErrorCode::UnsupportedFormat, "field 'complex' is not supported");
  if (field != "real" && field != "integer" && field != "pattern" && field != "double") {
    throw Error(ErrorCode::UnsupportedFormat, "field '" + field + "'");
  }
  if (field == "pattern" && format == "array") {
    throw Error(ErrorCode::UnsupportedFormat, "pattern field requires coordinate format");
  }
  if (symmetry != "general") {
    throw Error(ErrorCode::UnsupportedFormat, "symmetry qualifier '" + symmetry + "' is not supported");
  }

  if (!next_data_line(in, line, line_no)) throw Error(ErrorCode::MalformedEntry, "missing size line");
  const auto size_tok = split_ws(line);
  const std::size_t want = format == "coordinate" ? 3 : 2;
  if (size_tok.size() != want) {
    throw Error(ErrorCode::MalformedEntry,
                "line " + std::to_string(line_no) + ": size line needs " + std::to_string(want) + " fields");
  }
  const std::size_t rows = parse_index(size_tok[0], line_no);
  const std::size_t cols = parse_index(size_tok[1], line_no);
  Matrix m(rows, cols);

  if (format == "array") {
    // Column-major listing.
    const std::size_t total = rows * cols;
    std::size_t k = 0;
    while (k < total && next_data_line(in, line, line_no)) {
      const auto tok = split_ws(line);
      if (tok.size() != 1) {
        throw Error(ErrorCode::MalformedEntry, "line " + std::to_string(line_no) + ": expected one value");
      }
      m(k % rows, k / rows) = parse_real(tok[0], line_no);
      ++k;
    }
    if (k != total) {
      throw Error(ErrorCode::MalformedEntry,
                  "expected " + std::to_string(total) + " values, found " + std::to_string(k));
    }
    if (next_data_line(in, line, line_no)) {
      throw Error(ErrorCode::MalformedEntry, "line " + std::to_string(line_no) + ": trailing data");
    }
    return m;
  }

  const std::size_t nnz = parse_index(size_tok[2], line_no);
  const std::size_t arity = field == "pattern" ? 2 : 3;
  std::size_t k = 0;
  while (k < nnz && next_data_line(in, line, line_no)) {
    const auto tok = split_ws(line);
    if (tok.size() != arity) {
      throw Error(ErrorCode::MalformedEntry, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(arity) + " fields");
    }
    const std::size_t i = parse_index(tok[0], line_no);
    const std::size_t j = parse_index(tok[1], line_no);
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw Error(ErrorCode::IndexOutOfBounds, "line " + std::to_string(line_no) + ": (" +
                                                   std::to_string(i) + ", " + std::to_string(j) +
                                                   ") outside " + std::to_string(rows) + "x" +
                                                   std::to_string(cols));
    }
    const double v = field == "pattern" ? 1.0 : parse_real(tok[2], line_no);
    // Duplicate coordinates accumulate.
    m(i - 1, j - 1) += v;
    ++k;
  }
  if (k != nnz) {
    throw Error(ErrorCode::MalformedEntry,
                "expected " + std::to_string(nnz) + " entries, found " + std::to_string(k));
  }
  if (next_data_line(in, line, line_no)) {
    throw Error(ErrorCode::MalformedEntry, "line " + std::to_string(line_no) + ": trailing data");
  }
  return m;
}

Matrix parse_matrix_market(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& m) {
  std::size_t nnz = 0;
  for (double v : m.data()) nnz += v != 0.0;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(m(i, j)) << '\n';
}

void write_matrix_market_vector(std::ostream& out, std::span<const double> v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) out << format_double(x) << '\n';
}

Vector read_vector(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.rfind("%%MatrixMarket", 0) == 0) {
    const Matrix m = parse_matrix_market(text);
    if (m.cols() != 1 && m.rows() != 1) {
      throw Error(ErrorCode::InvalidDimensions, "vector file holds a " + std::to_string(m.rows()) +
                                                    "x" + std::to_string(m.cols()) + " matrix");
    }
    return Vector(m.data().begin(), m.data().end());
  }
  Vector out;
  std::size_t line_no = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && (line[0] == '%' || line[0] == '#')) continue;
    for (auto tok : split_ws(line)) out.push_back(parse_real(tok, line_no));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random systems

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform_open0() {
  return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
}

double Xoshiro256::gaussian() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform_open0();
  const double u2 = uniform_open0();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

SyntheticSystem synth_gaussian(std::size_t cols, std::size_t rows, double mean, std::uint64_t seed) {
  if (cols < 1 || rows < cols) {
    throw Error(ErrorCode::InvalidDimensions, "need N >= n >= 1, got n=" + std::to_string(cols) +
                                                  " N=" + std::to_string(rows));
  }
  Xoshiro256 rng(seed);
  SyntheticSystem sys;
  sys.a = Matrix(rows, cols);
  for (double& v : sys.a.data()) v = mean + rng.gaussian();
  sys.x_star.resize(cols);
  for (double& v : sys.x_star) v = rng.gaussian();
  sys.b = mat_vec(sys.a, sys.x_star);
  return sys;
}

SyntheticSystem synth_rhs(Matrix a, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  SyntheticSystem sys;
  sys.x_star.resize(a.cols());
  for (double& v : sys.x_star) v = rng.gaussian();
  sys.b = mat_vec(a, sys.x_star);
  sys.a = std::move(a);
  return sys;
}

void permute_rows(Matrix& a, Vector& b, std::uint64_t seed) {
  if (a.rows() != b.size()) throw Error(ErrorCode::DimensionMismatch, "A and b row counts differ");
  Xoshiro256 rng(seed);
  for (std::size_t i = a.rows(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    if (j == i - 1) continue;
    std::swap_ranges(a.row(i - 1).begin(), a.row(i - 1).end(), a.row(j).begin());
    std::swap(b[i - 1], b[j]);
  }
}

// ---------------------------------------------------------------------------
// Partitioning

PartitionedSystem partition_rows(Matrix a, Vector b, std::size_t m, std::optional<Vector> x_star) {
  const std::size_t rows = a.rows();
  if (b.size() != rows) {
    throw Error(ErrorCode::DimensionMismatch, "b has " + std::to_string(b.size()) + " entries, A has " +
                                                  std::to_string(rows) + " rows");
  }
  if (m == 0 || rows % m != 0) {
    throw Error(ErrorCode::IndivisibleRows,
                std::to_string(rows) + " rows cannot be split evenly across m=" + std::to_string(m));
  }
  const std::size_t p = rows / m;
  if (p > a.cols()) {
    throw Error(ErrorCode::RankDeficientBlock,
                "blocks of " + std::to_string(p) + " rows exceed n=" + std::to_string(a.cols()) +
                    " and cannot have full row rank (block 0)");
  }

  PartitionedSystem sys;
  sys.m = m;
  sys.p = p;
  sys.blocks.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Block blk{a.row_block(i * p, p), Vector(b.begin() + static_cast<std::ptrdiff_t>(i * p),
                                            b.begin() + static_cast<std::ptrdiff_t>((i + 1) * p))};
    const Vector eig = sym_eigs(gram_rows(blk.a));
    if (!(eig.front() > 1e-10 * eig.back())) {
      throw Error(ErrorCode::RankDeficientBlock,
                  "block " + std::to_string(i) + " is not full row rank (smallest eigenvalue of A_i A_i^T is " +
                      format_double(eig.front()) + ")");
    }
    sys.blocks.push_back(std::move(blk));
  }

  if (x_star) {
    if (x_star->size() != a.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "x* has " + std::to_string(x_star->size()) +
                                                    " entries, A has " + std::to_string(a.cols()) + " columns");
    }
    const Vector r = subtract(mat_vec(a, *x_star), b);
    if (norm2(r) > 1e-8 * norm2(b)) {
      throw Error(ErrorCode::InconsistentSystem, "||A x* - b|| = " + format_double(norm2(r)));
    }
  }
  sys.a = std::move(a);
  sys.b = std::move(b);
  sys.x_star = std::move(x_star);
  return sys;
}

std::pair<Matrix, Vector> restack(const PartitionedSystem& sys) {
  const std::size_t n = sys.blocks.empty() ? 0 : sys.blocks.front().a.cols();
  Matrix a(sys.m * sys.p, n);
  Vector b;
  b.reserve(sys.m * sys.p);
  std::size_t r = 0;
  for (const auto& blk : sys.blocks) {
    for (std::size_t i = 0; i < blk.a.rows(); ++i, ++r) std::ranges::copy(blk.a.row(i), a.row(r).begin());
    b.insert(b.end(), blk.b.begin(), blk.b.end());
  }
  return {std::move(a), std::move(b)};
}

}  // namespace apc
