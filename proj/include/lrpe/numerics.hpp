#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrpe {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;
using RealVec = std::vector<double>;

/// Thrown when operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Seeded pseudo-random stream.
///
/// The pipeline is fixed so that every implementation samples the same
/// values for the same seed:
///   1. the seed is expanded with one SplitMix64 step into the generator state
///      (a zero result is replaced by the SplitMix64 increment);
///   2. raw 64-bit words come from xorshift64* (shifts 12, 25, 27, multiplier
///      0x2545F4914F6CDD1D);
///   3. uniforms are ((word >> 11) + 0.5) * 2^-53, strictly inside (0, 1);
///   4. normals are Box-Muller on consecutive uniform pairs (u1, u2):
///      r = sqrt(-2 ln u1), emitted as r cos(2 pi u2) then r sin(2 pi u2).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_uniform();
  double next_normal();
  /// Uniform integer in [0, bound). Multiply-shift reduction of next_u64.
  std::uint64_t next_below(std::uint64_t bound);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One SplitMix64 output for `x`.
std::uint64_t splitmix64(std::uint64_t x);

/// Dense row-major matrix over real or complex doubles.
///
/// Real and imaginary parts live in separate planes. A real-only matrix has
/// no imaginary plane at all, so its imaginary parts are exactly zero and
/// real arithmetic never touches one. Writing a value with a nonzero
/// imaginary part into a real matrix promotes it to complex.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, bool complex = false);

  static Mat zeros(std::size_t rows, std::size_t cols, bool complex = false) {
    return Mat(rows, cols, complex);
  }
  static Mat identity(std::size_t n);
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Mat from_complex_rows(
      std::initializer_list<std::initializer_list<Complex>> rows);
  static Mat column(std::span<const Complex> values);
  static Mat column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  bool is_real() const { return im_.empty(); }
  bool is_complex() const { return !im_.empty(); }

  Complex operator()(std::size_t i, std::size_t j) const {
    const std::size_t idx = i * cols_ + j;
    return {re_[idx], im_.empty() ? 0.0 : im_[idx]};
  }
  double re(std::size_t i, std::size_t j) const { return re_[i * cols_ + j]; }
  double im(std::size_t i, std::size_t j) const {
    return im_.empty() ? 0.0 : im_[i * cols_ + j];
  }

  void set(std::size_t i, std::size_t j, Complex value);
  void set(std::size_t i, std::size_t j, double value) {
    re_[i * cols_ + j] = value;
    if (!im_.empty()) im_[i * cols_ + j] = 0.0;
  }

  /// Allocates the imaginary plane (zero-filled) if absent.
  void make_complex();

  std::span<double> real_data() { return re_; }
  std::span<const double> real_data() const { return re_; }
  /// Empty for real-only matrices.
  std::span<double> imag_data() { return im_; }
  std::span<const double> imag_data() const { return im_; }

  std::span<double> real_row(std::size_t i) {
    return std::span<double>(re_).subspan(i * cols_, cols_);
  }
  std::span<const double> real_row(std::size_t i) const {
    return std::span<const double>(re_).subspan(i * cols_, cols_);
  }
  std::span<double> imag_row(std::size_t i) {
    if (im_.empty()) return {};
    return std::span<double>(im_).subspan(i * cols_, cols_);
  }
  std::span<const double> imag_row(std::size_t i) const {
    if (im_.empty()) return {};
    return std::span<const double>(im_).subspan(i * cols_, cols_);
  }

  ComplexVec row(std::size_t i) const;
  ComplexVec col(std::size_t j) const;

  /// Copy with the imaginary plane dropped.
  Mat real_part() const;
  Mat as_complex() const;

  bool operator==(const Mat& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> re_;
  std::vector<double> im_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat conj_transpose(const Mat& a);
Mat transpose(const Mat& a);
double fro_norm(const Mat& a);

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(Complex scale, const Mat& a);
Mat operator*(double scale, const Mat& a);

/// fro_norm(a - b) without materializing the difference.
double fro_distance(const Mat& a, const Mat& b);

/// Standard-normal entries drawn row-major from `rng`. Always real.
Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols);
ComplexVec random_complex_vec(Rng& rng, std::size_t n);
RealVec random_real_vec(Rng& rng, std::size_t n);

/// conj(a)^T b.
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
ComplexVec to_complex(std::span<const double> x);

}  // namespace lrpe
