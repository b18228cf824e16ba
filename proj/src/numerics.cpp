#include "lrpe/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lrpe {

namespace {

constexpr std::uint64_t kSplitMixIncrement = 0x9E3779B97F4A7C15ULL;

std::string shape_str(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                         " vs " + shape_str(b));
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kSplitMixIncrement;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), state_(splitmix64(seed)) {
  if (state_ == 0) state_ = kSplitMixIncrement;
}

std::uint64_t Rng::next_u64() {
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545F4914F6CDD1DULL;
}

double Rng::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::next_below: zero bound");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

Mat::Mat(std::size_t rows, std::size_t cols, bool complex)
    : rows_(rows), cols_(cols), re_(rows * cols, 0.0) {
  if (complex) im_.assign(rows * cols, 0.0);
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.re_[i * n + i] = 1.0;
  return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Mat m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Mat::from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m.re_[i * c + j++] = v;
    ++i;
  }
  return m;
}

Mat Mat::from_complex_rows(
    std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Mat m(r, c, true);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Mat::from_complex_rows: ragged rows");
    std::size_t j = 0;
    for (Complex v : row) {
      m.re_[i * c + j] = v.real();
      m.im_[i * c + j] = v.imag();
      ++j;
    }
    ++i;
  }
  return m;
}

Mat Mat::column(std::span<const Complex> values) {
  Mat m(values.size(), 1, true);
  for (std::size_t i = 0; i < values.size(); ++i) {
    m.re_[i] = values[i].real();
    m.im_[i] = values[i].imag();
  }
  return m;
}

Mat Mat::column(std::span<const double> values) {
  Mat m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m.re_[i] = values[i];
  return m;
}

void Mat::set(std::size_t i, std::size_t j, Complex value) {
  const std::size_t idx = i * cols_ + j;
  if (im_.empty() && value.imag() != 0.0) make_complex();
  re_[idx] = value.real();
  if (!im_.empty()) im_[idx] = value.imag();
}

void Mat::make_complex() {
  if (im_.empty()) im_.assign(rows_ * cols_, 0.0);
}

ComplexVec Mat::row(std::size_t i) const {
  ComplexVec out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

ComplexVec Mat::col(std::size_t j) const {
  ComplexVec out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Mat Mat::real_part() const {
  Mat m(rows_, cols_);
  m.re_ = re_;
  return m;
}

Mat Mat::as_complex() const {
  Mat m = *this;
  m.make_complex();
  return m;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ (" + shape_str(a) +
                         " * " + shape_str(b) + ")");
  }
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  const std::size_t inner_dim = a.cols();
  const bool complex = a.is_complex() || b.is_complex();
  Mat c(n, m, complex);

  auto are = a.real_data();
  auto bre = b.real_data();
  auto cre = c.real_data();
  if (!complex) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < inner_dim; ++p) {
        const double x = are[i * inner_dim + p];
        if (x == 0.0) continue;
        const double* brow = bre.data() + p * m;
        double* crow = cre.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) crow[j] += x * brow[j];
      }
    }
    return c;
  }

  auto aim = a.imag_data();
  auto bim = b.imag_data();
  auto cim = c.imag_data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < inner_dim; ++p) {
      const double xr = are[i * inner_dim + p];
      const double xi = aim.empty() ? 0.0 : aim[i * inner_dim + p];
      for (std::size_t j = 0; j < m; ++j) {
        const double yr = bre[p * m + j];
        const double yi = bim.empty() ? 0.0 : bim[p * m + j];
        cre[i * m + j] += xr * yr - xi * yi;
        cim[i * m + j] += xr * yi + xi * yr;
      }
    }
  }
  return c;
}

Mat conj_transpose(const Mat& a) {
  Mat t(a.cols(), a.rows(), a.is_complex());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      t.real_data()[j * a.rows() + i] = a.re(i, j);
      if (a.is_complex()) t.imag_data()[j * a.rows() + i] = -a.im(i, j);
    }
  }
  return t;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows(), a.is_complex());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      t.real_data()[j * a.rows() + i] = a.re(i, j);
      if (a.is_complex()) t.imag_data()[j * a.rows() + i] = a.im(i, j);
    }
  }
  return t;
}

double fro_norm(const Mat& a) {
  double sum = 0.0;
  for (double x : a.real_data()) sum += x * x;
  for (double x : a.imag_data()) sum += x * x;
  return std::sqrt(sum);
}

double fro_distance(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "fro_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      sum += std::norm(a(i, j) - b(i, j));
    }
  }
  return std::sqrt(sum);
}

Mat operator+(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "operator+");
  Mat c = a.is_real() && b.is_complex() ? a.as_complex() : a;
  auto cre = c.real_data();
  auto bre = b.real_data();
  for (std::size_t i = 0; i < cre.size(); ++i) cre[i] += bre[i];
  if (b.is_complex()) {
    auto cim = c.imag_data();
    auto bim = b.imag_data();
    for (std::size_t i = 0; i < cim.size(); ++i) cim[i] += bim[i];
  }
  return c;
}

Mat operator-(const Mat& a, const Mat& b) { return a + (-1.0) * b; }

Mat operator*(double scale, const Mat& a) {
  Mat c = a;
  for (double& x : c.real_data()) x *= scale;
  for (double& x : c.imag_data()) x *= scale;
  return c;
}

Mat operator*(Complex scale, const Mat& a) {
  if (scale.imag() == 0.0) return scale.real() * a;
  Mat c(a.rows(), a.cols(), true);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c.set(i, j, scale * a(i, j));
  }
  return c;
}

Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (double& x : m.real_data()) x = rng.next_normal();
  return m;
}

ComplexVec random_complex_vec(Rng& rng, std::size_t n) {
  ComplexVec v(n);
  for (auto& z : v) {
    const double re = rng.next_normal();
    const double im = rng.next_normal();
    z = {re, im};
  }
  return v;
}

RealVec random_real_vec(Rng& rng, std::size_t n) {
  RealVec v(n);
  for (double& x : v) x = rng.next_normal();
  return v;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw DimensionError("inner: length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
  Complex sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum;
}

ComplexVec to_complex(std::span<const double> x) {
  return ComplexVec(x.begin(), x.end());
}

}  // namespace lrpe
