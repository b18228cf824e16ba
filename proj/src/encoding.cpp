#include "lrpe/encoding.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace lrpe {

namespace {

constexpr std::uint64_t kPermutationStream = 0xD1B54A32D192ED03ULL;
constexpr std::size_t kInlineScratch = 512;

// Scratch buffer for gathers; stays on the stack for the usual widths.
class Scratch {
 public:
  explicit Scratch(std::size_t n) : size_(n) {
    if (n > kInlineScratch) heap_.resize(n);
  }
  double* data() { return heap_.empty() ? inline_.data() : heap_.data(); }
  std::span<double> span() { return {data(), size_}; }

 private:
  std::size_t size_;
  std::array<double, kInlineScratch> inline_;
  std::vector<double> heap_;
};

void gather(std::span<double> plane, std::span<const std::size_t> table) {
  Scratch tmp(plane.size());
  auto buf = tmp.span();
  std::copy(plane.begin(), plane.end(), buf.begin());
  for (std::size_t j = 0; j < plane.size(); ++j) plane[j] = buf[table[j]];
}

void require_position(std::int64_t s, const char* where) {
  if (s < 0) {
    throw std::invalid_argument(std::string(where) + ": negative position " +
                                std::to_string(s));
  }
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw SpecError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::size_t mixed_rotated_dim(std::size_t d) {
  std::size_t e = d / 2;
  if (e % 2 != 0) ++e;
  return e;
}

}  // namespace

std::string_view to_string(LambdaFamily family) {
  switch (family) {
    case LambdaFamily::kUnitary: return "unitary";
    case LambdaFamily::kOrthogonal: return "orthogonal";
    case LambdaFamily::kMixed: return "mixed";
    case LambdaFamily::kPermutation: return "permutation";
    case LambdaFamily::kNone: return "none";
  }
  return "?";
}

std::string_view to_string(PFamily family) {
  switch (family) {
    case PFamily::kIdentity: return "identity";
    case PFamily::kHouseholder: return "householder";
    case PFamily::kOddEven: return "odd_even";
    case PFamily::kFourier: return "fourier";
  }
  return "?";
}

std::string_view to_string(ThetaKind kind) {
  switch (kind) {
    case ThetaKind::kA: return "a";
    case ThetaKind::kB: return "b";
    case ThetaKind::kC: return "c";
    case ThetaKind::kLearnedInitA: return "learned-init-a";
  }
  return "?";
}

LambdaFamily parse_lambda_family(std::string_view text) {
  for (auto f : {LambdaFamily::kUnitary, LambdaFamily::kOrthogonal, LambdaFamily::kMixed,
                 LambdaFamily::kPermutation, LambdaFamily::kNone}) {
    if (text == to_string(f)) return f;
  }
  throw SpecError("unknown lambda family '" + std::string(text) + "'");
}

PFamily parse_p_family(std::string_view text) {
  for (auto f : {PFamily::kIdentity, PFamily::kHouseholder, PFamily::kOddEven,
                 PFamily::kFourier}) {
    if (text == to_string(f)) return f;
  }
  throw SpecError("unknown p family '" + std::string(text) + "'");
}

ThetaKind parse_theta_kind(std::string_view text) {
  for (auto k : {ThetaKind::kA, ThetaKind::kB, ThetaKind::kC, ThetaKind::kLearnedInitA}) {
    if (text == to_string(k)) return k;
  }
  throw SpecError("unknown theta kind '" + std::string(text) + "'");
}

ThetaSchedule make_theta(ThetaKind kind, std::size_t d, std::optional<std::size_t> l,
                         std::size_t count) {
  if (d == 0) throw SpecError("make_theta: d must be >= 1");
  ThetaSchedule out{kind, d, l, RealVec(count)};
  switch (kind) {
    case ThetaKind::kA:
    case ThetaKind::kLearnedInitA:
      for (std::size_t t = 0; t < count; ++t) {
        out.values[t] = std::pow(10000.0, -2.0 * static_cast<double>(t) /
                                              static_cast<double>(d));
      }
      break;
    case ThetaKind::kB: {
      if (!l || *l == 0) throw SpecError("theta kind b requires l >= 1");
      const std::size_t half = d / 2;
      if (count > 0 && half == 0) throw SpecError("theta kind b requires d >= 2");
      const double step = std::numbers::pi / 2.0 / static_cast<double>(*l) /
                          static_cast<double>(half);
      for (std::size_t t = 0; t < count; ++t) {
        out.values[t] = step * static_cast<double>(t + 1);
      }
      break;
    }
    case ThetaKind::kC: {
      if (!l || *l == 0) throw SpecError("theta kind c requires l >= 1");
      const double base = std::numbers::pi / 2.0 / static_cast<double>(*l);
      for (std::size_t t = 0; t < count; ++t) {
        out.values[t] = base / static_cast<double>(t + 1);
      }
      break;
    }
  }
  return out;
}

PermutationSpec::PermutationSpec(std::vector<std::size_t> pi) : pi_(std::move(pi)) {
  const std::size_t d = pi_.size();
  std::vector<bool> seen(d, false);
  for (std::size_t v : pi_) {
    if (v >= d || seen[v]) throw SpecError("permutation is not a bijection");
    seen[v] = true;
  }

  cycle_of_.assign(d, 0);
  offset_in_cycle_.assign(d, 0);
  std::vector<bool> visited(d, false);
  cycle_start_.push_back(0);
  for (std::size_t j = 0; j < d; ++j) {
    if (visited[j]) continue;
    const std::size_t id = cycle_start_.size() - 1;
    std::size_t cur = j;
    std::size_t offset = 0;
    while (!visited[cur]) {
      visited[cur] = true;
      cycle_of_[cur] = id;
      offset_in_cycle_[cur] = offset++;
      cycles_.push_back(cur);
      cur = pi_[cur];
    }
    cycle_start_.push_back(cycles_.size());
    cycle_order_ = std::lcm(cycle_order_, static_cast<std::uint64_t>(offset));
  }
}

PermutationSpec PermutationSpec::random(std::size_t d, Rng& rng) {
  std::vector<std::size_t> pi(d);
  std::iota(pi.begin(), pi.end(), std::size_t{0});
  for (std::size_t i = d; i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(pi[i - 1], pi[j]);
  }
  return PermutationSpec(std::move(pi));
}

std::size_t PermutationSpec::power(std::size_t j, std::uint64_t s) const {
  const std::size_t c = cycle_of_[j];
  const std::size_t begin = cycle_start_[c];
  const std::size_t len = cycle_start_[c + 1] - begin;
  return cycles_[begin + (offset_in_cycle_[j] + s % len) % len];
}

void validate(const EncodingSpec& spec) {
  if (spec.d == 0) throw SpecError("d must be >= 1");
  if (spec.p == PFamily::kFourier && spec.lambda != LambdaFamily::kUnitary) {
    throw SpecError("fourier P requires the unitary lambda family");
  }
  switch (spec.lambda) {
    case LambdaFamily::kOrthogonal: {
      const std::size_t q = spec.q.value_or(spec.d % 2);
      if (q > spec.d) throw SpecError("identity block q exceeds d");
      if ((spec.d - q) % 2 != 0) {
        throw SpecError("orthogonal family needs an even rotated dimension (d - q)");
      }
      break;
    }
    case LambdaFamily::kMixed:
      if (spec.d < 3) throw SpecError("mixed family requires d >= 3");
      if (spec.q && *spec.q != spec.d - mixed_rotated_dim(spec.d)) {
        throw SpecError("mixed family fixes q = " +
                        std::to_string(spec.d - mixed_rotated_dim(spec.d)));
      }
      break;
    case LambdaFamily::kUnitary:
    case LambdaFamily::kPermutation:
    case LambdaFamily::kNone:
      if (spec.q && *spec.q != 0) {
        throw SpecError("q applies only to the orthogonal and mixed families");
      }
      break;
  }
  if (spec.has_theta() &&
      (spec.theta_kind == ThetaKind::kB || spec.theta_kind == ThetaKind::kC) &&
      (!spec.l || *spec.l == 0)) {
    throw SpecError("theta kinds b and c require l >= 1");
  }
}

EncodingSpec parse_spec(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() < 4) {
    throw SpecError("expected <lambda>:<p>:<theta_kind>:<d>[:q=..][:l=..][:seed=..], got '" +
                    std::string(text) + "'");
  }
  EncodingSpec spec;
  spec.lambda = parse_lambda_family(parts[0]);
  spec.p = parse_p_family(parts[1]);
  spec.theta_kind = parse_theta_kind(parts[2]);
  spec.d = parse_count(parts[3], "d");
  for (std::size_t i = 4; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) {
      throw SpecError("expected key=value, got '" + std::string(parts[i]) + "'");
    }
    const auto key = parts[i].substr(0, eq);
    const auto value = parts[i].substr(eq + 1);
    if (key == "q" && !spec.q) {
      spec.q = parse_count(value, "q");
    } else if (key == "l" && !spec.l) {
      spec.l = parse_count(value, "l");
    } else if (key == "seed" && !spec.seed) {
      std::uint64_t seed = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
        throw SpecError("invalid seed '" + std::string(value) + "'");
      }
      spec.seed = seed;
    } else {
      throw SpecError("unknown or repeated option '" + std::string(key) + "'");
    }
  }
  validate(spec);
  return spec;
}

std::string render_spec(const EncodingSpec& spec) {
  std::string out;
  out += to_string(spec.lambda);
  out += ':';
  out += to_string(spec.p);
  out += ':';
  out += to_string(spec.theta_kind);
  out += ':';
  out += std::to_string(spec.d);
  if (spec.q) out += ":q=" + std::to_string(*spec.q);
  if (spec.l) out += ":l=" + std::to_string(*spec.l);
  if (spec.seed) out += ":seed=" + std::to_string(*spec.seed);
  return out;
}

std::size_t rotated_dim(const EncodingSpec& spec) {
  switch (spec.lambda) {
    case LambdaFamily::kOrthogonal: return spec.d - spec.q.value_or(spec.d % 2);
    case LambdaFamily::kMixed: return mixed_rotated_dim(spec.d);
    case LambdaFamily::kUnitary: return spec.d;
    case LambdaFamily::kPermutation:
    case LambdaFamily::kNone: return 0;
  }
  return 0;
}

RealVec householder_vector(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  RealVec v = random_real_vec(rng, d);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::size_t> odd_even_table(std::size_t d) {
  const std::size_t half_up = d - d / 2;
  std::vector<std::size_t> table(d);
  for (std::size_t j = 0; j < d; ++j) {
    table[j] = j % 2 == 0 ? j / 2 : (j - 1) / 2 + half_up;
  }
  return table;
}

Mat build_p(PFamily family, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw SpecError("build_p: d must be >= 1");
  switch (family) {
    case PFamily::kIdentity:
      return Mat::identity(d);
    case PFamily::kHouseholder: {
      const RealVec v = householder_vector(d, seed);
      Mat p = Mat::identity(d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) p.set(i, j, p.re(i, j) - 2.0 * v[i] * v[j]);
      }
      return p;
    }
    case PFamily::kOddEven: {
      const auto table = odd_even_table(d);
      Mat p(d, d);
      for (std::size_t j = 0; j < d; ++j) p.set(j, table[j], 1.0);
      return p;
    }
    case PFamily::kFourier: {
      Mat p(d, d, true);
      const double scale = 1.0 / std::sqrt(static_cast<double>(d));
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
          const double angle = -2.0 * std::numbers::pi * static_cast<double>(j * k) /
                               static_cast<double>(d);
          p.set(j, k, std::polar(scale, angle));
        }
      }
      return p;
    }
  }
  return Mat::identity(d);
}

ComplexVec lambda_unitary(std::int64_t s, std::span<const double> theta,
                          std::span<const Complex> x) {
  if (theta.size() != x.size()) {
    throw DimensionError("lambda_unitary: " + std::to_string(theta.size()) +
                         " frequencies for " + std::to_string(x.size()) + " components");
  }
  ComplexVec out(x.size());
  const double pos = static_cast<double>(s);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * std::polar(1.0, pos * theta[k]);
  return out;
}

RealVec lambda_orthogonal(std::int64_t s, std::span<const double> theta,
                          std::size_t q_identity, std::span<const double> x) {
  if (q_identity > x.size()) throw DimensionError("lambda_orthogonal: q exceeds length");
  const std::size_t rotated = x.size() - q_identity;
  if (rotated % 2 != 0) {
    throw DimensionError("lambda_orthogonal: rotated sub-dimension " +
                         std::to_string(rotated) + " is odd");
  }
  if (theta.size() != rotated / 2) {
    throw DimensionError("lambda_orthogonal: expected " + std::to_string(rotated / 2) +
                         " frequencies, got " + std::to_string(theta.size()));
  }
  RealVec out(x.begin(), x.end());
  const double pos = static_cast<double>(s);
  for (std::size_t k = 0; k < rotated / 2; ++k) {
    const double c = std::cos(pos * theta[k]);
    const double sn = std::sin(pos * theta[k]);
    out[2 * k] = x[2 * k] * c - x[2 * k + 1] * sn;
    out[2 * k + 1] = x[2 * k] * sn + x[2 * k + 1] * c;
  }
  return out;
}

ComplexVec lambda_permutation(std::int64_t s, const PermutationSpec& perm,
                              std::span<const Complex> x) {
  require_position(s, "lambda_permutation");
  if (x.size() != perm.dim()) throw DimensionError("lambda_permutation: length mismatch");
  ComplexVec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = x[perm.power(j, static_cast<std::uint64_t>(s))];
  }
  return out;
}

RealVec lambda_permutation(std::int64_t s, const PermutationSpec& perm,
                           std::span<const double> x) {
  require_position(s, "lambda_permutation");
  if (x.size() != perm.dim()) throw DimensionError("lambda_permutation: length mismatch");
  RealVec out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = x[perm.power(j, static_cast<std::uint64_t>(s))];
  }
  return out;
}

PositionTransform::PositionTransform(EncodingSpec spec, TransformOverrides overrides)
    : spec_(std::move(spec)) {
  validate(spec_);
  const std::size_t d = spec_.d;
  const std::uint64_t seed = spec_.seed_or(0);
  rotated_ = lrpe::rotated_dim(spec_);

  switch (spec_.lambda) {
    case LambdaFamily::kUnitary:
      // Kinds b and c count the d complex components as 2d real ones.
      theta_ = spec_.theta_kind == ThetaKind::kB || spec_.theta_kind == ThetaKind::kC
                   ? make_theta(spec_.theta_kind, 2 * d, spec_.l, d).values
                   : make_theta(spec_.theta_kind, d, spec_.l, d).values;
      break;
    case LambdaFamily::kOrthogonal:
    case LambdaFamily::kMixed:
      if (rotated_ > 0) {
        theta_ = make_theta(spec_.theta_kind, rotated_, spec_.l, rotated_ / 2).values;
      }
      break;
    case LambdaFamily::kPermutation: {
      Rng rng(seed ^ kPermutationStream);
      perm_ = PermutationSpec::random(d, rng);
      break;
    }
    case LambdaFamily::kNone:
      break;
  }

  if (overrides.theta) {
    if (!spec_.has_theta()) throw SpecError("theta override on a family without theta");
    if (overrides.theta->size() != theta_.size()) {
      throw DimensionError("theta override has " + std::to_string(overrides.theta->size()) +
                           " values, expected " + std::to_string(theta_.size()));
    }
    theta_ = std::move(*overrides.theta);
  }
  if (overrides.permutation) {
    if (spec_.lambda != LambdaFamily::kPermutation || overrides.permutation->dim() != d) {
      throw SpecError("permutation override does not fit the spec");
    }
    perm_ = std::move(overrides.permutation);
  }

  switch (spec_.p) {
    case PFamily::kIdentity:
      break;
    case PFamily::kHouseholder:
      householder_v_ = householder_vector(d, seed);
      if (overrides.householder_v) {
        if (overrides.householder_v->size() != d) {
          throw DimensionError("householder override length mismatch");
        }
        householder_v_ = std::move(*overrides.householder_v);
      }
      break;
    case PFamily::kOddEven:
      odd_even_ = odd_even_table(d);
      break;
    case PFamily::kFourier:
      dft_twiddle_.resize(d);
      for (std::size_t m = 0; m < d; ++m) {
        dft_twiddle_[m] = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                                     -2.0 * std::numbers::pi * static_cast<double>(m) /
                                         static_cast<double>(d));
      }
      break;
  }
}

PositionTransform PositionTransform::with_theta(RealVec theta) const {
  PositionTransform copy = *this;
  if (theta.size() != theta_.size()) {
    throw DimensionError("with_theta: expected " + std::to_string(theta_.size()) + " values");
  }
  copy.theta_ = std::move(theta);
  return copy;
}

void PositionTransform::apply_p(std::span<double> re, std::span<double> im) const {
  switch (spec_.p) {
    case PFamily::kIdentity:
      return;
    case PFamily::kHouseholder: {
      const auto& v = householder_v_;
      for (std::span<double> plane : {re, im}) {
        if (plane.empty()) continue;
        double dot = 0.0;
        for (std::size_t j = 0; j < plane.size(); ++j) dot += v[j] * plane[j];
        for (std::size_t j = 0; j < plane.size(); ++j) plane[j] -= 2.0 * dot * v[j];
      }
      return;
    }
    case PFamily::kOddEven:
      gather(re, odd_even_);
      if (!im.empty()) gather(im, odd_even_);
      return;
    case PFamily::kFourier: {
      const std::size_t d = re.size();
      Scratch in_re(d);
      Scratch in_im(d);
      std::copy(re.begin(), re.end(), in_re.data());
      if (im.empty()) {
        std::fill(in_im.data(), in_im.data() + d, 0.0);
      } else {
        std::copy(im.begin(), im.end(), in_im.data());
      }
      for (std::size_t j = 0; j < d; ++j) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const Complex w = dft_twiddle_[(j * k) % d];
          const double xr = in_re.data()[k];
          const double xi = in_im.data()[k];
          acc_re += w.real() * xr - w.imag() * xi;
          acc_im += w.real() * xi + w.imag() * xr;
        }
        re[j] = acc_re;
        im[j] = acc_im;
      }
      return;
    }
  }
}

void PositionTransform::apply_lambda(std::int64_t s, std::span<double> re,
                                     std::span<double> im) const {
  const double pos = static_cast<double>(s);
  switch (spec_.lambda) {
    case LambdaFamily::kNone:
      return;
    case LambdaFamily::kUnitary:
      for (std::size_t k = 0; k < re.size(); ++k) {
        const double c = std::cos(pos * theta_[k]);
        const double sn = std::sin(pos * theta_[k]);
        const double xr = re[k];
        const double xi = im[k];
        re[k] = xr * c - xi * sn;
        im[k] = xr * sn + xi * c;
      }
      return;
    case LambdaFamily::kOrthogonal:
    case LambdaFamily::kMixed:
      for (std::size_t k = 0; k < rotated_ / 2; ++k) {
        const double c = std::cos(pos * theta_[k]);
        const double sn = std::sin(pos * theta_[k]);
        for (std::span<double> plane : {re, im}) {
          if (plane.empty()) continue;
          const double x0 = plane[2 * k];
          const double x1 = plane[2 * k + 1];
          plane[2 * k] = x0 * c - x1 * sn;
          plane[2 * k + 1] = x0 * sn + x1 * c;
        }
      }
      return;
    case LambdaFamily::kPermutation: {
      const auto steps = static_cast<std::uint64_t>(s);
      for (std::span<double> plane : {re, im}) {
        if (plane.empty()) continue;
        Scratch tmp(plane.size());
        std::copy(plane.begin(), plane.end(), tmp.data());
        for (std::size_t j = 0; j < plane.size(); ++j) {
          plane[j] = tmp.data()[perm_->power(j, steps)];
        }
      }
      return;
    }
  }
}

void PositionTransform::apply_inplace(std::int64_t s, std::span<double> re,
                                      std::span<double> im) const {
  require_position(s, "PositionTransform::apply");
  if (re.size() != spec_.d || (!im.empty() && im.size() != spec_.d)) {
    throw DimensionError("PositionTransform::apply: expected length " +
                         std::to_string(spec_.d));
  }
  if (is_complex() && im.empty()) {
    throw DimensionError("PositionTransform::apply: complex transform needs an imaginary plane");
  }
  if (spec_.lambda == LambdaFamily::kNone) return;
  apply_p(re, im);
  apply_lambda(s, re, im);
}

ComplexVec PositionTransform::apply(std::int64_t s, std::span<const Complex> x) const {
  const std::size_t d = x.size();
  RealVec re(d);
  RealVec im(d);
  for (std::size_t j = 0; j < d; ++j) {
    re[j] = x[j].real();
    im[j] = x[j].imag();
  }
  apply_inplace(s, re, im);
  ComplexVec out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = {re[j], im[j]};
  return out;
}

Mat PositionTransform::p_matrix() const {
  if (spec_.p == PFamily::kHouseholder) {
    const std::size_t d = spec_.d;
    Mat p = Mat::identity(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        p.set(i, j, p.re(i, j) - 2.0 * householder_v_[i] * householder_v_[j]);
      }
    }
    return p;
  }
  return build_p(spec_.p, spec_.d, spec_.seed_or(0));
}

Mat PositionTransform::lambda_matrix(std::int64_t s) const {
  require_position(s, "PositionTransform::lambda_matrix");
  const std::size_t d = spec_.d;
  const double pos = static_cast<double>(s);
  switch (spec_.lambda) {
    case LambdaFamily::kNone:
      return Mat::identity(d);
    case LambdaFamily::kUnitary: {
      Mat m(d, d, true);
      for (std::size_t k = 0; k < d; ++k) {
        m.set(k, k, Complex(std::cos(pos * theta_[k]), std::sin(pos * theta_[k])));
      }
      return m;
    }
    case LambdaFamily::kOrthogonal:
    case LambdaFamily::kMixed: {
      Mat m = Mat::identity(d);
      for (std::size_t k = 0; k < rotated_ / 2; ++k) {
        const double angle = pos * theta_[k];
        m.set(2 * k, 2 * k, std::cos(angle));
        m.set(2 * k, 2 * k + 1, -std::sin(angle));
        m.set(2 * k + 1, 2 * k, std::sin(angle));
        m.set(2 * k + 1, 2 * k + 1, std::cos(angle));
      }
      return m;
    }
    case LambdaFamily::kPermutation: {
      // Expanded gather table: table_s[j] = table_{s-1}[pi[j]].
      std::vector<std::size_t> table(d);
      std::iota(table.begin(), table.end(), std::size_t{0});
      const auto& pi = perm_->pi();
      for (std::int64_t step = 0; step < s; ++step) {
        std::vector<std::size_t> next(d);
        for (std::size_t j = 0; j < d; ++j) next[j] = table[pi[j]];
        table = std::move(next);
      }
      Mat m(d, d);
      for (std::size_t j = 0; j < d; ++j) m.set(j, table[j], 1.0);
      return m;
    }
  }
  return Mat::identity(d);
}

Mat PositionTransform::materialize(std::int64_t s) const {
  if (spec_.lambda == LambdaFamily::kNone) return Mat::identity(spec_.d);
  const Mat p = p_matrix();
  return matmul(conj_transpose(p), matmul(lambda_matrix(s), p));
}

Mat PositionTransform::materialize_practical(std::int64_t s) const {
  if (spec_.lambda == LambdaFamily::kNone) return Mat::identity(spec_.d);
  return matmul(lambda_matrix(s), p_matrix());
}

Mat encode_positions(const PositionTransform& transform, const Mat& x) {
  if (x.cols() != transform.dim()) {
    throw DimensionError("encode_positions: input has " + std::to_string(x.cols()) +
                         " columns, encoding expects " + std::to_string(transform.dim()));
  }
  if (transform.spec().lambda == LambdaFamily::kNone) return x;
  Mat out = transform.is_complex() ? x.as_complex() : x;
  for (std::size_t s = 0; s < out.rows(); ++s) {
    transform.apply_inplace(static_cast<std::int64_t>(s), out.real_row(s), out.imag_row(s));
  }
  return out;
}

Mat encode_positions(const EncodingSpec& spec, const Mat& x) {
  return encode_positions(PositionTransform(spec), x);
}

Mat relative_matrix(const PositionTransform& transform, std::int64_t r,
                    std::int64_t anchor) {
  if (anchor < 0) {
    throw std::invalid_argument("relative_matrix: negative anchor " + std::to_string(anchor));
  }
  if (anchor + r >= 0) {
    return matmul(conj_transpose(transform.materialize(anchor)),
                  transform.materialize(anchor + r));
  }
  return matmul(conj_transpose(transform.materialize(anchor - r)),
                transform.materialize(anchor));
}

double score(const PositionTransform& transform, std::int64_t s, std::int64_t t,
             std::span<const Complex> q, std::span<const Complex> k) {
  const ComplexVec qs = transform.apply(s, q);
  const ComplexVec kt = transform.apply(t, k);
  return inner(qs, kt).real();
}

RealVec theta_grad_score(const PositionTransform& transform, std::int64_t s,
                         std::int64_t t, std::span<const Complex> q,
                         std::span<const Complex> k) {
  const auto& spec = transform.spec();
  if (!spec.has_theta()) {
    throw std::invalid_argument("theta_grad_score: family '" +
                                std::string(to_string(spec.lambda)) + "' has no theta");
  }
  require_position(s, "theta_grad_score");
  require_position(t, "theta_grad_score");
  // Position-free features a = P q, b = P k (Lambda^(0) = I).
  const ComplexVec a = transform.apply(0, q);
  const ComplexVec b = transform.apply(0, k);
  const auto& theta = transform.theta();
  const double r = static_cast<double>(t - s);
  RealVec grad(theta.size(), 0.0);

  if (spec.lambda == LambdaFamily::kUnitary) {
    // score_j = Re[exp(i r alpha_j) conj(a_j) b_j]
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const Complex term = std::polar(1.0, r * theta[j]) * std::conj(a[j]) * b[j];
      grad[j] = -r * term.imag();
    }
    return grad;
  }

  // score_j = Re[conj(a0)(b0 c - b1 s) + conj(a1)(b0 s + b1 c)], angle r alpha_j
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double c = std::cos(r * theta[j]);
    const double sn = std::sin(r * theta[j]);
    const Complex a0 = std::conj(a[2 * j]);
    const Complex a1 = std::conj(a[2 * j + 1]);
    const Complex b0 = b[2 * j];
    const Complex b1 = b[2 * j + 1];
    grad[j] = r * (a0 * (-b0 * sn - b1 * c) + a1 * (b0 * c - b1 * sn)).real();
  }
  return grad;
}

}  // namespace lrpe
