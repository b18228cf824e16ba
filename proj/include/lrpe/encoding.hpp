#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrpe/numerics.hpp"

namespace lrpe {

/// Invalid encoding description: bad grammar or a violated family constraint.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-position core transform.
enum class LambdaFamily {
  kUnitary,      // diagonal complex phases exp(i s alpha_k)
  kOrthogonal,   // 2x2 rotation blocks, optional identity tail
  kMixed,        // rotation on a prefix of ~d/2 components, identity on the rest
  kPermutation,  // pi^s gather
  kNone,
};

/// Fixed change of basis applied before the core transform.
enum class PFamily { kIdentity, kHouseholder, kOddEven, kFourier };

enum class ThetaKind { kA, kB, kC, kLearnedInitA };

std::string_view to_string(LambdaFamily family);
std::string_view to_string(PFamily family);
std::string_view to_string(ThetaKind kind);
LambdaFamily parse_lambda_family(std::string_view text);
PFamily parse_p_family(std::string_view text);
ThetaKind parse_theta_kind(std::string_view text);

struct ThetaSchedule {
  ThetaKind kind = ThetaKind::kA;
  std::size_t d = 0;
  std::optional<std::size_t> l;
  RealVec values;
};

/// Rotation frequencies.
///
///   a, learned-init-a: alpha_t = 10000^(-2t/d),          t = 0 .. count-1
///   b:                 alpha_t = pi / (2 l (d/2)) * t,   t = 1 .. count
///   c:                 alpha_t = pi / (2 l) / t,         t = 1 .. count
///
/// For b and c, `d` is the rotated sub-dimension. Throws SpecError when b or c
/// is requested without a reference length `l`.
ThetaSchedule make_theta(ThetaKind kind, std::size_t d,
                         std::optional<std::size_t> l, std::size_t count);

/// A bijection on {0, ..., d-1} with its cycle structure precomputed so that
/// pi^s(j) costs O(1) for any s.
class PermutationSpec {
 public:
  /// Throws SpecError if `pi` is not a bijection.
  explicit PermutationSpec(std::vector<std::size_t> pi);

  /// Fisher-Yates shuffle driven by `rng`.
  static PermutationSpec random(std::size_t d, Rng& rng);

  std::size_t dim() const { return pi_.size(); }
  const std::vector<std::size_t>& pi() const { return pi_; }
  /// Smallest k >= 1 with pi^k = id (lcm of the cycle lengths).
  std::uint64_t cycle_order() const { return cycle_order_; }

  /// pi^s(j).
  std::size_t power(std::size_t j, std::uint64_t s) const;

  bool operator==(const PermutationSpec& other) const { return pi_ == other.pi_; }

 private:
  std::vector<std::size_t> pi_;
  // Flattened cycles; cycle_start_[c] .. cycle_start_[c+1] is cycle c.
  std::vector<std::size_t> cycles_;
  std::vector<std::size_t> cycle_start_;
  std::vector<std::size_t> cycle_of_;
  std::vector<std::size_t> offset_in_cycle_;
  std::uint64_t cycle_order_ = 1;
};

/// Declarative description of one encoding instance.
///
/// Text form: `<lambda>:<p>:<theta_kind>:<d>[:q=<q>][:l=<l>][:seed=<seed>]`,
/// e.g. `orthogonal:householder:a:64:q=0:seed=7`.
struct EncodingSpec {
  LambdaFamily lambda = LambdaFamily::kNone;
  PFamily p = PFamily::kIdentity;
  ThetaKind theta_kind = ThetaKind::kA;
  std::size_t d = 0;
  std::optional<std::size_t> q;
  std::optional<std::size_t> l;
  std::optional<std::uint64_t> seed;

  std::uint64_t seed_or(std::uint64_t fallback) const { return seed.value_or(fallback); }
  bool has_theta() const {
    return lambda == LambdaFamily::kUnitary || lambda == LambdaFamily::kOrthogonal ||
           lambda == LambdaFamily::kMixed;
  }
  bool is_complex() const { return lambda == LambdaFamily::kUnitary; }

  bool operator==(const EncodingSpec& other) const = default;
};

/// Parses the text form and checks the family constraints.
EncodingSpec parse_spec(std::string_view text);
std::string render_spec(const EncodingSpec& spec);
/// Throws SpecError describing the first violated constraint.
void validate(const EncodingSpec& spec);

/// Number of leading components rotated by the orthogonal/mixed families.
std::size_t rotated_dim(const EncodingSpec& spec);

/// Unit-norm Householder vector sampled from Rng(seed).
RealVec householder_vector(std::size_t d, std::uint64_t seed);
/// Gather table of the odd-even permutation: out[2k] = in[k],
/// out[2k+1] = in[k + ceil(d/2)].
std::vector<std::size_t> odd_even_table(std::size_t d);
/// Dense P. Fourier is the orthonormal DFT, F[j][k] = exp(-2 pi i jk/d)/sqrt(d).
Mat build_p(PFamily family, std::size_t d, std::uint64_t seed);

/// Component k multiplied by exp(i s alpha_k).
ComplexVec lambda_unitary(std::int64_t s, std::span<const double> theta,
                          std::span<const Complex> x);
/// Pairs (x_2k, x_2k+1) rotated by s alpha_k; the trailing `q_identity`
/// components pass through.
RealVec lambda_orthogonal(std::int64_t s, std::span<const double> theta,
                          std::size_t q_identity, std::span<const double> x);
/// out_j = x_{pi^s(j)}.
ComplexVec lambda_permutation(std::int64_t s, const PermutationSpec& perm,
                              std::span<const Complex> x);
RealVec lambda_permutation(std::int64_t s, const PermutationSpec& perm,
                           std::span<const double> x);

/// Replacement parameters for a realized transform, used to perturb or pin
/// the sampled parts of a spec.
struct TransformOverrides {
  std::optional<RealVec> theta;
  std::optional<PermutationSpec> permutation;
  std::optional<RealVec> householder_v;
};

/// The realized map s -> W_s = P^H Lambda^(s) P.
///
/// `apply` and `encode_positions` are matrix-free and evaluate the practical
/// form Lambda^(s) P. The dense accessors build P and Lambda^(s) entry by
/// entry and never share code with the matrix-free path.
class PositionTransform {
 public:
  explicit PositionTransform(EncodingSpec spec, TransformOverrides overrides = {});

  const EncodingSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.d; }
  bool is_complex() const { return spec_.is_complex(); }
  const RealVec& theta() const { return theta_; }
  const std::optional<PermutationSpec>& permutation() const { return perm_; }
  const RealVec& householder_v() const { return householder_v_; }
  std::size_t rotated_dim() const { return rotated_; }

  /// Same spec with the rotation frequencies replaced.
  PositionTransform with_theta(RealVec theta) const;

  /// Lambda^(s) P x.
  ComplexVec apply(std::int64_t s, std::span<const Complex> x) const;
  /// In-place Lambda^(s) P on one row split into planes. `im` may be empty
  /// only when the transform is real.
  void apply_inplace(std::int64_t s, std::span<double> re, std::span<double> im) const;

  Mat p_matrix() const;
  Mat lambda_matrix(std::int64_t s) const;
  /// P^H Lambda^(s) P.
  Mat materialize(std::int64_t s) const;
  /// Lambda^(s) P.
  Mat materialize_practical(std::int64_t s) const;

 private:
  void apply_p(std::span<double> re, std::span<double> im) const;
  void apply_lambda(std::int64_t s, std::span<double> re, std::span<double> im) const;

  EncodingSpec spec_;
  RealVec theta_;
  std::optional<PermutationSpec> perm_;
  RealVec householder_v_;
  std::vector<std::size_t> odd_even_;
  std::vector<Complex> dft_twiddle_;
  std::size_t rotated_ = 0;
};

/// Row s of the result is Lambda^(s) P row_s(X). Family `none` returns X.
Mat encode_positions(const PositionTransform& transform, const Mat& x);
Mat encode_positions(const EncodingSpec& spec, const Mat& x);

/// W_{anchor}^H W_{anchor + r}. When anchor + r < 0 the offset is taken as
/// W_r = W_{-r}^H = W_{anchor - r}^H W_{anchor}, so no absolute position is
/// ever negative. Throws std::invalid_argument for a negative anchor.
Mat relative_matrix(const PositionTransform& transform, std::int64_t r,
                    std::int64_t anchor);

/// Re[(Lambda^(s) P q)^H (Lambda^(t) P k)], matrix-free.
double score(const PositionTransform& transform, std::int64_t s, std::int64_t t,
             std::span<const Complex> q, std::span<const Complex> k);

/// Analytic d score / d alpha_j for every rotation frequency.
/// Throws std::invalid_argument for families without frequencies.
RealVec theta_grad_score(const PositionTransform& transform, std::int64_t s,
                         std::int64_t t, std::span<const Complex> q,
                         std::span<const Complex> k);

}  // namespace lrpe
