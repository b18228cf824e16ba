#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lrpe/attention.hpp"
#include "lrpe/encoding.hpp"
#include "lrpe/numerics.hpp"

// Independent oracles and property drivers. Oracles here go through dense
// matrices in plain loop order and never call the matrix-free encoders they
// are checking.

namespace lrpe::verify {

struct PropertyReport {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::size_t cases = 0;
};

/// passed = max_error <= tolerance; NaN never passes.
PropertyReport make_report(std::string name, double max_error, double tolerance,
                           std::size_t cases);

using MatrixFamily = std::function<Mat(std::int64_t position)>;
using ScoreFn = std::function<Mat(const AttentionInput&)>;
using GradientFn = std::function<RealVec(const PositionTransform&, std::int64_t, std::int64_t,
                                         std::span<const Complex>, std::span<const Complex>)>;

inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kDecomposabilityTol = 1e-8;
inline constexpr double kScoreTol = 1e-8;
inline constexpr double kCanonicalTol = 1e-10;
inline constexpr double kTypeCorrespondenceTol = 1e-10;
inline constexpr double kConjugationTol = 1e-10;
inline constexpr double kGradientRelTol = 1e-4;
inline constexpr double kGradientStep = 1e-5;

/// e_st = Re[q_s^H W_{t-s} k_t] with W_{t-s} = relative_matrix(., t-s, 0).
/// O(n^2 d^2); throws std::invalid_argument for n > 256.
Mat oracle_scores(const PositionTransform& transform, const Mat& q, const Mat& k);

PropertyReport check_unitarity(const PositionTransform& transform, std::int64_t s_max);
PropertyReport check_unitarity(const MatrixFamily& family, std::int64_t s_max,
                               std::string name);

/// max over s, t <= s_max of ||W_s^H W_t - W_{t-s}||_F.
PropertyReport check_decomposability(const PositionTransform& transform, std::int64_t s_max);
/// Family variant; W_{t-s} is family(t-s) for t >= s and family(s-t)^H otherwise.
PropertyReport check_decomposability(const MatrixFamily& family, std::int64_t s_max,
                                     std::string name);

/// max over |r| <= r_max and anchors a, b <= anchor_max.
PropertyReport check_anchor_independence(const PositionTransform& transform,
                                         std::int64_t r_max, std::int64_t anchor_max);

/// Dense Lambda_k against Lambda_1^k, k <= 2 cycle_order. Exact (tolerance 0).
PropertyReport check_permutation_power_law(const PositionTransform& transform);
/// Lambda_k^T Lambda_k = I for k <= 2 cycle_order. Exact.
PropertyReport check_permutation_orthogonality(const PositionTransform& transform);
/// Passes iff `table` is a bijection on {0, ..., size-1}.
PropertyReport check_permutation_table(const std::vector<std::size_t>& table,
                                       std::string name);

/// Scores of the encoded linear path (or `scores`) against oracle_scores on
/// seeded random Q, K. Causal compares the lower triangle.
PropertyReport check_linear_vs_oracle(const PositionTransform& transform, std::size_t n,
                                      bool causal, std::uint64_t seed,
                                      const ScoreFn& scores = lrpe_scores);

/// lrpe_linear_attention output against the quadratic-order evaluation
/// (oracle scores, row-normalized, times V). Relative Frobenius error.
PropertyReport check_linear_vs_quadratic(const PositionTransform& transform, std::size_t n,
                                         bool causal, std::uint64_t seed);

/// Re of the complex unitary score on d_complex components against the
/// orthogonal score on the 2 d_complex interleaved real components.
PropertyReport check_type_correspondence(std::size_t d_complex, std::size_t draws,
                                         std::uint64_t seed);

/// Seeded random unitary: two Householder reflections, times random phases
/// when `complex`.
Mat random_unitary(Rng& rng, std::size_t d, bool complex);

/// Scores through U Lambda^(s) P for a random fixed unitary U, and through
/// P^H Lambda^(s) P, against scores through Lambda^(s) P; s, t < n.
PropertyReport check_conjugation_insensitivity(const PositionTransform& transform,
                                               std::size_t n, std::uint64_t seed);

/// Central differences of score(alpha_j +- h) through the dense practical
/// matrices.
RealVec fd_gradient(const PositionTransform& transform, std::int64_t s, std::int64_t t,
                    std::span<const Complex> q, std::span<const Complex> k, double h);

/// Norm-wise relative error of `analytic` against fd_gradient over seeded
/// random instances with s, t in [0, 32].
PropertyReport check_gradient(const PositionTransform& transform, std::size_t instances,
                              std::uint64_t seed, const GradientFn& analytic = theta_grad_score,
                              double h = kGradientStep);

enum class CanonicalMethod { kAdditive, kRope, kDeberta, kRpr, kCosformer };
std::string_view to_string(CanonicalMethod method);

/// Direct formula against compose and the stacked single-primitive
/// evaluation. kRope also compares against encode-then-inner-product through
/// `rope` (or an orthogonal:identity:a transform when null).
PropertyReport check_canonical(CanonicalMethod method, std::size_t d, std::size_t draws,
                               std::uint64_t seed, const PositionTransform* rope = nullptr);

/// Rotation blocks with the sine taken at a different angle than the cosine.
/// Not unitary; a negative control for check_unitarity.
MatrixFamily corrupted_rotation_family(std::size_t d, std::span<const double> theta);
/// W_s = diag(1, s + 1): not unitary, not decomposable.
MatrixFamily non_lrpe_family();
/// Odd-even table from the prose formula pi(2k) = k, pi(2k+1) = floor(d/2) + 1
/// (0-based: floor(d/2)); not a bijection for d >= 4.
std::vector<std::size_t> prose_odd_even_table(std::size_t d);

/// Every documented mutation; each report is expected to fail.
std::vector<PropertyReport> run_negative_controls(std::uint64_t seed);

struct ScalingFit {
  std::vector<std::size_t> sizes;
  /// Best-of-trials seconds per size.
  RealVec times;
  /// All trial times, per size.
  std::vector<RealVec> trial_times;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(time) on log(n). Needs >= 4 strictly increasing sizes.
ScalingFit fit_loglog(std::vector<std::size_t> sizes, RealVec times);

/// Returns the seconds one run at size n took.
using TimedRunner = std::function<double(std::size_t n)>;
using Runner = std::function<void(std::size_t n)>;

/// Wall-clock timing of `runner` on the monotonic clock: one untimed warmup
/// per size, then best-of-`trials`. Exceptions from the runner propagate.
ScalingFit fit_scaling(const Runner& runner, const std::vector<std::size_t>& sizes,
                       std::size_t trials);
/// Same protocol with the runner reporting its own duration.
ScalingFit fit_scaling_timed(const TimedRunner& runner, const std::vector<std::size_t>& sizes,
                             std::size_t trials);

}  // namespace lrpe::verify
