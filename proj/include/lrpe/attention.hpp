#pragma once

#include <optional>
#include <stdexcept>

#include "lrpe/encoding.hpp"
#include "lrpe/numerics.hpp"

namespace lrpe {

/// A linear-attention row normalizer fell below kDeltaEpsilon in magnitude.
class DegenerateNormalizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDeltaEpsilon = 1e-30;

struct AttentionInput {
  Mat q;
  Mat k;
  Mat v;
  bool causal = false;
  std::optional<PositionTransform> encoding;
  /// Encode raw Q, K and apply the feature map afterwards. Real families only.
  bool encode_before_phi = false;
};

struct AttentionOutput {
  Mat o;
  /// Per-row normalizers (linear paths only).
  RealVec delta;
};

/// 1 + elu(x): x + 1 for x >= 0, exp(x) otherwise.
double phi(double x);
RealVec phi(std::span<const double> x);
/// Elementwise on a real matrix.
Mat phi(const Mat& x);

/// softmax(Q K^T / sqrt(d)) V, masking t > s when causal.
AttentionOutput vanilla_attention(const AttentionInput& inp);

/// Delta^-1 phi(Q) [phi(K)^T V], O(n d^2). Rejects causal inputs and encodings.
AttentionOutput linear_attention(const AttentionInput& inp);

/// Prefix-sum recurrence over S_s = sum_{t<=s} phi(k_t) v_t^T and
/// z_s = sum_{t<=s} phi(k_t). Rejects non-causal inputs and encodings.
AttentionOutput causal_linear_attention(const AttentionInput& inp);

/// Linear (or causal linear) attention over Q~ = encode(phi(Q)),
/// K~ = encode(phi(K)); complex scores enter through their real part.
/// With no encoding this is linear_attention / causal_linear_attention.
AttentionOutput lrpe_linear_attention(const AttentionInput& inp);

/// Unnormalized n x n scores Re[q~_s^H k~_t] of the lrpe path, built from
/// the same encoded features lrpe_linear_attention consumes. Entries with
/// t > s are zero when causal.
Mat lrpe_scores(const AttentionInput& inp);

}  // namespace lrpe
