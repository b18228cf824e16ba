#include "lrpe/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lrpe {

namespace {

void check_shapes(const AttentionInput& inp) {
  const std::size_t n = inp.q.rows();
  if (inp.k.rows() != n || inp.v.rows() != n) {
    throw DimensionError("attention: Q, K, V must share n (got " + std::to_string(n) + ", " +
                         std::to_string(inp.k.rows()) + ", " + std::to_string(inp.v.rows()) +
                         ")");
  }
  if (inp.q.cols() != inp.k.cols()) {
    throw DimensionError("attention: Q and K must share d");
  }
  if (inp.v.is_complex()) throw DimensionError("attention: V must be real");
  if (inp.encoding && inp.encoding->dim() != inp.q.cols()) {
    throw DimensionError("attention: encoding dimension " +
                         std::to_string(inp.encoding->dim()) + " does not match d = " +
                         std::to_string(inp.q.cols()));
  }
}

void require_real(const Mat& m, const char* where) {
  if (m.is_complex()) throw DimensionError(std::string(where) + ": expected real input");
}

struct Features {
  Mat q;
  Mat k;
};

Features encoded_features(const AttentionInput& inp) {
  require_real(inp.q, "lrpe attention");
  require_real(inp.k, "lrpe attention");
  if (!inp.encoding) return {phi(inp.q), phi(inp.k)};
  if (inp.encode_before_phi) {
    if (inp.encoding->is_complex()) {
      throw std::invalid_argument("encode_before_phi needs a real encoding family");
    }
    return {phi(encode_positions(*inp.encoding, inp.q)),
            phi(encode_positions(*inp.encoding, inp.k))};
  }
  return {encode_positions(*inp.encoding, phi(inp.q)),
          encode_positions(*inp.encoding, phi(inp.k))};
}

// Shared O(n d dv) kernel over feature rows that may be complex; the score
// of (s, t) is Re[conj(qf_s) . kf_t].
AttentionOutput linear_kernel(const Mat& qf, const Mat& kf, const Mat& v, bool causal) {
  const std::size_t n = qf.rows();
  const std::size_t d = qf.cols();
  const std::size_t dv = v.cols();
  const bool complex = qf.is_complex() || kf.is_complex();

  RealVec state_re(d * dv, 0.0);
  RealVec state_im(complex ? d * dv : 0, 0.0);
  RealVec z_re(d, 0.0);
  RealVec z_im(complex ? d : 0, 0.0);

  auto accumulate = [&](std::size_t t) {
    const auto kre = kf.real_row(t);
    const auto kim = kf.imag_row(t);
    const auto vrow = v.real_row(t);
    for (std::size_t i = 0; i < d; ++i) {
      z_re[i] += kre[i];
      double* srow = state_re.data() + i * dv;
      for (std::size_t j = 0; j < dv; ++j) srow[j] += kre[i] * vrow[j];
      if (complex && !kim.empty()) {
        z_im[i] += kim[i];
        double* sirow = state_im.data() + i * dv;
        for (std::size_t j = 0; j < dv; ++j) sirow[j] += kim[i] * vrow[j];
      }
    }
  };

  if (!causal) {
    for (std::size_t t = 0; t < n; ++t) accumulate(t);
  }

  AttentionOutput out{Mat(n, dv), RealVec(n, 0.0)};
  RealVec num(dv);
  for (std::size_t s = 0; s < n; ++s) {
    if (causal) accumulate(s);
    const auto qre = qf.real_row(s);
    const auto qim = qf.imag_row(s);
    std::fill(num.begin(), num.end(), 0.0);
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      delta += qre[i] * z_re[i];
      const double* srow = state_re.data() + i * dv;
      for (std::size_t j = 0; j < dv; ++j) num[j] += qre[i] * srow[j];
      if (complex && !qim.empty()) {
        delta += qim[i] * z_im[i];
        const double* sirow = state_im.data() + i * dv;
        for (std::size_t j = 0; j < dv; ++j) num[j] += qim[i] * sirow[j];
      }
    }
    if (!(std::abs(delta) >= kDeltaEpsilon)) {
      throw DegenerateNormalizerError("linear attention: |Delta_" + std::to_string(s) +
                                      "| = " + std::to_string(std::abs(delta)) +
                                      " below epsilon");
    }
    out.delta[s] = delta;
    auto orow = out.o.real_row(s);
    for (std::size_t j = 0; j < dv; ++j) orow[j] = num[j] / delta;
  }
  return out;
}

}  // namespace

double phi(double x) { return x >= 0.0 ? x + 1.0 : std::exp(x); }

RealVec phi(std::span<const double> x) {
  RealVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = phi(x[i]);
  return out;
}

Mat phi(const Mat& x) {
  require_real(x, "phi");
  Mat out(x.rows(), x.cols());
  auto src = x.real_data();
  auto dst = out.real_data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = phi(src[i]);
  return out;
}

AttentionOutput vanilla_attention(const AttentionInput& inp) {
  check_shapes(inp);
  require_real(inp.q, "vanilla_attention");
  require_real(inp.k, "vanilla_attention");
  const std::size_t n = inp.q.rows();
  const std::size_t d = inp.q.cols();
  const std::size_t dv = inp.v.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  AttentionOutput out{Mat(n, dv), {}};
  RealVec logits(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t visible = inp.causal ? s + 1 : n;
    const auto qrow = inp.q.real_row(s);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < visible; ++t) {
      const auto krow = inp.k.real_row(t);
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += qrow[i] * krow[i];
      logits[t] = dot * scale;
      max_logit = std::max(max_logit, logits[t]);
    }
    double total = 0.0;
    for (std::size_t t = 0; t < visible; ++t) {
      logits[t] = std::exp(logits[t] - max_logit);
      total += logits[t];
    }
    auto orow = out.o.real_row(s);
    for (std::size_t t = 0; t < visible; ++t) {
      const double w = logits[t] / total;
      const auto vrow = inp.v.real_row(t);
      for (std::size_t j = 0; j < dv; ++j) orow[j] += w * vrow[j];
    }
  }
  return out;
}

AttentionOutput linear_attention(const AttentionInput& inp) {
  check_shapes(inp);
  if (inp.causal) throw std::invalid_argument("linear_attention: causal input, use causal_linear_attention");
  if (inp.encoding) throw std::invalid_argument("linear_attention: encoding given, use lrpe_linear_attention");
  require_real(inp.q, "linear_attention");
  require_real(inp.k, "linear_attention");
  return linear_kernel(phi(inp.q), phi(inp.k), inp.v, false);
}

AttentionOutput causal_linear_attention(const AttentionInput& inp) {
  check_shapes(inp);
  if (!inp.causal) throw std::invalid_argument("causal_linear_attention: input is not causal");
  if (inp.encoding) {
    throw std::invalid_argument("causal_linear_attention: encoding given, use lrpe_linear_attention");
  }
  require_real(inp.q, "causal_linear_attention");
  require_real(inp.k, "causal_linear_attention");
  return linear_kernel(phi(inp.q), phi(inp.k), inp.v, true);
}

AttentionOutput lrpe_linear_attention(const AttentionInput& inp) {
  check_shapes(inp);
  const Features f = encoded_features(inp);
  return linear_kernel(f.q, f.k, inp.v, inp.causal);
}

Mat lrpe_scores(const AttentionInput& inp) {
  check_shapes(inp);
  const Features f = encoded_features(inp);
  const std::size_t n = f.q.rows();
  const std::size_t d = f.q.cols();
  Mat scores(n, n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto qre = f.q.real_row(s);
    const auto qim = f.q.imag_row(s);
    const std::size_t visible = inp.causal ? s + 1 : n;
    for (std::size_t t = 0; t < visible; ++t) {
      const auto kre = f.k.real_row(t);
      const auto kim = f.k.imag_row(t);
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += qre[i] * kre[i];
      if (!qim.empty() && !kim.empty()) {
        for (std::size_t i = 0; i < d; ++i) acc += qim[i] * kim[i];
      }
      scores.set(s, t, acc);
    }
  }
  return scores;
}

}  // namespace lrpe
