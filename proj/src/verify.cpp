#include "lrpe/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "lrpe/canonical.hpp"

namespace lrpe::verify {

namespace {

std::string transform_name(const PositionTransform& transform) {
  return render_spec(transform.spec());
}

// Re[conj(a)^T b] via the dense practical matrices only.
double dense_score(const PositionTransform& transform, std::int64_t s, std::int64_t t,
                   std::span<const Complex> q, std::span<const Complex> k) {
  const Mat a = matmul(transform.materialize_practical(s), Mat::column(q));
  const Mat b = matmul(transform.materialize_practical(t), Mat::column(k));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += (std::conj(a(i, 0)) * b(i, 0)).real();
  return acc;
}

ComplexVec random_input(Rng& rng, std::size_t d, bool complex) {
  return complex ? random_complex_vec(rng, d) : to_complex(random_real_vec(rng, d));
}

double vec_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::int64_t draw_position(Rng& rng, std::int64_t max_inclusive) {
  return static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(max_inclusive + 1)));
}

}  // namespace

PropertyReport make_report(std::string name, double max_error, double tolerance,
                           std::size_t cases) {
  PropertyReport report;
  report.name = std::move(name);
  report.max_error = max_error;
  report.tolerance = tolerance;
  report.passed = max_error <= tolerance;  // false for NaN
  report.cases = cases;
  return report;
}

Mat oracle_scores(const PositionTransform& transform, const Mat& q, const Mat& k) {
  const std::size_t n = q.rows();
  const std::size_t d = q.cols();
  if (n > 256) throw std::invalid_argument("oracle_scores: n > 256 is not dense-feasible");
  if (k.rows() != n || k.cols() != d || d != transform.dim()) {
    throw DimensionError("oracle_scores: shape mismatch");
  }
  std::map<std::int64_t, Mat> relative;
  Mat scores(n, n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const std::int64_t r = static_cast<std::int64_t>(t) - static_cast<std::int64_t>(s);
      auto it = relative.find(r);
      if (it == relative.end()) it = relative.emplace(r, relative_matrix(transform, r, 0)).first;
      const Mat& w = it->second;
      Complex acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        Complex row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += w(i, j) * k(t, j);
        acc += std::conj(q(s, i)) * row;
      }
      scores.set(s, t, acc.real());
    }
  }
  return scores;
}

PropertyReport check_unitarity(const PositionTransform& transform, std::int64_t s_max) {
  return check_unitarity([&](std::int64_t s) { return transform.materialize(s); }, s_max,
                         "unitarity[" + transform_name(transform) + "]");
}

PropertyReport check_unitarity(const MatrixFamily& family, std::int64_t s_max,
                               std::string name) {
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t s = 0; s <= s_max; ++s) {
    const Mat w = family(s);
    const Mat gram = matmul(conj_transpose(w), w);
    worst = std::max(worst, fro_distance(gram, Mat::identity(w.rows())));
    ++cases;
  }
  return make_report(std::move(name), worst, kUnitarityTol, cases);
}

PropertyReport check_decomposability(const PositionTransform& transform, std::int64_t s_max) {
  std::vector<Mat> w;
  for (std::int64_t s = 0; s <= s_max; ++s) w.push_back(transform.materialize(s));
  std::map<std::int64_t, Mat> relative;
  for (std::int64_t r = -s_max; r <= s_max; ++r) relative.emplace(r, relative_matrix(transform, r, 0));
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t s = 0; s <= s_max; ++s) {
    const Mat ws_h = conj_transpose(w[static_cast<std::size_t>(s)]);
    for (std::int64_t t = 0; t <= s_max; ++t) {
      const Mat lhs = matmul(ws_h, w[static_cast<std::size_t>(t)]);
      worst = std::max(worst, fro_distance(lhs, relative.at(t - s)));
      ++cases;
    }
  }
  return make_report("decomposability[" + transform_name(transform) + "]", worst,
                     kDecomposabilityTol, cases);
}

PropertyReport check_decomposability(const MatrixFamily& family, std::int64_t s_max,
                                     std::string name) {
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t s = 0; s <= s_max; ++s) {
    for (std::int64_t t = 0; t <= s_max; ++t) {
      const Mat lhs = matmul(conj_transpose(family(s)), family(t));
      const Mat rel = t >= s ? family(t - s) : conj_transpose(family(s - t));
      worst = std::max(worst, fro_distance(lhs, rel));
      ++cases;
    }
  }
  return make_report(std::move(name), worst, kDecomposabilityTol, cases);
}

PropertyReport check_anchor_independence(const PositionTransform& transform,
                                         std::int64_t r_max, std::int64_t anchor_max) {
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t r = -r_max; r <= r_max; ++r) {
    std::vector<Mat> by_anchor;
    for (std::int64_t a = 0; a <= anchor_max; ++a) {
      by_anchor.push_back(relative_matrix(transform, r, a));
    }
    for (std::size_t a = 0; a < by_anchor.size(); ++a) {
      for (std::size_t b = a + 1; b < by_anchor.size(); ++b) {
        worst = std::max(worst, fro_distance(by_anchor[a], by_anchor[b]));
        ++cases;
      }
    }
  }
  return make_report("anchor_independence[" + transform_name(transform) + "]", worst,
                     kDecomposabilityTol, cases);
}

PropertyReport check_permutation_power_law(const PositionTransform& transform) {
  if (!transform.permutation()) {
    throw std::invalid_argument("check_permutation_power_law: not a permutation family");
  }
  const auto k_max = static_cast<std::int64_t>(2 * transform.permutation()->cycle_order());
  const Mat lambda1 = transform.lambda_matrix(1);
  Mat power = Mat::identity(transform.dim());
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    worst = std::max(worst, fro_distance(transform.lambda_matrix(k), power));
    power = matmul(power, lambda1);
    ++cases;
  }
  return make_report("permutation_power_law[" + transform_name(transform) + "]", worst, 0.0,
                     cases);
}

PropertyReport check_permutation_orthogonality(const PositionTransform& transform) {
  if (!transform.permutation()) {
    throw std::invalid_argument("check_permutation_orthogonality: not a permutation family");
  }
  const auto k_max = static_cast<std::int64_t>(2 * transform.permutation()->cycle_order());
  const Mat eye = Mat::identity(transform.dim());
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const Mat lk = transform.lambda_matrix(k);
    worst = std::max(worst, fro_distance(matmul(transpose(lk), lk), eye));
    ++cases;
  }
  return make_report("permutation_orthogonality[" + transform_name(transform) + "]", worst,
                     0.0, cases);
}

PropertyReport check_permutation_table(const std::vector<std::size_t>& table,
                                       std::string name) {
  std::vector<int> hits(table.size(), 0);
  std::size_t collisions = 0;
  for (std::size_t v : table) {
    if (v >= table.size() || hits[v]++ > 0) ++collisions;
  }
  return make_report(std::move(name), static_cast<double>(collisions), 0.0, table.size());
}

PropertyReport check_linear_vs_oracle(const PositionTransform& transform, std::size_t n,
                                      bool causal, std::uint64_t seed, const ScoreFn& scores) {
  Rng rng(seed);
  const std::size_t d = transform.dim();
  AttentionInput inp;
  inp.q = random_mat(rng, n, d);
  inp.k = random_mat(rng, n, d);
  inp.v = random_mat(rng, n, d);
  inp.causal = causal;
  inp.encoding = transform;

  const Mat fast = scores(inp);
  const Mat slow = oracle_scores(transform, phi(inp.q), phi(inp.k));
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t visible = causal ? s + 1 : n;
    for (std::size_t t = 0; t < visible; ++t) {
      worst = std::max(worst, std::abs(fast.re(s, t) - slow.re(s, t)));
      ++cases;
    }
  }
  return make_report(std::string(causal ? "causal_" : "") + "linear_vs_oracle[" +
                         transform_name(transform) + "]",
                     worst, kScoreTol, cases);
}

PropertyReport check_linear_vs_quadratic(const PositionTransform& transform, std::size_t n,
                                         bool causal, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = transform.dim();
  AttentionInput inp;
  inp.q = random_mat(rng, n, d);
  inp.k = random_mat(rng, n, d);
  inp.v = random_mat(rng, n, d);
  inp.causal = causal;
  inp.encoding = transform;

  const AttentionOutput fast = lrpe_linear_attention(inp);
  const Mat scores = oracle_scores(transform, phi(inp.q), phi(inp.k));
  Mat slow(n, d);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t visible = causal ? s + 1 : n;
    double total = 0.0;
    for (std::size_t t = 0; t < visible; ++t) total += scores.re(s, t);
    for (std::size_t t = 0; t < visible; ++t) {
      const double w = scores.re(s, t) / total;
      for (std::size_t j = 0; j < d; ++j) slow.set(s, j, slow.re(s, j) + w * inp.v.re(t, j));
    }
  }
  const double rel = fro_distance(fast.o, slow) / std::max(fro_norm(slow), 1e-300);
  return make_report(std::string(causal ? "causal_" : "") + "linear_vs_quadratic[" +
                         transform_name(transform) + "]",
                     rel, kScoreTol, n);
}

PropertyReport check_type_correspondence(std::size_t d_complex, std::size_t draws,
                                         std::uint64_t seed) {
  Rng rng(seed);
  EncodingSpec complex_spec;
  complex_spec.lambda = LambdaFamily::kUnitary;
  complex_spec.d = d_complex;
  EncodingSpec real_spec;
  real_spec.lambda = LambdaFamily::kOrthogonal;
  real_spec.d = 2 * d_complex;
  real_spec.q = 0;
  double worst = 0.0;
  for (std::size_t draw = 0; draw < draws; ++draw) {
    RealVec theta(d_complex);
    for (double& a : theta) a = rng.next_uniform() * std::numbers::pi;
    TransformOverrides overrides;
    overrides.theta = theta;
    const PositionTransform type1(complex_spec, overrides);
    const PositionTransform type2(real_spec, overrides);
    const ComplexVec q = random_complex_vec(rng, d_complex);
    const ComplexVec k = random_complex_vec(rng, d_complex);
    ComplexVec q_real(2 * d_complex);
    ComplexVec k_real(2 * d_complex);
    for (std::size_t i = 0; i < d_complex; ++i) {
      q_real[2 * i] = q[i].real();
      q_real[2 * i + 1] = q[i].imag();
      k_real[2 * i] = k[i].real();
      k_real[2 * i + 1] = k[i].imag();
    }
    const std::int64_t s = draw_position(rng, 64);
    const std::int64_t t = draw_position(rng, 64);
    const double complex_score = score(type1, s, t, q, k);
    const double real_score = score(type2, s, t, q_real, k_real);
    worst = std::max(worst, std::abs(complex_score - real_score));
  }
  return make_report("type_correspondence[d_complex=" + std::to_string(d_complex) + "]", worst,
                     kTypeCorrespondenceTol, draws);
}

Mat random_unitary(Rng& rng, std::size_t d, bool complex) {
  Mat u = Mat::identity(d);
  for (int reflection = 0; reflection < 2; ++reflection) {
    const RealVec v = random_real_vec(rng, d);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    Mat h = Mat::identity(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) h.set(i, j, h.re(i, j) - 2.0 * v[i] * v[j] / norm2);
    }
    u = matmul(h, u);
  }
  if (complex) {
    Mat phases = Mat::zeros(d, d, true);
    for (std::size_t i = 0; i < d; ++i) {
      phases.set(i, i, std::polar(1.0, 2.0 * std::numbers::pi * rng.next_uniform()));
    }
    u = matmul(phases, u);
  }
  return u;
}

PropertyReport check_conjugation_insensitivity(const PositionTransform& transform,
                                               std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = transform.dim();
  const Mat u = random_unitary(rng, d, transform.is_complex());
  std::vector<Mat> practical;
  std::vector<Mat> rotated;
  std::vector<Mat> full;
  for (std::size_t s = 0; s < n; ++s) {
    practical.push_back(transform.materialize_practical(static_cast<std::int64_t>(s)));
    rotated.push_back(matmul(u, practical.back()));
    full.push_back(transform.materialize(static_cast<std::int64_t>(s)));
  }
  std::vector<ComplexVec> q;
  std::vector<ComplexVec> k;
  for (std::size_t s = 0; s < n; ++s) {
    q.push_back(random_input(rng, d, false));
    k.push_back(random_input(rng, d, false));
  }
  auto bilinear = [](const Mat& a, const ComplexVec& x, const Mat& b, const ComplexVec& y) {
    const Mat ax = matmul(a, Mat::column(std::span<const Complex>(x)));
    const Mat by = matmul(b, Mat::column(std::span<const Complex>(y)));
    double acc = 0.0;
    for (std::size_t i = 0; i < ax.rows(); ++i) acc += (std::conj(ax(i, 0)) * by(i, 0)).real();
    return acc;
  };
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const double base = bilinear(practical[s], q[s], practical[t], k[t]);
      worst = std::max(worst, std::abs(bilinear(rotated[s], q[s], rotated[t], k[t]) - base));
      worst = std::max(worst, std::abs(bilinear(full[s], q[s], full[t], k[t]) - base));
      ++cases;
    }
  }
  return make_report("conjugation_insensitivity[" + transform_name(transform) + "]", worst,
                     kConjugationTol, cases);
}

RealVec fd_gradient(const PositionTransform& transform, std::int64_t s, std::int64_t t,
                    std::span<const Complex> q, std::span<const Complex> k, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw std::invalid_argument("fd_gradient: h outside [1e-7, 1e-3]");
  const RealVec& theta = transform.theta();
  RealVec grad(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    RealVec plus = theta;
    RealVec minus = theta;
    plus[j] += h;
    minus[j] -= h;
    const double up = dense_score(transform.with_theta(plus), s, t, q, k);
    const double down = dense_score(transform.with_theta(minus), s, t, q, k);
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

PropertyReport check_gradient(const PositionTransform& transform, std::size_t instances,
                              std::uint64_t seed, const GradientFn& analytic, double h) {
  Rng rng(seed);
  const std::size_t d = transform.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const ComplexVec q = random_input(rng, d, transform.is_complex());
    const ComplexVec k = random_input(rng, d, transform.is_complex());
    const std::int64_t s = draw_position(rng, 32);
    const std::int64_t t = draw_position(rng, 32);
    const RealVec exact = analytic(transform, s, t, q, k);
    const RealVec approx = fd_gradient(transform, s, t, q, k, h);
    RealVec diff(exact.size());
    for (std::size_t j = 0; j < exact.size(); ++j) diff[j] = exact[j] - approx[j];
    const double scale = vec_norm(approx);
    // Below 1e-9 the gradient is zero up to rounding (s = t); compare absolutely.
    const double err = scale > 1e-9 ? vec_norm(diff) / scale : vec_norm(diff);
    worst = std::max(worst, err);
  }
  return make_report("gradient[" + transform_name(transform) + "]", worst, kGradientRelTol,
                     instances);
}

std::string_view to_string(CanonicalMethod method) {
  switch (method) {
    case CanonicalMethod::kAdditive: return "additive";
    case CanonicalMethod::kRope: return "rope";
    case CanonicalMethod::kDeberta: return "deberta";
    case CanonicalMethod::kRpr: return "rpr";
    case CanonicalMethod::kCosformer: return "cosformer";
  }
  return "?";
}

PropertyReport check_canonical(CanonicalMethod method, std::size_t d, std::size_t draws,
                               std::uint64_t seed, const PositionTransform* rope) {
  using namespace canonical;
  constexpr std::int64_t kMaxPosition = 32;
  Rng rng(seed);

  std::optional<PositionTransform> default_rope;
  if (method == CanonicalMethod::kRope && rope == nullptr) {
    EncodingSpec spec;
    spec.lambda = LambdaFamily::kOrthogonal;
    spec.d = d;
    spec.q = 0;
    default_rope.emplace(spec);
    rope = &*default_rope;
  }
  if (rope != nullptr && rope->dim() != d) throw DimensionError("check_canonical: rope dim");

  const AdditiveConfig additive = random_additive(rng, kMaxPosition);
  const DebertaConfig deberta = random_deberta(rng, 4, d);
  const RprConfig rpr = random_rpr(rng, 5, d);

  double worst = 0.0;
  for (std::size_t draw = 0; draw < draws; ++draw) {
    const ComplexVec q = random_complex_vec(rng, d);
    const ComplexVec k = random_complex_vec(rng, d);
    const std::int64_t s = draw_position(rng, kMaxPosition);
    const std::int64_t t = draw_position(rng, kMaxPosition);
    const std::int64_t r = t - s;

    Complex direct;
    CanonicalForm form;
    std::optional<Complex> encoded;
    switch (method) {
      case CanonicalMethod::kAdditive:
        direct = eval_additive(q, k, r, additive);
        form = additive_form(additive, d);
        break;
      case CanonicalMethod::kRope: {
        RelativeFn w = [rope](std::int64_t off) { return relative_matrix(*rope, off, 0); };
        direct = eval_multiplicative(q, k, r, w);
        form = multiplicative_form(w);
        encoded = inner(rope->apply(s, q), rope->apply(t, k));
        break;
      }
      case CanonicalMethod::kDeberta:
        direct = eval_deberta(q, k, s, t, deberta);
        form = deberta_form(deberta, d);
        break;
      case CanonicalMethod::kRpr:
        direct = eval_rpr(q, k, r, rpr);
        form = rpr_form(rpr, d);
        break;
      case CanonicalMethod::kCosformer: {
        const CosformerConfig cfg{rng.next_uniform() * std::numbers::pi};
        direct = eval_cosformer(q, k, r, cfg);
        form = cosformer_form(cfg, d);
        break;
      }
    }
    const Complex summed = compose(form, q, k, s, t);
    const Complex stacked = compose_stacked(form, q, k, s, t);
    worst = std::max({worst, std::abs(direct - summed), std::abs(summed - stacked)});
    if (encoded) worst = std::max(worst, std::abs(direct - *encoded));
  }
  return make_report("canonical[" + std::string(to_string(method)) + "]", worst, kCanonicalTol,
                     draws);
}

MatrixFamily corrupted_rotation_family(std::size_t d, std::span<const double> theta) {
  if (d % 2 != 0 || theta.size() != d / 2) {
    throw DimensionError("corrupted_rotation_family: needs d even and d/2 angles");
  }
  RealVec angles(theta.begin(), theta.end());
  return [d, angles](std::int64_t s) {
    Mat m(d, d);
    const double pos = static_cast<double>(s);
    for (std::size_t k = 0; k < d / 2; ++k) {
      const double a = pos * angles[k];
      // First pair uses a mismatched sine angle.
      const double b = k == 0 ? pos * (angles[k] * 1.1 + 0.1) : a;
      m.set(2 * k, 2 * k, std::cos(a));
      m.set(2 * k, 2 * k + 1, -std::sin(b));
      m.set(2 * k + 1, 2 * k, std::sin(b));
      m.set(2 * k + 1, 2 * k + 1, std::cos(a));
    }
    return m;
  };
}

MatrixFamily non_lrpe_family() {
  return [](std::int64_t s) {
    return Mat::from_rows({{1.0, 0.0}, {0.0, static_cast<double>(s + 1)}});
  };
}

std::vector<std::size_t> prose_odd_even_table(std::size_t d) {
  std::vector<std::size_t> table(d);
  for (std::size_t j = 0; j < d; ++j) table[j] = j % 2 == 0 ? j / 2 : d / 2;
  return table;
}

std::vector<PropertyReport> run_negative_controls(std::uint64_t seed) {
  std::vector<PropertyReport> reports;

  const RealVec theta = make_theta(ThetaKind::kA, 4, std::nullopt, 2).values;
  auto unitarity = check_unitarity(corrupted_rotation_family(4, theta), 64,
                                   "neg:unitarity[corrupted_rotation]");
  reports.push_back(unitarity);

  reports.push_back(check_decomposability(non_lrpe_family(), 8, "neg:decomposability[diag(1,s+1)]"));
  reports.push_back(check_unitarity(non_lrpe_family(), 8, "neg:unitarity[diag(1,s+1)]"));

  EncodingSpec orth;
  orth.lambda = LambdaFamily::kOrthogonal;
  orth.p = PFamily::kHouseholder;
  orth.d = 8;
  orth.q = 0;
  orth.seed = seed;
  const PositionTransform transform(orth);

  GradientFn flipped = [](const PositionTransform& tr, std::int64_t s, std::int64_t t,
                          std::span<const Complex> q, std::span<const Complex> k) {
    RealVec g = theta_grad_score(tr, s, t, q, k);
    for (double& x : g) x = -x;
    return g;
  };
  auto grad = check_gradient(transform, 20, seed, flipped);
  grad.name = "neg:gradient[sign_flipped]";
  reports.push_back(grad);

  // Keys encoded one position late.
  ScoreFn shifted = [](const AttentionInput& inp) {
    const PositionTransform& tr = *inp.encoding;
    const Mat fq = phi(inp.q);
    const Mat fk = phi(inp.k);
    const std::size_t n = fq.rows();
    Mat out(n, n);
    for (std::size_t s = 0; s < n; ++s) {
      const ComplexVec qs = tr.apply(static_cast<std::int64_t>(s), fq.row(s));
      for (std::size_t t = 0; t < n; ++t) {
        const ComplexVec kt = tr.apply(static_cast<std::int64_t>(t + 1), fk.row(t));
        out.set(s, t, inner(qs, kt).real());
      }
    }
    return out;
  };
  auto scores = check_linear_vs_oracle(transform, 16, false, seed, shifted);
  scores.name = "neg:linear_vs_oracle[key_shifted]";
  reports.push_back(scores);

  reports.push_back(check_permutation_table(prose_odd_even_table(8), "neg:bijection[prose_odd_even]"));
  return reports;
}

namespace {

void require_fit_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 4) throw std::invalid_argument("scaling fit: need >= 4 sizes");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw std::invalid_argument("scaling fit: sizes must increase");
  }
}

}  // namespace

ScalingFit fit_loglog(std::vector<std::size_t> sizes, RealVec times) {
  require_fit_sizes(sizes);
  if (sizes.size() != times.size()) {
    throw std::invalid_argument("fit_loglog: sizes and times differ in length");
  }
  const auto m = static_cast<double>(sizes.size());
  double mx = 0.0;
  double my = 0.0;
  RealVec xs(sizes.size());
  RealVec ys(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("fit_loglog: times must be positive");
    xs[i] = std::log(static_cast<double>(sizes[i]));
    ys[i] = std::log(times[i]);
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.sizes = std::move(sizes);
  fit.times = std::move(times);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ScalingFit fit_scaling_timed(const TimedRunner& runner, const std::vector<std::size_t>& sizes,
                             std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("fit_scaling: trials must be >= 1");
  require_fit_sizes(sizes);
  RealVec best;
  std::vector<RealVec> all;
  for (std::size_t n : sizes) {
    runner(n);  // warmup
    RealVec per_trial;
    for (std::size_t i = 0; i < trials; ++i) per_trial.push_back(runner(n));
    best.push_back(*std::min_element(per_trial.begin(), per_trial.end()));
    all.push_back(std::move(per_trial));
  }
  ScalingFit fit = fit_loglog(sizes, std::move(best));
  fit.trial_times = std::move(all);
  return fit;
}

ScalingFit fit_scaling(const Runner& runner, const std::vector<std::size_t>& sizes,
                       std::size_t trials) {
  return fit_scaling_timed(
      [&runner](std::size_t n) {
        const auto start = std::chrono::steady_clock::now();
        runner(n);
        const auto stop = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(stop - start).count();
      },
      sizes, trials);
}

}  // namespace lrpe::verify
