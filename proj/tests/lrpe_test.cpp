#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lrpe/encoding.hpp"

namespace lrpe {
namespace {

using std::numbers::pi;

std::vector<std::string> all_valid_specs(std::size_t d) {
  std::vector<std::string> specs;
  for (const char* lambda : {"unitary", "orthogonal", "mixed", "permutation", "none"}) {
    for (const char* p : {"identity", "householder", "odd_even", "fourier"}) {
      if (std::string(p) == "fourier" && std::string(lambda) != "unitary") continue;
      specs.push_back(std::string(lambda) + ":" + p + ":a:" + std::to_string(d) + ":seed=5");
    }
  }
  return specs;
}

Mat rotation(double angle) {
  return Mat::from_rows({{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}});
}

TEST(MakeTheta, KindA) {
  const auto t = make_theta(ThetaKind::kA, 4, std::nullopt, 2);
  ASSERT_EQ(t.values.size(), 2u);
  EXPECT_DOUBLE_EQ(t.values[0], 1.0);
  EXPECT_NEAR(t.values[1], 0.01, 1e-15);
  EXPECT_EQ(make_theta(ThetaKind::kA, 2, std::nullopt, 1).values, RealVec{1.0});
}

TEST(MakeTheta, KindAStrictlyDecreasingInUnitInterval) {
  const auto t = make_theta(ThetaKind::kA, 64, std::nullopt, 32);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    EXPECT_GT(t.values[i], 0.0);
    EXPECT_LE(t.values[i], 1.0);
    if (i > 0) EXPECT_LT(t.values[i], t.values[i - 1]);
  }
}

TEST(MakeTheta, KindBIsLinearRamp) {
  const auto t = make_theta(ThetaKind::kB, 4, 8, 2);
  EXPECT_NEAR(t.values[0], pi / 32.0, 1e-15);
  EXPECT_NEAR(t.values[1], pi / 16.0, 1e-15);
}

TEST(MakeTheta, KindC) {
  const auto t = make_theta(ThetaKind::kC, 4, 8, 2);
  EXPECT_NEAR(t.values[0], pi / 16.0, 1e-15);
  EXPECT_NEAR(t.values[1], pi / 32.0, 1e-15);
}

TEST(MakeTheta, KindsBAndCNeedLength) {
  EXPECT_THROW(make_theta(ThetaKind::kB, 4, std::nullopt, 2), SpecError);
  EXPECT_THROW(make_theta(ThetaKind::kC, 4, std::nullopt, 2), SpecError);
}

TEST(BuildP, HouseholderWithE1ReflectsFirstAxis) {
  EncodingSpec spec = parse_spec("orthogonal:householder:a:3");
  TransformOverrides overrides;
  overrides.householder_v = RealVec{1.0, 0.0, 0.0};
  const PositionTransform tr(spec, overrides);
  const ComplexVec out = tr.apply(0, to_complex(RealVec{1, 2, 3}));
  EXPECT_EQ(out, to_complex(RealVec{-1, 2, 3}));
  const Mat p = tr.p_matrix();
  EXPECT_EQ(matmul(p, Mat::column(std::span<const double>(RealVec{1, 2, 3}))),
            Mat::from_rows({{-1}, {2}, {3}}));
}

TEST(BuildP, HouseholderVectorIsUnitAndDeterministic) {
  const RealVec a = householder_vector(16, 9);
  double norm2 = 0.0;
  for (double x : a) norm2 += x * x;
  EXPECT_NEAR(norm2, 1.0, 1e-14);
  EXPECT_EQ(a, householder_vector(16, 9));
  EXPECT_NE(a, householder_vector(16, 10));
}

TEST(BuildP, OddEvenD4) {
  EXPECT_EQ(odd_even_table(4), (std::vector<std::size_t>{0, 2, 1, 3}));
  const Mat p = build_p(PFamily::kOddEven, 4, 0);
  const Mat x = Mat::from_rows({{10}, {11}, {12}, {13}});
  EXPECT_EQ(matmul(p, x), Mat::from_rows({{10}, {12}, {11}, {13}}));
}

TEST(BuildP, OddEvenIsBijectionForOddD) {
  for (std::size_t d : {1u, 3u, 5u, 7u, 9u}) {
    auto table = odd_even_table(d);
    std::sort(table.begin(), table.end());
    for (std::size_t i = 0; i < d; ++i) EXPECT_EQ(table[i], i) << "d=" << d;
  }
}

TEST(BuildP, FourierD2) {
  const Mat f = build_p(PFamily::kFourier, 2, 0);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_LE(fro_distance(f, Mat::from_rows({{h, h}, {h, -h}})), 1e-15);
  EXPECT_LE(fro_distance(matmul(conj_transpose(f), f), Mat::identity(2)), 1e-12);
}

TEST(BuildP, AllFamiliesUnitary) {
  for (auto family : {PFamily::kIdentity, PFamily::kHouseholder, PFamily::kOddEven,
                      PFamily::kFourier}) {
    for (std::size_t d : {1u, 2u, 5u, 8u}) {
      const Mat p = build_p(family, d, 3);
      EXPECT_LE(fro_distance(matmul(conj_transpose(p), p), Mat::identity(d)), 1e-12);
    }
  }
}

TEST(LambdaUnitary, Examples) {
  const ComplexVec x{Complex(1, 2), Complex(-3, 0.5)};
  const RealVec theta{0.3, 1.1};
  EXPECT_EQ(lambda_unitary(0, theta, x), x);
  const ComplexVec out = lambda_unitary(2, RealVec{pi / 2}, ComplexVec{1.0});
  EXPECT_NEAR(std::abs(out[0] - Complex(-1.0, 0.0)), 0.0, 1e-15);
  const ComplexVec y = lambda_unitary(7, theta, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(y[i]), std::abs(x[i]), 1e-14);
  EXPECT_THROW(lambda_unitary(1, RealVec{0.1}, x), DimensionError);
}

TEST(LambdaOrthogonal, Examples) {
  const RealVec quarter = lambda_orthogonal(1, RealVec{pi / 2}, 0, RealVec{1, 0});
  EXPECT_NEAR(quarter[0], 0.0, 1e-15);
  EXPECT_NEAR(quarter[1], 1.0, 1e-15);

  const RealVec tail = lambda_orthogonal(1, RealVec{pi}, 2, RealVec{1, 0, 5, 7});
  EXPECT_NEAR(tail[0], -1.0, 1e-15);
  EXPECT_NEAR(tail[1], 0.0, 1e-15);
  EXPECT_EQ(tail[2], 5.0);
  EXPECT_EQ(tail[3], 7.0);

  const RealVec x{0.5, -1, 2, 3, 4};
  EXPECT_EQ(lambda_orthogonal(0, RealVec{0.7, 0.2}, 1, x), x);
  EXPECT_THROW(lambda_orthogonal(1, RealVec{0.7}, 0, RealVec{1, 2, 3}), DimensionError);
}

TEST(LambdaPermutation, ThreeCycle) {
  const PermutationSpec perm({1, 2, 0});
  EXPECT_EQ(perm.cycle_order(), 3u);
  const RealVec x{10, 20, 30};
  EXPECT_EQ(lambda_permutation(0, perm, std::span<const double>(x)), x);
  EXPECT_EQ(lambda_permutation(3, perm, std::span<const double>(x)), x);

  Mat dense(3, 3);
  for (std::size_t j = 0; j < 3; ++j) dense.set(j, perm.pi()[j], 1.0);
  const Mat expect = matmul(dense, Mat::column(std::span<const double>(x)));
  const RealVec got = lambda_permutation(1, perm, std::span<const double>(x));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(got[j], expect.re(j, 0));
  EXPECT_EQ(got, (RealVec{20, 30, 10}));
}

TEST(LambdaPermutation, PowerMatchesRepeatedGather) {
  Rng rng(4);
  const PermutationSpec perm = PermutationSpec::random(9, rng);
  const RealVec x = random_real_vec(rng, 9);
  RealVec repeated = x;
  for (std::int64_t s = 0; s < 40; ++s) {
    EXPECT_EQ(lambda_permutation(s, perm, std::span<const double>(x)), repeated) << "s=" << s;
    RealVec next(9);
    for (std::size_t j = 0; j < 9; ++j) next[j] = repeated[perm.pi()[j]];
    repeated = next;
  }
}

TEST(PermutationSpec, RejectsNonBijection) {
  EXPECT_THROW(PermutationSpec({0, 0, 1}), SpecError);
  EXPECT_THROW(PermutationSpec({0, 3}), SpecError);
}

TEST(PermutationSpec, CycleOrderIsLcm) {
  const PermutationSpec perm({1, 0, 3, 4, 2});
  EXPECT_EQ(perm.cycle_order(), 6u);
}

TEST(Spec, ParseRenderExamples) {
  const EncodingSpec spec = parse_spec("orthogonal:householder:a:64:q=0:seed=7");
  EXPECT_EQ(spec.lambda, LambdaFamily::kOrthogonal);
  EXPECT_EQ(spec.p, PFamily::kHouseholder);
  EXPECT_EQ(spec.theta_kind, ThetaKind::kA);
  EXPECT_EQ(spec.d, 64u);
  EXPECT_EQ(spec.q, 0u);
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(render_spec(spec), "orthogonal:householder:a:64:q=0:seed=7");
}

TEST(Spec, RejectsInvalid) {
  for (const char* text :
       {"", "orthogonal", "orthogonal:householder:a", "orthogonal:fourier:a:16",
        "mixed:identity:a:2", "orthogonal:identity:a:5:q=0", "unitary:identity:a:4:q=1",
        "unitary:identity:b:4", "orthogonal:identity:c:4", "foo:identity:a:4",
        "unitary:bar:a:4", "unitary:identity:z:4", "unitary:identity:a:0",
        "unitary:identity:a:4:seed=1:seed=2", "unitary:identity:a:4:w=3",
        "unitary:identity:a:x4", "mixed:identity:a:8:q=1"}) {
    EXPECT_THROW(parse_spec(text), SpecError) << text;
  }
}

TEST(Spec, RoundTripProperty) {
  Rng rng(77);
  const std::vector<std::string> lambdas{"unitary", "orthogonal", "mixed", "permutation", "none"};
  const std::vector<std::string> ps{"identity", "householder", "odd_even", "fourier"};
  const std::vector<std::string> kinds{"a", "b", "c", "learned-init-a"};
  std::size_t accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string text = lambdas[rng.next_below(5)] + ":" + ps[rng.next_below(4)] + ":" +
                       kinds[rng.next_below(4)] + ":" + std::to_string(1 + rng.next_below(20));
    if (rng.next_below(2)) text += ":q=" + std::to_string(rng.next_below(3));
    if (rng.next_below(2)) text += ":l=" + std::to_string(1 + rng.next_below(100));
    if (rng.next_below(2)) text += ":seed=" + std::to_string(rng.next_u64());
    EncodingSpec spec;
    try {
      spec = parse_spec(text);
    } catch (const SpecError&) {
      continue;
    }
    ++accepted;
    EXPECT_EQ(parse_spec(render_spec(spec)), spec) << text;
    EXPECT_EQ(render_spec(parse_spec(render_spec(spec))), render_spec(spec));
  }
  EXPECT_GT(accepted, 200u);
}

TEST(Spec, MixedSplitRule) {
  EXPECT_EQ(rotated_dim(parse_spec("mixed:identity:a:3")), 2u);
  EXPECT_EQ(rotated_dim(parse_spec("mixed:identity:a:8")), 4u);
  EXPECT_EQ(rotated_dim(parse_spec("mixed:identity:a:12")), 6u);
  EXPECT_EQ(rotated_dim(parse_spec("mixed:identity:a:10")), 6u);
  EXPECT_EQ(rotated_dim(parse_spec("orthogonal:identity:a:7")), 6u);
  EXPECT_EQ(rotated_dim(parse_spec("orthogonal:identity:a:8:q=2")), 6u);
}

TEST(PositionTransform, IdentityAtZeroAndUnitaryEverywhere) {
  for (std::size_t d : {4u, 7u}) {
    for (const auto& text : all_valid_specs(d)) {
      const PositionTransform tr(parse_spec(text));
      EXPECT_LE(fro_distance(tr.materialize(0), Mat::identity(d)), 1e-12) << text;
      for (std::int64_t s : {1, 5, 64}) {
        const Mat w = tr.materialize(s);
        EXPECT_LE(fro_distance(matmul(conj_transpose(w), w), Mat::identity(d)), 1e-10) << text;
      }
    }
  }
}

TEST(PositionTransform, NegativePositionThrows) {
  const PositionTransform tr(parse_spec("orthogonal:identity:a:4"));
  EXPECT_THROW(tr.materialize(-1), std::invalid_argument);
  EXPECT_THROW(tr.apply(-1, ComplexVec(4)), std::invalid_argument);
}

TEST(EncodePositions, NoneIsIdentity) {
  Rng rng(6);
  const Mat x = random_mat(rng, 10, 6);
  EXPECT_EQ(encode_positions(parse_spec("none:householder:a:6"), x), x);
}

TEST(EncodePositions, RowZeroUnchangedWithIdentityP) {
  Rng rng(7);
  const Mat x = random_mat(rng, 5, 8);
  for (const char* text : {"unitary:identity:a:8", "orthogonal:identity:a:8",
                           "mixed:identity:a:8", "permutation:identity:a:8"}) {
    const Mat y = encode_positions(parse_spec(text), x);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(std::abs(y(0, j) - x(0, j)), 0.0, 1e-15) << text;
  }
}

TEST(EncodePositions, MatchesDensePracticalForm) {
  Rng rng(8);
  for (std::size_t d : {4u, 7u, 16u}) {
    const Mat x = random_mat(rng, 40, d);
    for (const auto& text : all_valid_specs(d)) {
      const PositionTransform tr(parse_spec(text));
      const Mat y = encode_positions(tr, x);
      EXPECT_EQ(y.is_complex(), tr.is_complex() || tr.spec().p == PFamily::kFourier) << text;
      double worst = 0.0;
      for (std::size_t s = 0; s < x.rows(); ++s) {
        const ComplexVec row = x.row(s);
        const Mat expect = matmul(tr.materialize_practical(static_cast<std::int64_t>(s)),
                                  Mat::column(std::span<const Complex>(row)));
        for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(y(s, j) - expect(j, 0)));
      }
      EXPECT_LE(worst, 1e-10) << text;
    }
  }
}

TEST(EncodePositions, DimensionMismatchThrows) {
  EXPECT_THROW(encode_positions(parse_spec("orthogonal:identity:a:4"), Mat(3, 5)), DimensionError);
}

TEST(RelativeMatrix, ZeroOffsetIsIdentity) {
  for (const auto& text : all_valid_specs(6)) {
    const PositionTransform tr(parse_spec(text));
    for (std::int64_t a : {0, 3, 17}) {
      EXPECT_LE(fro_distance(relative_matrix(tr, 0, a), Mat::identity(6)), 1e-10) << text;
    }
  }
}

TEST(RelativeMatrix, OrthogonalD2IsRotationByOffset) {
  const double theta = 0.37;
  TransformOverrides overrides;
  overrides.theta = RealVec{theta};
  const PositionTransform tr(parse_spec("orthogonal:identity:a:2"), overrides);
  for (std::int64_t a : {0, 1, 9, 30}) {
    EXPECT_LE(fro_distance(relative_matrix(tr, 2, a), rotation(2 * theta)), 1e-12) << a;
  }
  EXPECT_LE(fro_distance(relative_matrix(tr, -3, 0), rotation(-3 * theta)), 1e-12);
  EXPECT_LE(fro_distance(relative_matrix(tr, -3, 5), rotation(-3 * theta)), 1e-12);
}

TEST(RelativeMatrix, PermutationOffsetIsPermutationPower) {
  const PositionTransform tr(parse_spec("permutation:identity:a:6:seed=11"));
  const PermutationSpec& perm = *tr.permutation();
  for (std::int64_t k = 0; k < 10; ++k) {
    Mat dense(6, 6);
    for (std::size_t j = 0; j < 6; ++j) dense.set(j, perm.power(j, static_cast<std::uint64_t>(k)), 1.0);
    EXPECT_EQ(relative_matrix(tr, k, 2), dense) << k;
  }
}

TEST(RelativeMatrix, NegativeAnchorThrows) {
  const PositionTransform tr(parse_spec("orthogonal:identity:a:4"));
  EXPECT_THROW(relative_matrix(tr, 1, -1), std::invalid_argument);
}

TEST(ThetaGrad, ZeroAtEqualPositions) {
  Rng rng(9);
  for (const char* text : {"unitary:householder:a:6", "orthogonal:householder:a:6",
                           "mixed:odd_even:a:7"}) {
    const PositionTransform tr(parse_spec(text));
    const ComplexVec q = to_complex(random_real_vec(rng, tr.dim()));
    const ComplexVec k = to_complex(random_real_vec(rng, tr.dim()));
    for (double g : theta_grad_score(tr, 5, 5, q, k)) EXPECT_EQ(g, 0.0) << text;
  }
}

TEST(ThetaGrad, OrthogonalD2ClosedForm) {
  const double alpha = 0.4;
  TransformOverrides overrides;
  overrides.theta = RealVec{alpha};
  const PositionTransform tr(parse_spec("orthogonal:identity:a:2"), overrides);
  const ComplexVec e1 = to_complex(RealVec{1, 0});
  for (std::int64_t s : {0, 3}) {
    for (std::int64_t t : {0, 2, 7}) {
      const double r = static_cast<double>(t - s);
      EXPECT_NEAR(score(tr, s, t, e1, e1), std::cos(r * alpha), 1e-14);
      const RealVec g = theta_grad_score(tr, s, t, e1, e1);
      ASSERT_EQ(g.size(), 1u);
      EXPECT_NEAR(g[0], -r * std::sin(r * alpha), 1e-14);
    }
  }
}

TEST(ThetaGrad, PermutationAndNoneThrow) {
  const ComplexVec x(4);
  EXPECT_THROW(theta_grad_score(PositionTransform(parse_spec("permutation:identity:a:4")), 0, 1, x, x),
               std::invalid_argument);
  EXPECT_THROW(theta_grad_score(PositionTransform(parse_spec("none:identity:a:4")), 0, 1, x, x),
               std::invalid_argument);
}

TEST(Score, MatrixFreeMatchesDenseRelative) {
  Rng rng(10);
  for (const auto& text : all_valid_specs(5)) {
    const PositionTransform tr(parse_spec(text));
    const ComplexVec q = random_complex_vec(rng, 5);
    const ComplexVec k = random_complex_vec(rng, 5);
    for (std::int64_t s : {0, 4, 11}) {
      for (std::int64_t t : {0, 6, 11}) {
        const Mat w = relative_matrix(tr, t - s, 0);
        const Mat wk = matmul(w, Mat::column(std::span<const Complex>(k)));
        const double expect = inner(q, wk.col(0)).real();
        EXPECT_NEAR(score(tr, s, t, q, k), expect, 1e-10) << text;
      }
    }
  }
}

}  // namespace
}  // namespace lrpe
