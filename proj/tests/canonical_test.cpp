#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lrpe/canonical.hpp"
#include "lrpe/encoding.hpp"

namespace lrpe::canonical {
namespace {

using std::numbers::pi;

constexpr double kTol = 1e-10;

Mat random_square(Rng& rng, std::size_t d) {
  Mat m(d, d, true);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.set(i, j, Complex(rng.next_normal(), rng.next_normal()));
  }
  return m;
}

TEST(DebertaBucket, WindowTwo) {
  EXPECT_EQ(deberta_bucket(-3, 2), 0);
  EXPECT_EQ(deberta_bucket(-2, 2), 0);
  EXPECT_EQ(deberta_bucket(-1, 2), 1);
  EXPECT_EQ(deberta_bucket(0, 2), 2);
  EXPECT_EQ(deberta_bucket(1, 2), 3);
  EXPECT_EQ(deberta_bucket(3, 2), 3);
}

TEST(ClipOffset, Examples) {
  EXPECT_EQ(clip_offset(5, 3), 3);
  EXPECT_EQ(clip_offset(-5, 3), -3);
  EXPECT_EQ(clip_offset(2, 3), 2);
}

TEST(Additive, ZeroBiasIsInnerProduct) {
  Rng rng(1);
  const ComplexVec q = random_complex_vec(rng, 4);
  const ComplexVec k = random_complex_vec(rng, 4);
  AdditiveConfig cfg{-5, RealVec(11, 0.0)};
  EXPECT_EQ(eval_additive(q, k, 3, cfg), inner(q, k));
}

TEST(Additive, ZeroVectorsGiveBias) {
  AdditiveConfig cfg{-1, RealVec{1.0, 2.0, 3.0}};
  const ComplexVec zero(4);
  EXPECT_EQ(eval_additive(zero, zero, 1, cfg), Complex(3.0));
}

TEST(Additive, OffsetOutsideTableThrows) {
  AdditiveConfig cfg{-1, RealVec{1.0, 2.0, 3.0}};
  const ComplexVec zero(2);
  EXPECT_THROW(eval_additive(zero, zero, 2, cfg), std::out_of_range);
  EXPECT_THROW(eval_additive(zero, zero, -2, cfg), std::out_of_range);
}

TEST(Multiplicative, IdentityIsInnerProduct) {
  Rng rng(2);
  const ComplexVec q = random_complex_vec(rng, 5);
  const ComplexVec k = random_complex_vec(rng, 5);
  const Complex got = eval_multiplicative(q, k, 4, [](std::int64_t) { return Mat::identity(5); });
  EXPECT_NEAR(std::abs(got - inner(q, k)), 0.0, 1e-14);
}

TEST(Multiplicative, HalfTurnOfE1) {
  const ComplexVec e1{1.0, 0.0};
  const Complex got = eval_multiplicative(e1, e1, 1, [](std::int64_t r) {
    const double a = pi * static_cast<double>(r);
    return Mat::from_rows({{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}});
  });
  EXPECT_NEAR(std::abs(got - Complex(-1.0)), 0.0, 1e-15);
}

TEST(Multiplicative, MatchesEncodeThenInner) {
  Rng rng(3);
  for (const char* text : {"orthogonal:householder:a:8", "unitary:fourier:a:8",
                           "mixed:odd_even:a:9", "permutation:householder:a:8:seed=4"}) {
    const PositionTransform tr(parse_spec(text));
    for (int draw = 0; draw < 20; ++draw) {
      const ComplexVec q = to_complex(random_real_vec(rng, tr.dim()));
      const ComplexVec k = to_complex(random_real_vec(rng, tr.dim()));
      const std::int64_t s = static_cast<std::int64_t>(rng.next_below(30));
      const std::int64_t t = static_cast<std::int64_t>(rng.next_below(30));
      const Complex direct = eval_multiplicative(
          q, k, t - s, [&](std::int64_t r) { return relative_matrix(tr, r, 0); });
      const double encoded = inner(tr.apply(s, q), tr.apply(t, k)).real();
      EXPECT_NEAR(direct.real(), encoded, kTol) << text;
    }
  }
}

TEST(Multiplicative, ShapeMismatchThrows) {
  const ComplexVec q(3);
  EXPECT_THROW(eval_multiplicative(q, q, 0, [](std::int64_t) { return Mat::identity(2); }),
               DimensionError);
}

TEST(Deberta, ZeroTablesReduceToInnerProduct) {
  Rng rng(4);
  const ComplexVec q = random_complex_vec(rng, 3);
  const ComplexVec k = random_complex_vec(rng, 3);
  DebertaConfig cfg{2, Mat(4, 3), Mat(4, 3)};
  EXPECT_EQ(eval_deberta(q, k, 0, 7, cfg), inner(q, k));
}

TEST(Deberta, DirectFormula) {
  Rng rng(5);
  const DebertaConfig cfg = random_deberta(rng, 3, 4);
  const ComplexVec q = random_complex_vec(rng, 4);
  const ComplexVec k = random_complex_vec(rng, 4);
  const std::int64_t s = 5;
  const std::int64_t t = 4;
  Complex expect = inner(q, k);
  for (std::size_t i = 0; i < 4; ++i) {
    expect += std::conj(q[i]) * cfg.key_table(4, i);    // g(1) = 1 + 3
    expect += std::conj(cfg.query_table(2, i)) * k[i];  // g(-1) = -1 + 3
  }
  EXPECT_NEAR(std::abs(eval_deberta(q, k, s, t, cfg) - expect), 0.0, 1e-14);
}

TEST(Rpr, ZeroTableIsInnerProduct) {
  Rng rng(6);
  const ComplexVec q = random_complex_vec(rng, 3);
  const ComplexVec k = random_complex_vec(rng, 3);
  RprConfig cfg{2, Mat(5, 3)};
  EXPECT_EQ(eval_rpr(q, k, 9, cfg), inner(q, k));
}

TEST(Rpr, ClippedRowIsUsed) {
  Rng rng(7);
  const RprConfig cfg = random_rpr(rng, 2, 3);
  const ComplexVec q = random_complex_vec(rng, 3);
  const ComplexVec zero(3);
  EXPECT_EQ(eval_rpr(q, zero, 9, cfg), inner(q, cfg.table.row(4)));
  EXPECT_EQ(eval_rpr(q, zero, -9, cfg), inner(q, cfg.table.row(0)));
  EXPECT_EQ(eval_rpr(q, zero, -1, cfg), inner(q, cfg.table.row(1)));
}

TEST(Cosformer, Examples) {
  Rng rng(8);
  const ComplexVec q = random_complex_vec(rng, 4);
  const ComplexVec k = random_complex_vec(rng, 4);
  EXPECT_EQ(eval_cosformer(q, k, 0, {0.3}), inner(q, k));
  EXPECT_NEAR(std::abs(eval_cosformer(q, k, 2, {pi / 4})), 0.0, 1e-15);
}

TEST(Compose, SingleIdentityPrimitiveIsInnerProduct) {
  Rng rng(9);
  const ComplexVec q = random_complex_vec(rng, 6);
  const ComplexVec k = random_complex_vec(rng, 6);
  const auto form = multiplicative_form([](std::int64_t) { return Mat::identity(6); });
  EXPECT_NEAR(std::abs(compose(form, q, k, 3, 1) - inner(q, k)), 0.0, 1e-14);
}

TEST(Compose, EmptyFormThrows) {
  const ComplexVec q(2);
  EXPECT_THROW(compose(CanonicalForm{"empty", {}}, q, q, 0, 0), std::invalid_argument);
}

TEST(Compose, StackedEqualsSummedOnRandomForms) {
  Rng rng(10);
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t d = 1 + rng.next_below(6);
    CanonicalForm form{"random", {}};
    const std::size_t m = 1 + rng.next_below(4);
    for (std::size_t l = 0; l < m; ++l) {
      const Mat w = random_square(rng, d);
      const auto qop = rng.next_below(2) ? Operand::kVector : Operand::kIdentity;
      const auto kop = rng.next_below(2) ? Operand::kVector : Operand::kIdentity;
      form.primitives.push_back({qop, kop, [w](std::int64_t) { return w; }});
    }
    const ComplexVec q = random_complex_vec(rng, d);
    const ComplexVec k = random_complex_vec(rng, d);
    const Complex summed = compose(form, q, k, 2, 5);
    const Complex stacked = compose_stacked(form, q, k, 2, 5);
    EXPECT_LE(std::abs(summed - stacked), 1e-12 * std::max(1.0, std::abs(summed)));
  }
}

class DecompositionTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(DecompositionTest, DirectEqualsCompose) {
  const std::size_t d = GetParam();
  Rng rng(100 + d);
  const AdditiveConfig additive = random_additive(rng, 40);
  const DebertaConfig deberta = random_deberta(rng, 4, d);
  const RprConfig rpr = random_rpr(rng, 5, d);
  const CosformerConfig cos{0.05 + rng.next_uniform()};
  const auto forms = std::vector<CanonicalForm>{additive_form(additive, d),
                                                deberta_form(deberta, d), rpr_form(rpr, d),
                                                cosformer_form(cos, d)};
  for (int draw = 0; draw < 100; ++draw) {
    const ComplexVec q = random_complex_vec(rng, d);
    const ComplexVec k = random_complex_vec(rng, d);
    const std::int64_t s = static_cast<std::int64_t>(rng.next_below(20));
    const std::int64_t t = static_cast<std::int64_t>(rng.next_below(20));
    const Complex direct[] = {eval_additive(q, k, t - s, additive),
                              eval_deberta(q, k, s, t, deberta), eval_rpr(q, k, t - s, rpr),
                              eval_cosformer(q, k, t - s, cos)};
    for (std::size_t i = 0; i < forms.size(); ++i) {
      EXPECT_LE(std::abs(direct[i] - compose(forms[i], q, k, s, t)), kTol) << forms[i].name;
      EXPECT_LE(std::abs(direct[i] - compose_stacked(forms[i], q, k, s, t)), kTol)
          << forms[i].name;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, DecompositionTest, ::testing::Values(1, 3, 8));

}  // namespace
}  // namespace lrpe::canonical
