#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lrpe/numerics.hpp"

// Relative encodings written as a sum of primitive triples
//
//   f(q_s, k_t) = sum_l contract( qhat_l^H  W_l(t - s)  khat_l ),
//
// where a primitive operand is either the vector itself or the identity I_d.
// Identity operands make the triple matrix-valued; `contract` sums all
// entries, which turns the 1/d column-replication primitives back into the
// scalar terms they stand for.

namespace lrpe::canonical {

enum class Operand { kVector, kIdentity };

using RelativeFn = std::function<Mat(std::int64_t offset)>;

struct Primitive {
  Operand query = Operand::kVector;
  Operand key = Operand::kVector;
  RelativeFn relative;
};

struct CanonicalForm {
  std::string name;
  std::vector<Primitive> primitives;
};

/// Bias w_r for offsets min_offset .. min_offset + bias.size() - 1.
struct AdditiveConfig {
  std::int64_t min_offset = 0;
  RealVec bias;
  double at(std::int64_t r) const;
};

/// Bucketed relative vectors, 2c rows each, indexed by deberta_bucket.
struct DebertaConfig {
  std::int64_t window = 1;
  Mat key_table;
  Mat query_table;
};

/// Row clip(r, k) + k of `table` holds w_{clip(r, k)}.
struct RprConfig {
  std::int64_t clip = 0;
  Mat table;
};

struct CosformerConfig {
  double alpha = 0.0;
};

/// 0 for x <= -c, 2c - 1 for x >= c, x + c otherwise.
std::int64_t deberta_bucket(std::int64_t x, std::int64_t c);
/// max(-k, min(k, x)).
std::int64_t clip_offset(std::int64_t x, std::int64_t k);

Complex eval_additive(std::span<const Complex> q, std::span<const Complex> k,
                      std::int64_t r, const AdditiveConfig& cfg);
Complex eval_multiplicative(std::span<const Complex> q, std::span<const Complex> k,
                            std::int64_t r, const RelativeFn& w);
Complex eval_deberta(std::span<const Complex> q, std::span<const Complex> k,
                     std::int64_t s, std::int64_t t, const DebertaConfig& cfg);
Complex eval_rpr(std::span<const Complex> q, std::span<const Complex> k, std::int64_t r,
                 const RprConfig& cfg);
Complex eval_cosformer(std::span<const Complex> q, std::span<const Complex> k,
                       std::int64_t r, const CosformerConfig& cfg);

CanonicalForm additive_form(const AdditiveConfig& cfg, std::size_t d);
CanonicalForm multiplicative_form(RelativeFn w);
CanonicalForm deberta_form(const DebertaConfig& cfg, std::size_t d);
CanonicalForm rpr_form(const RprConfig& cfg, std::size_t d);
CanonicalForm cosformer_form(const CosformerConfig& cfg, std::size_t d);

/// Sum over primitives of the contracted triple.
Complex compose(const CanonicalForm& form, std::span<const Complex> q,
                std::span<const Complex> k, std::int64_t s, std::int64_t t);
/// The same value through one stacked primitive: operands stacked vertically
/// (zero-padded to a common width) against block-diag{W_1, ..., W_m}.
Complex compose_stacked(const CanonicalForm& form, std::span<const Complex> q,
                        std::span<const Complex> k, std::int64_t s, std::int64_t t);

AdditiveConfig random_additive(Rng& rng, std::int64_t max_offset);
DebertaConfig random_deberta(Rng& rng, std::int64_t window, std::size_t d);
RprConfig random_rpr(Rng& rng, std::int64_t clip, std::size_t d);

}  // namespace lrpe::canonical
