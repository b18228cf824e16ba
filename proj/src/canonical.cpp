#include "lrpe/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lrpe::canonical {

namespace {

Mat operand_matrix(Operand op, std::span<const Complex> x) {
  return op == Operand::kVector ? Mat::column(x) : Mat::identity(x.size());
}

Complex entry_sum(const Mat& m) {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) sum += m(i, j);
  }
  return sum;
}

void require_dim(std::span<const Complex> q, std::span<const Complex> k, const char* where) {
  if (q.size() != k.size()) {
    throw DimensionError(std::string(where) + ": q has " + std::to_string(q.size()) +
                         " components, k has " + std::to_string(k.size()));
  }
}

ComplexVec table_row(const Mat& table, std::int64_t row) {
  if (row < 0 || static_cast<std::size_t>(row) >= table.rows()) {
    throw std::out_of_range("table row " + std::to_string(row) + " outside [0, " +
                            std::to_string(table.rows()) + ")");
  }
  return table.row(static_cast<std::size_t>(row));
}

// (1/d) [v ... v], d identical columns.
Mat replicate_columns(std::span<const Complex> v, std::size_t d) {
  Mat m(v.size(), d, true);
  const double scale = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) m.set(i, j, scale * v[i]);
  }
  return m;
}

}  // namespace

double AdditiveConfig::at(std::int64_t r) const {
  const std::int64_t idx = r - min_offset;
  if (idx < 0 || static_cast<std::size_t>(idx) >= bias.size()) {
    throw std::out_of_range("additive bias: offset " + std::to_string(r) +
                            " outside table");
  }
  return bias[static_cast<std::size_t>(idx)];
}

std::int64_t deberta_bucket(std::int64_t x, std::int64_t c) {
  if (x <= -c) return 0;
  if (x >= c) return 2 * c - 1;
  return x + c;
}

std::int64_t clip_offset(std::int64_t x, std::int64_t k) {
  return std::max(-k, std::min(k, x));
}

Complex eval_additive(std::span<const Complex> q, std::span<const Complex> k,
                      std::int64_t r, const AdditiveConfig& cfg) {
  require_dim(q, k, "eval_additive");
  return inner(q, k) + cfg.at(r);
}

Complex eval_multiplicative(std::span<const Complex> q, std::span<const Complex> k,
                            std::int64_t r, const RelativeFn& w) {
  require_dim(q, k, "eval_multiplicative");
  const Mat wr = w(r);
  if (wr.rows() != q.size() || wr.cols() != k.size()) {
    throw DimensionError("eval_multiplicative: W(r) is " + std::to_string(wr.rows()) + "x" +
                         std::to_string(wr.cols()) + ", vectors have " +
                         std::to_string(q.size()) + " components");
  }
  Complex sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Complex row = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) row += wr(i, j) * k[j];
    sum += std::conj(q[i]) * row;
  }
  return sum;
}

Complex eval_deberta(std::span<const Complex> q, std::span<const Complex> k,
                     std::int64_t s, std::int64_t t, const DebertaConfig& cfg) {
  require_dim(q, k, "eval_deberta");
  const ComplexVec kbar = table_row(cfg.key_table, deberta_bucket(s - t, cfg.window));
  const ComplexVec qbar = table_row(cfg.query_table, deberta_bucket(t - s, cfg.window));
  return inner(q, k) + inner(q, kbar) + inner(qbar, k);
}

Complex eval_rpr(std::span<const Complex> q, std::span<const Complex> k, std::int64_t r,
                 const RprConfig& cfg) {
  require_dim(q, k, "eval_rpr");
  const ComplexVec w = table_row(cfg.table, clip_offset(r, cfg.clip) + cfg.clip);
  return inner(q, k) + inner(q, w);
}

Complex eval_cosformer(std::span<const Complex> q, std::span<const Complex> k,
                       std::int64_t r, const CosformerConfig& cfg) {
  require_dim(q, k, "eval_cosformer");
  return inner(q, k) * std::cos(cfg.alpha * static_cast<double>(r));
}

CanonicalForm additive_form(const AdditiveConfig& cfg, std::size_t d) {
  CanonicalForm form{"additive", {}};
  form.primitives.push_back(
      {Operand::kVector, Operand::kVector, [d](std::int64_t) { return Mat::identity(d); }});
  // Entry-sum of w/d * I_d is w.
  form.primitives.push_back({Operand::kIdentity, Operand::kIdentity, [cfg, d](std::int64_t r) {
                               return (cfg.at(r) / static_cast<double>(d)) * Mat::identity(d);
                             }});
  return form;
}

CanonicalForm multiplicative_form(RelativeFn w) {
  return {"multiplicative", {{Operand::kVector, Operand::kVector, std::move(w)}}};
}

CanonicalForm deberta_form(const DebertaConfig& cfg, std::size_t d) {
  CanonicalForm form{"deberta", {}};
  form.primitives.push_back(
      {Operand::kVector, Operand::kVector, [d](std::int64_t) { return Mat::identity(d); }});
  // r = t - s, so s - t = -r.
  form.primitives.push_back({Operand::kVector, Operand::kIdentity, [cfg, d](std::int64_t r) {
                               return replicate_columns(
                                   table_row(cfg.key_table, deberta_bucket(-r, cfg.window)), d);
                             }});
  // Row replication of qbar^H: with the identity on the query side the
  // contraction sums rows, so each row must carry qbar^H / d.
  form.primitives.push_back({Operand::kIdentity, Operand::kVector, [cfg, d](std::int64_t r) {
                               return conj_transpose(replicate_columns(
                                   table_row(cfg.query_table, deberta_bucket(r, cfg.window)),
                                   d));
                             }});
  return form;
}

CanonicalForm rpr_form(const RprConfig& cfg, std::size_t d) {
  CanonicalForm form{"rpr", {}};
  form.primitives.push_back(
      {Operand::kVector, Operand::kVector, [d](std::int64_t) { return Mat::identity(d); }});
  form.primitives.push_back({Operand::kVector, Operand::kIdentity, [cfg, d](std::int64_t r) {
                               return replicate_columns(
                                   table_row(cfg.table, clip_offset(r, cfg.clip) + cfg.clip), d);
                             }});
  return form;
}

CanonicalForm cosformer_form(const CosformerConfig& cfg, std::size_t d) {
  return {"cosformer",
          {{Operand::kVector, Operand::kVector, [cfg, d](std::int64_t r) {
              return std::cos(cfg.alpha * static_cast<double>(r)) * Mat::identity(d);
            }}}};
}

Complex compose(const CanonicalForm& form, std::span<const Complex> q,
                std::span<const Complex> k, std::int64_t s, std::int64_t t) {
  if (form.primitives.empty()) throw std::invalid_argument("compose: empty canonical form");
  Complex total = 0.0;
  for (const auto& prim : form.primitives) {
    const Mat qhat = operand_matrix(prim.query, q);
    const Mat khat = operand_matrix(prim.key, k);
    const Mat w = prim.relative(t - s);
    if (w.rows() != qhat.rows() || w.cols() != khat.rows()) {
      throw DimensionError("compose: primitive of form '" + form.name + "' does not conform");
    }
    total += entry_sum(matmul(conj_transpose(qhat), matmul(w, khat)));
  }
  return total;
}

Complex compose_stacked(const CanonicalForm& form, std::span<const Complex> q,
                        std::span<const Complex> k, std::int64_t s, std::int64_t t) {
  if (form.primitives.empty()) throw std::invalid_argument("compose: empty canonical form");
  std::vector<Mat> qhats;
  std::vector<Mat> khats;
  std::vector<Mat> ws;
  std::size_t rows_q = 0;
  std::size_t rows_k = 0;
  std::size_t width_q = 0;
  std::size_t width_k = 0;
  for (const auto& prim : form.primitives) {
    qhats.push_back(operand_matrix(prim.query, q));
    khats.push_back(operand_matrix(prim.key, k));
    ws.push_back(prim.relative(t - s));
    if (ws.back().rows() != qhats.back().rows() || ws.back().cols() != khats.back().rows()) {
      throw DimensionError("compose_stacked: primitive of form '" + form.name +
                           "' does not conform");
    }
    rows_q += qhats.back().rows();
    rows_k += khats.back().rows();
    width_q = std::max(width_q, qhats.back().cols());
    width_k = std::max(width_k, khats.back().cols());
  }

  Mat qstack(rows_q, width_q, true);
  Mat kstack(rows_k, width_k, true);
  Mat wblock(rows_q, rows_k, true);
  std::size_t off_q = 0;
  std::size_t off_k = 0;
  for (std::size_t l = 0; l < ws.size(); ++l) {
    for (std::size_t i = 0; i < qhats[l].rows(); ++i) {
      for (std::size_t j = 0; j < qhats[l].cols(); ++j) qstack.set(off_q + i, j, qhats[l](i, j));
    }
    for (std::size_t i = 0; i < khats[l].rows(); ++i) {
      for (std::size_t j = 0; j < khats[l].cols(); ++j) kstack.set(off_k + i, j, khats[l](i, j));
    }
    for (std::size_t i = 0; i < ws[l].rows(); ++i) {
      for (std::size_t j = 0; j < ws[l].cols(); ++j) wblock.set(off_q + i, off_k + j, ws[l](i, j));
    }
    off_q += qhats[l].rows();
    off_k += khats[l].rows();
  }
  return entry_sum(matmul(conj_transpose(qstack), matmul(wblock, kstack)));
}

AdditiveConfig random_additive(Rng& rng, std::int64_t max_offset) {
  AdditiveConfig cfg;
  cfg.min_offset = -max_offset;
  cfg.bias = random_real_vec(rng, static_cast<std::size_t>(2 * max_offset + 1));
  return cfg;
}

DebertaConfig random_deberta(Rng& rng, std::int64_t window, std::size_t d) {
  if (window < 1) throw std::invalid_argument("random_deberta: window must be >= 1");
  DebertaConfig cfg;
  cfg.window = window;
  cfg.key_table = random_mat(rng, static_cast<std::size_t>(2 * window), d);
  cfg.query_table = random_mat(rng, static_cast<std::size_t>(2 * window), d);
  return cfg;
}

RprConfig random_rpr(Rng& rng, std::int64_t clip, std::size_t d) {
  if (clip < 0) throw std::invalid_argument("random_rpr: clip must be >= 0");
  RprConfig cfg;
  cfg.clip = clip;
  cfg.table = random_mat(rng, static_cast<std::size_t>(2 * clip + 1), d);
  return cfg;
}

}  // namespace lrpe::canonical
