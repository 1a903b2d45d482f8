#include "lbk/attention.hpp"

#include <cmath>
#include <string>

#include "lbk/error.hpp"

namespace lbk {
namespace {

void check_qkv(const Matrix& q, const Matrix& k, const Matrix& v,
               const char* who) {
  if (q.cols() != k.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(who) + ": query dim " + std::to_string(q.cols()) +
                    " != key dim " + std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(who) + ": " + std::to_string(k.rows()) +
                    " keys but " + std::to_string(v.rows()) + " values");
  }
}

void check_inputs(const AttentionInputs& inp, const char* who) {
  check_qkv(inp.q, inp.k, inp.v, who);
}

void check_rescale(const RescaleParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || !(p.sigma > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "rescale needs finite mu and sigma > 0");
  }
}

// Row-wise mean of the probability mass in columns [begin, end).
double mean_block_mass(const Matrix& weights, std::size_t begin,
                       std::size_t end) {
  double total = 0.0;
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = begin; c < end; ++c) row += weights(r, c);
    total += row;
  }
  return total / static_cast<double>(weights.rows());
}

}  // namespace

std::string_view to_string(StyleClass c) noexcept {
  return c == StyleClass::kFamous ? "famous" : "normal";
}

AttentionResult attention(const AttentionInputs& inp) {
  check_inputs(inp, "attention");
  Matrix logits = matmul_transposed(inp.q, inp.k);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(inp.k.cols()));
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (double& x : logits.row(r)) x *= inv_sqrt_d;
  }
  Matrix weights = softmax_rows(logits);
  Matrix out = matmul(weights, inp.v);
  return {std::move(out), std::move(weights)};
}

double mean_row_norm(const Matrix& m) {
  double total = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sq = 0.0;
    for (double x : m.row(r)) sq += x * x;
    total += std::sqrt(sq);
  }
  return total / static_cast<double>(m.rows());
}

StyleClass classify_style(const Matrix& ref_k,
                          const StyleClassifierConfig& cfg) {
  if (!(cfg.threshold > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "threshold T must be positive");
  }
  return mean_row_norm(ref_k) > cfg.threshold ? StyleClass::kFamous
                                              : StyleClass::kNormal;
}

SharedAttentionOutput reference_attention(const Matrix& q, const Matrix& ref_k,
                                          const Matrix& self_k,
                                          const Matrix& ref_v,
                                          const Matrix& self_v,
                                          const RescaleParams& rescale) {
  check_rescale(rescale);
  check_qkv(q, ref_k, ref_v, "reference block");
  check_qkv(q, self_k, self_v, "self block");
  if (ref_v.cols() != self_v.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "reference and self values have different widths");
  }

  const std::size_t n_ref = ref_k.rows();
  const std::size_t n_self = self_k.rows();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const Matrix ref_logits = matmul_transposed(q, ref_k);
  const Matrix self_logits = matmul_transposed(q, self_k);

  Matrix logits(q.rows(), n_ref + n_self);
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t j = 0; j < n_ref; ++j) {
      logits(r, j) = ref_logits(r, j) * inv_sqrt_d * rescale.sigma + rescale.mu;
    }
    for (std::size_t j = 0; j < n_self; ++j) {
      logits(r, n_ref + j) = self_logits(r, j) * inv_sqrt_d;
    }
  }

  SharedAttentionOutput result{Matrix(1, 1), softmax_rows(logits), 0.0, n_ref};
  result.updated = matmul(result.weights, vstack(ref_v, self_v));
  result.ref_mass = mean_block_mass(result.weights, 0, n_ref);
  return result;
}

SharedAttentionOutput shared_attention(const AttentionInputs& self,
                                       const AttentionInputs& ref,
                                       const RescaleParams& rescale,
                                       const AdainConfig& adain_cfg) {
  check_inputs(self, "self tokens");
  check_inputs(ref, "reference tokens");
  const Matrix q_hat = adain_rows(self.q, ref.q, adain_cfg);
  const Matrix k_hat = adain_rows(self.k, ref.k, adain_cfg);
  return reference_attention(q_hat, ref.k, k_hat, ref.v, self.v, rescale);
}

BlockAttentionOutput lambda_rescaled_attention(
    const Matrix& q, std::span<const StyleBlock> blocks) {
  if (blocks.empty()) {
    throw Error(ErrorKind::kEmptySet, "need at least one style block");
  }
  double weight_sum = 0.0;
  std::size_t total_keys = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const StyleBlock& b = blocks[i];
    check_qkv(q, b.k, b.v, "style block");
    if (b.v.cols() != blocks.front().v.cols()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "style blocks have different value widths", i);
    }
    if (!std::isfinite(b.weight) || b.weight < 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "style block weight must be finite and non-negative", i);
    }
    weight_sum += b.weight;
    total_keys += b.k.rows();
  }
  if (!(weight_sum > 0.0)) {
    throw Error(ErrorKind::kAllZeroWeights, "style block weights sum to zero");
  }

  BlockAttentionOutput result{Matrix(1, 1), Matrix(1, 1), {}, {}};
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix logits(q.rows(), total_keys);
  std::size_t offset = 0;
  for (const StyleBlock& b : blocks) {
    const double lambda = b.weight / weight_sum;
    result.lambdas.push_back(lambda);
    const Matrix raw = matmul_transposed(q, b.k);
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t j = 0; j < b.k.rows(); ++j) {
        logits(r, offset + j) = raw(r, j) * inv_sqrt_d * lambda;
      }
    }
    offset += b.k.rows();
  }
  result.weights = softmax_rows(logits);

  Matrix values = blocks.front().v;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    values = vstack(values, blocks[i].v);
  }
  result.updated = matmul(result.weights, values);

  offset = 0;
  for (const StyleBlock& b : blocks) {
    result.block_mass.push_back(
        mean_block_mass(result.weights, offset, offset + b.k.rows()));
    offset += b.k.rows();
  }
  return result;
}

std::vector<double> row_entropy(const Matrix& weights) {
  std::vector<double> out(weights.rows(), 0.0);
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    double h = 0.0;
    for (double p : weights.row(r)) {
      if (p > 0.0) h -= p * std::log(p);
    }
    out[r] = h;
  }
  return out;
}

}  // namespace lbk
