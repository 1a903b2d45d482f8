#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lbk/normalization.hpp"
#include "lbk/tensor.hpp"

namespace lbk {

/// Query, key and value token matrices. q.cols() == k.cols() (= d) and
/// k.rows() == v.rows().
struct AttentionInputs {
  Matrix q;
  Matrix k;
  Matrix v;
};

struct AttentionResult {
  Matrix out;      // tokens_q x d_v
  Matrix weights;  // tokens_q x tokens_k, rows sum to one
};

/// softmax(Q K^T / sqrt(d)) V.
AttentionResult attention(const AttentionInputs& inp);

/// Affine transform logit -> logit * sigma + mu applied to reference-key
/// logits before the softmax.
struct RescaleParams {
  double mu = 0.0;
  double sigma = 1.0;  // must be > 0

  static RescaleParams identity() { return {0.0, 1.0}; }
};

enum class StyleClass { kNormal, kFamous };

std::string_view to_string(StyleClass c) noexcept;

struct StyleClassifierConfig {
  double threshold = 0.5;
  RescaleParams normal{0.69314718055994530942, 1.0};  // {ln 2, 1}
  RescaleParams famous{0.0, 0.5};                      // {ln 1, 0.5}

  const RescaleParams& params_for(StyleClass c) const noexcept {
    return c == StyleClass::kFamous ? famous : normal;
  }
};

/// Mean Euclidean norm of the rows of `m`.
double mean_row_norm(const Matrix& m);

/// kFamous iff the mean key-row norm of the reference exceeds the threshold.
StyleClass classify_style(const Matrix& ref_k,
                          const StyleClassifierConfig& cfg = {});

struct SharedAttentionOutput {
  Matrix updated;             // tokens_q x d_v
  Matrix weights;             // tokens_q x (ref_tokens + self_tokens)
  double ref_mass = 0.0;      // mean probability on reference keys
  std::size_t ref_tokens = 0;
};

/// Attention of `q` over the concatenated keys [ref_k; self_k] and values
/// [ref_v; self_v]. Only the reference-key logits are rescaled. This is the
/// kernel of shared_attention once queries and keys are normalized.
SharedAttentionOutput reference_attention(const Matrix& q, const Matrix& ref_k,
                                          const Matrix& self_k,
                                          const Matrix& ref_v,
                                          const Matrix& self_v,
                                          const RescaleParams& rescale);

/// Style-aligned shared attention: self queries and keys are AdaIN-normalized
/// to the reference's queries and keys, then attend over reference and self
/// tokens with the reference block rescaled. Values are used unnormalized.
SharedAttentionOutput shared_attention(const AttentionInputs& self,
                                       const AttentionInputs& ref,
                                       const RescaleParams& rescale,
                                       const AdainConfig& adain_cfg = {});

struct StyleBlock {
  Matrix k;
  Matrix v;
  double weight;
};

struct BlockAttentionOutput {
  Matrix updated;
  Matrix weights;
  std::vector<double> lambdas;     // w_i / sum_j w_j
  std::vector<double> block_mass;  // mean probability on each block's keys
};

/// Joint attention over several style blocks where block i's logits are
/// multiplied by lambda_i = w_i / sum_j w_j.
BlockAttentionOutput lambda_rescaled_attention(const Matrix& q,
                                               std::span<const StyleBlock> blocks);

/// Shannon entropy (nats) of each weight row.
std::vector<double> row_entropy(const Matrix& weights);

}  // namespace lbk
