#pragma once

#include <span>
#include <string>
#include <vector>

#include "lbk/tensor.hpp"

namespace lbk {

/// Cosine similarity clamped to [-1, 1]. Throws ZeroVector.
double cosine_similarity(const LatentVector& a, const LatentVector& b);

/// Arithmetic mean of cosine_similarity(g, ref) over `generated`, summed
/// left to right. Throws EmptySet for an empty set.
double mean_similarity(std::span<const LatentVector> generated,
                       const LatentVector& ref);

struct ReferenceStyle {
  std::string name;
  LatentVector embedding;
  double weight;
};

/// Embeddings of a generated image set plus the weighted references it is
/// scored against. All embeddings are non-zero and share one dimension;
/// weights are non-negative with a positive sum.
class EmbeddingSet {
 public:
  EmbeddingSet(std::vector<LatentVector> generated,
               std::vector<ReferenceStyle> references);

  const std::vector<LatentVector>& generated() const noexcept {
    return generated_;
  }
  const std::vector<ReferenceStyle>& references() const noexcept {
    return references_;
  }

  /// Weights rescaled to sum to one.
  EmbeddingSet normalized() const;
  /// Same embeddings with a new weight per reference.
  EmbeddingSet with_weights(std::span<const double> weights) const;

 private:
  std::vector<LatentVector> generated_;
  std::vector<ReferenceStyle> references_;
};

struct StyleScore {
  std::string name;
  double ms;
};

struct WmsReport {
  std::vector<StyleScore> per_style_ms;  // reference order
  double wms = 0.0;
  double ms_gap = 0.0;  // max pairwise |MS_i - MS_j|
};

/// sum_i w_i * ms_i, left to right.
double weighted_multi_style(std::span<const double> ms,
                            std::span<const double> weights);

/// Largest |a_i - a_j| over all pairs; 0 for fewer than two values.
double max_pairwise_gap(std::span<const double> values);

/// Per-style mean similarities and the weighted multi-style score. Weights
/// are used as stored; normalize the set first for a weighted mean.
WmsReport wms_score(const EmbeddingSet& es);

struct ScoreDropBound {
  double wms;
  double max_ms;
  bool holds;  // wms <= max_ms + 1e-12
};

/// The weighted score of a normalized set never exceeds its best single
/// style score.
ScoreDropBound score_drop_bound(const EmbeddingSet& es);

}  // namespace lbk
