#include "lbk/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lbk/error.hpp"

namespace lbk {

double cosine_similarity(const LatentVector& a, const LatentVector& b) {
  const double d = dot(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::kZeroVector,
                "cosine similarity with a zero vector is undefined");
  }
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

double mean_similarity(std::span<const LatentVector> generated,
                       const LatentVector& ref) {
  if (generated.empty()) {
    throw Error(ErrorKind::kEmptySet, "generated embedding set is empty");
  }
  double sum = 0.0;
  for (const auto& g : generated) sum += cosine_similarity(g, ref);
  return sum / static_cast<double>(generated.size());
}

EmbeddingSet::EmbeddingSet(std::vector<LatentVector> generated,
                           std::vector<ReferenceStyle> references)
    : generated_(std::move(generated)), references_(std::move(references)) {
  if (generated_.empty()) {
    throw Error(ErrorKind::kEmptySet, "generated embedding set is empty");
  }
  if (references_.empty()) {
    throw Error(ErrorKind::kEmptySet, "no reference styles given");
  }
  const std::size_t d = references_.front().embedding.dim();
  auto check = [d](const LatentVector& v, const std::string& what,
                   std::size_t index) {
    if (v.dim() != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  what + " has dimension " + std::to_string(v.dim()) +
                      ", expected " + std::to_string(d),
                  index);
    }
    if (v.norm() == 0.0) {
      throw Error(ErrorKind::kZeroVector, what + " is the zero vector", index);
    }
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < references_.size(); ++i) {
    const auto& r = references_[i];
    check(r.embedding, "reference '" + r.name + "'", i);
    if (!std::isfinite(r.weight) || r.weight < 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "reference '" + r.name + "' has a negative or non-finite weight",
                  i);
    }
    sum += r.weight;
  }
  if (!(sum > 0.0)) {
    throw Error(ErrorKind::kAllZeroWeights, "reference weights sum to zero");
  }
  for (std::size_t i = 0; i < generated_.size(); ++i) {
    check(generated_[i], "generated embedding #" + std::to_string(i), i);
  }
}

EmbeddingSet EmbeddingSet::normalized() const {
  double sum = 0.0;
  for (const auto& r : references_) sum += r.weight;
  std::vector<ReferenceStyle> refs = references_;
  for (auto& r : refs) r.weight /= sum;
  return EmbeddingSet(generated_, std::move(refs));
}

EmbeddingSet EmbeddingSet::with_weights(std::span<const double> weights) const {
  if (weights.size() != references_.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                std::to_string(weights.size()) + " weights given for " +
                    std::to_string(references_.size()) + " references");
  }
  std::vector<ReferenceStyle> refs = references_;
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i].weight = weights[i];
  return EmbeddingSet(generated_, std::move(refs));
}

double weighted_multi_style(std::span<const double> ms,
                            std::span<const double> weights) {
  if (ms.size() != weights.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "one weight per style score is required");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) sum += weights[i] * ms[i];
  return sum;
}

double max_pairwise_gap(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

WmsReport wms_score(const EmbeddingSet& es) {
  WmsReport report;
  std::vector<double> ms;
  std::vector<double> weights;
  for (const auto& ref : es.references()) {
    const double m = mean_similarity(es.generated(), ref.embedding);
    report.per_style_ms.push_back({ref.name, m});
    ms.push_back(m);
    weights.push_back(ref.weight);
  }
  report.wms = weighted_multi_style(ms, weights);
  report.ms_gap = max_pairwise_gap(ms);
  return report;
}

ScoreDropBound score_drop_bound(const EmbeddingSet& es) {
  const WmsReport report = wms_score(es);
  double max_ms = report.per_style_ms.front().ms;
  for (const auto& s : report.per_style_ms) max_ms = std::max(max_ms, s.ms);
  return {report.wms, max_ms, report.wms <= max_ms + 1e-12};
}

}  // namespace lbk
