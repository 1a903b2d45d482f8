#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lbk/tensor.hpp"

namespace lbk {

/// Angles below this are treated as parallel and blended linearly.
inline constexpr double kDefaultEpsOmega = 1e-7;

enum class BlendMethod { kLinear, kSli };

struct StyleEntry {
  LatentVector vector;
  double weight;
  std::size_t source_index;
};

/// Ordered (vector, weight, source_index) triples. Weights are finite and
/// non-negative, all vectors share one dimension, and the set is non-empty.
class WeightedStyleSet {
 public:
  explicit WeightedStyleSet(std::vector<StyleEntry> entries);

  /// Builds a set whose source indices follow the argument order.
  static WeightedStyleSet from_pairs(
      std::vector<std::pair<LatentVector, double>> styles);

  const std::vector<StyleEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dim() const noexcept { return entries_.front().vector.dim(); }
  double weight_sum() const noexcept;

 private:
  std::vector<StyleEntry> entries_;
};

/// Scales weights to sum to one. Throws AllZeroWeights.
WeightedStyleSet normalize_weights(const WeightedStyleSet& set);

struct BlendResult {
  LatentVector vector;
  BlendMethod method;
  std::vector<std::size_t> order_used;  // source indices, in blend order
  std::vector<double> omega_trace;      // radians per pairwise SLI step
};

/// Sum of w_i z_i in source order. Expects normalized weights.
BlendResult linear_blend(const WeightedStyleSet& set);

struct SlerpResult {
  LatentVector vector;
  double omega;
};

/// Angle between the directions of two non-zero vectors, in [0, pi].
double angle_between(const LatentVector& a, const LatentVector& b);

/// Spherical interpolation from z1 (t = 0) to z2 (t = 1).
///
/// The angle comes from the normalized directions while the sine weights
/// are applied to the raw vectors, so magnitudes interpolate sinusoidally.
/// Angles below eps_omega fall back to (1 - t) z1 + t z2. Angles within
/// eps_omega of pi throw AntipodalVectors; zero inputs throw ZeroVector.
SlerpResult slerp_pair(const LatentVector& z1, const LatentVector& z2, double t,
                       double eps_omega = kDefaultEpsOmega);

enum class SliOrder {
  kDescendingWeight,  // weight descending, then source_index ascending
  kAsGiven,
};

/// k-way recursive spherical blend.
///
/// Styles are folded into a running blend one at a time; style i+1 enters
/// with t = w_{i+1} / (w_1 + ... + w_{i+1}). Because the fold is not
/// associative the order matters, and kDescendingWeight canonicalizes it.
/// Errors from slerp_pair carry the source_index of the entry being folded.
BlendResult sli_blend(const WeightedStyleSet& set,
                      double eps_omega = kDefaultEpsOmega,
                      SliOrder order = SliOrder::kDescendingWeight);

struct ChordArc {
  double chord;  // 2 sin(omega / 2)
  double arc;    // omega
};

/// Chord and geodesic distance between the unit directions of z1 and z2.
ChordArc chord_and_arc(const LatentVector& z1, const LatentVector& z2);

}  // namespace lbk
