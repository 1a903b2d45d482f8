#include "lbk/blending.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lbk/error.hpp"

namespace lbk {

WeightedStyleSet::WeightedStyleSet(std::vector<StyleEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw Error(ErrorKind::kEmptySet, "a style set needs at least one style");
  }
  const std::size_t d = entries_.front().vector.dim();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const StyleEntry& e = entries_[i];
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "style weight must be finite and non-negative, got " +
                      std::to_string(e.weight),
                  i);
    }
    if (e.vector.dim() != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "style has d_z " + std::to_string(e.vector.dim()) +
                      ", expected " + std::to_string(d),
                  i);
    }
  }
}

WeightedStyleSet WeightedStyleSet::from_pairs(
    std::vector<std::pair<LatentVector, double>> styles) {
  std::vector<StyleEntry> entries;
  entries.reserve(styles.size());
  for (std::size_t i = 0; i < styles.size(); ++i) {
    entries.push_back({std::move(styles[i].first), styles[i].second, i});
  }
  return WeightedStyleSet(std::move(entries));
}

double WeightedStyleSet::weight_sum() const noexcept {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight;
  return sum;
}

WeightedStyleSet normalize_weights(const WeightedStyleSet& set) {
  const double sum = set.weight_sum();
  if (!(sum > 0.0)) {
    throw Error(ErrorKind::kAllZeroWeights, "style weights sum to zero");
  }
  std::vector<StyleEntry> entries = set.entries();
  for (auto& e : entries) e.weight /= sum;
  return WeightedStyleSet(std::move(entries));
}

BlendResult linear_blend(const WeightedStyleSet& set) {
  std::vector<double> acc(set.dim(), 0.0);
  std::vector<std::size_t> order;
  order.reserve(set.size());
  for (const auto& e : set.entries()) {
    const auto z = e.vector.values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += e.weight * z[j];
    order.push_back(e.source_index);
  }
  return {LatentVector(std::move(acc)), BlendMethod::kLinear, std::move(order),
          {}};
}

double angle_between(const LatentVector& a, const LatentVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "vectors have d_z " + std::to_string(a.dim()) + " and " +
                    std::to_string(b.dim()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::kZeroVector, "angle with a zero vector is undefined");
  }
  // 2 atan2(|u - v|, |u + v|) equals arccos(u . v) but keeps full precision
  // near 0 and pi where arccos is ill-conditioned.
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double u = a[i] / na;
    const double v = b[i] / nb;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return std::clamp(2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum)), 0.0,
                    std::numbers::pi);
}

SlerpResult slerp_pair(const LatentVector& z1, const LatentVector& z2, double t,
                       double eps_omega) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "interpolation parameter t must lie in [0, 1], got " +
                    std::to_string(t));
  }
  if (!(eps_omega > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "eps_omega must be positive");
  }
  const double omega = angle_between(z1, z2);
  if (std::numbers::pi - omega < eps_omega) {
    throw Error(ErrorKind::kAntipodalVectors,
                "vectors are antipodal (omega = " + std::to_string(omega) +
                    "); the geodesic is undefined");
  }
  if (t == 0.0) return {z1, omega};
  if (t == 1.0) return {z2, omega};

  double c1;
  double c2;
  if (omega < eps_omega) {
    c1 = 1.0 - t;
    c2 = t;
  } else {
    const double s = std::sin(omega);
    c1 = std::sin((1.0 - t) * omega) / s;
    c2 = std::sin(t * omega) / s;
  }
  std::vector<double> out(z1.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c1 * z1[i] + c2 * z2[i];
  return {LatentVector(std::move(out)), omega};
}

BlendResult sli_blend(const WeightedStyleSet& set, double eps_omega,
                      SliOrder order) {
  if (!(set.weight_sum() > 0.0)) {
    throw Error(ErrorKind::kAllZeroWeights, "style weights sum to zero");
  }
  const auto& entries = set.entries();
  std::vector<std::size_t> idx(entries.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (order == SliOrder::kDescendingWeight) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (entries[a].weight != entries[b].weight) {
        return entries[a].weight > entries[b].weight;
      }
      return entries[a].source_index < entries[b].source_index;
    });
  }

  if (idx.size() > 1) {
    for (std::size_t i : idx) {
      if (entries[i].vector.norm() == 0.0) {
        throw Error(ErrorKind::kZeroVector,
                    "style has a zero latent vector; its direction is undefined",
                    entries[i].source_index);
      }
    }
  }

  BlendResult result{entries[idx[0]].vector, BlendMethod::kSli, {}, {}};
  result.order_used.push_back(entries[idx[0]].source_index);
  double running = entries[idx[0]].weight;
  for (std::size_t step = 1; step < idx.size(); ++step) {
    const StyleEntry& next = entries[idx[step]];
    running += next.weight;
    const double t = running > 0.0 ? next.weight / running : 0.0;
    try {
      SlerpResult r = slerp_pair(result.vector, next.vector, t, eps_omega);
      result.vector = std::move(r.vector);
      result.omega_trace.push_back(r.omega);
    } catch (const Error& e) {
      throw e.with_subject(next.source_index);
    }
    result.order_used.push_back(next.source_index);
  }
  return result;
}

ChordArc chord_and_arc(const LatentVector& z1, const LatentVector& z2) {
  const double omega = angle_between(z1, z2);
  return {2.0 * std::sin(omega / 2.0), omega};
}

}  // namespace lbk
