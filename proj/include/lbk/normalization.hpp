#pragma once

#include "lbk/tensor.hpp"

namespace lbk {

struct AdainConfig {
  double eps_std = kDefaultStdFloor;  // must be > 0
};

/// Adaptive instance normalization: re-standardizes each channel of `g` to
/// the mean and std of the matching channel of `s`. Spatial sizes may
/// differ; channel counts must agree (ChannelMismatch otherwise).
FeatureMap adain(const FeatureMap& g, const FeatureMap& s,
                 const AdainConfig& cfg = {});

/// AdaIN over token matrices: columns are channels, rows are positions.
/// Used to give queries/keys the reference's per-dimension statistics.
Matrix adain_rows(const Matrix& x, const Matrix& ref,
                  const AdainConfig& cfg = {});

}  // namespace lbk
