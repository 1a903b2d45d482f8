#include "lbk/normalization.hpp"

#include <string>

#include "lbk/error.hpp"

namespace lbk {

FeatureMap adain(const FeatureMap& g, const FeatureMap& s,
                 const AdainConfig& cfg) {
  if (g.channels() != s.channels()) {
    throw Error(ErrorKind::kChannelMismatch,
                "generated map has " + std::to_string(g.channels()) +
                    " channels, style map has " +
                    std::to_string(s.channels()));
  }
  const ChannelStats gs = channel_stats(g, cfg.eps_std);
  const ChannelStats ss = channel_stats(s, cfg.eps_std);
  FeatureMap out(g.channels(), g.positions());
  for (std::size_t c = 0; c < g.channels(); ++c) {
    const auto src = g.channel(c);
    auto dst = out.channel(c);
    for (std::size_t n = 0; n < src.size(); ++n) {
      dst[n] = ss.std[c] * (src[n] - gs.mean[c]) / gs.std[c] + ss.mean[c];
    }
  }
  return out;
}

Matrix adain_rows(const Matrix& x, const Matrix& ref, const AdainConfig& cfg) {
  if (x.cols() != ref.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "token matrices have " + std::to_string(x.cols()) + " and " +
                    std::to_string(ref.cols()) + " feature columns");
  }
  const ChannelStats xs = column_stats(x, cfg.eps_std);
  const ChannelStats rs = column_stats(ref, cfg.eps_std);
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      out(r, c) = rs.std[c] * (x(r, c) - xs.mean[c]) / xs.std[c] + rs.mean[c];
    }
  }
  return out;
}

}  // namespace lbk
