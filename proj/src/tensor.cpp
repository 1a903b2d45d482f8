#include "lbk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "lbk/error.hpp"

namespace lbk {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::kNonFinite, std::string(what) +
                                             " has a non-finite entry at index " +
                                             std::to_string(i));
    }
  }
}

void require_shape(std::size_t rows, std::size_t cols, std::size_t size,
                   const char* what) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::kInvalidShape,
                std::string(what) + " must have at least one row and column");
  }
  if (rows * cols != size) {
    throw Error(ErrorKind::kInvalidShape,
                std::string(what) + " of shape " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " cannot hold " +
                    std::to_string(size) + " values");
  }
}

}  // namespace

LatentVector::LatentVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorKind::kInvalidShape, "latent vector must have d_z >= 1");
  }
  require_finite(values_, "latent vector");
}

LatentVector::LatentVector(std::initializer_list<double> values)
    : LatentVector(std::vector<double>(values)) {}

LatentVector LatentVector::zeros(std::size_t dim) {
  return LatentVector(std::vector<double>(dim, 0.0));
}

LatentVector LatentVector::basis(std::size_t dim, std::size_t axis) {
  if (axis >= dim) {
    throw Error(ErrorKind::kInvalidArgument, "basis axis out of range");
  }
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return LatentVector(std::move(v));
}

double LatentVector::norm() const noexcept {
  double sum = 0.0;
  for (double x : values_) sum += x * x;
  if (sum >= std::numeric_limits<double>::min() && std::isfinite(sum)) {
    return std::sqrt(sum);
  }
  // Squares under- or overflowed; rescale by the largest magnitude so a
  // tiny non-zero vector keeps a non-zero norm.
  double big = 0.0;
  for (double x : values_) big = std::max(big, std::abs(x));
  if (big == 0.0) return 0.0;
  sum = 0.0;
  for (double x : values_) sum += (x / big) * (x / big);
  return big * std::sqrt(sum);
}

LatentVector LatentVector::normalized() const {
  const double n = norm();
  if (n == 0.0) {
    throw Error(ErrorKind::kZeroVector, "cannot normalize the zero vector");
  }
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] / n;
  return LatentVector(std::move(out));
}

double dot(const LatentVector& a, const LatentVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dot of vectors with d_z " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(const LatentVector& a) noexcept { return a.norm(); }

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require_shape(rows_, cols_, values_.size(), "matrix");
  require_finite(values_, "matrix");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    throw Error(ErrorKind::kInvalidShape, "matrix must have at least one row");
  }
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw Error(ErrorKind::kInvalidShape, "ragged matrix rows");
    }
    values.insert(values.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(values));
}

FeatureMap::FeatureMap(std::size_t channels, std::size_t positions)
    : FeatureMap(channels, positions,
                 std::vector<double>(channels * positions, 0.0)) {}

FeatureMap::FeatureMap(std::size_t channels, std::size_t positions,
                       std::vector<double> values)
    : channels_(channels), positions_(positions), values_(std::move(values)) {
  require_shape(channels_, positions_, values_.size(), "feature map");
  require_finite(values_, "feature map");
}

FeatureMap FeatureMap::from_channels(
    const std::vector<std::vector<double>>& channels) {
  const Matrix m = Matrix::from_rows(channels);
  return FeatureMap(m.rows(), m.cols(),
                    std::vector<double>(m.values().begin(), m.values().end()));
}

namespace {

// Mean and floored population std of a strided sequence.
std::pair<double, double> strided_stats(const double* data, std::size_t count,
                                        std::size_t stride, double eps_std) {
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum += data[i * stride];
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = data[i * stride] - mean;
    sq += d * d;
  }
  const double std = std::sqrt(sq / static_cast<double>(count));
  return {mean, std::max(std, eps_std)};
}

void require_positive_floor(double eps_std) {
  if (!(eps_std > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "eps_std must be positive");
  }
}

}  // namespace

ChannelStats channel_stats(const FeatureMap& f, double eps_std) {
  require_positive_floor(eps_std);
  ChannelStats stats;
  stats.mean.resize(f.channels());
  stats.std.resize(f.channels());
  for (std::size_t c = 0; c < f.channels(); ++c) {
    std::tie(stats.mean[c], stats.std[c]) =
        strided_stats(f.channel(c).data(), f.positions(), 1, eps_std);
  }
  return stats;
}

ChannelStats column_stats(const Matrix& m, double eps_std) {
  require_positive_floor(eps_std);
  ChannelStats stats;
  stats.mean.resize(m.cols());
  stats.std.resize(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::tie(stats.mean[c], stats.std[c]) =
        strided_stats(m.values().data() + c, m.rows(), m.cols(), eps_std);
  }
  return stats;
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto in = m.row(r);
    auto dst = out.row(r);
    const double peak = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      sum += dst[c];
    }
    for (double& x : dst) x /= sum;
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "feature dimensions " + std::to_string(a.cols()) + " and " +
                    std::to_string(b.cols()) + " differ");
  }
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto bj = b.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < ai.size(); ++k) sum += ai[k] * bj[k];
      out(i, j) = sum;
    }
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "inner dimensions " + std::to_string(a.cols()) + " and " +
                    std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * bk[j];
    }
  }
  return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "cannot stack matrices with " + std::to_string(top.cols()) +
                    " and " + std::to_string(bottom.cols()) + " columns");
  }
  std::vector<double> values(top.values().begin(), top.values().end());
  values.insert(values.end(), bottom.values().begin(), bottom.values().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(values));
}

Matrix to_tokens(const FeatureMap& f) {
  Matrix out(f.positions(), f.channels());
  for (std::size_t c = 0; c < f.channels(); ++c) {
    for (std::size_t n = 0; n < f.positions(); ++n) out(n, c) = f(c, n);
  }
  return out;
}

FeatureMap from_tokens(const Matrix& tokens) {
  FeatureMap out(tokens.cols(), tokens.rows());
  for (std::size_t n = 0; n < tokens.rows(); ++n) {
    for (std::size_t c = 0; c < tokens.cols(); ++c) out(c, n) = tokens(n, c);
  }
  return out;
}

}  // namespace lbk
