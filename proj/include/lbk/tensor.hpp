#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lbk {

/// Floor applied to per-channel standard deviations.
inline constexpr double kDefaultStdFloor = 1e-5;

/// A 1-D latent or embedding vector. Non-empty, all entries finite.
class LatentVector {
 public:
  explicit LatentVector(std::vector<double> values);
  LatentVector(std::initializer_list<double> values);

  static LatentVector zeros(std::size_t dim);
  /// Unit basis vector e_axis in R^dim.
  static LatentVector basis(std::size_t dim, std::size_t axis);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double norm() const noexcept;
  /// Unit-length copy. Throws ZeroVector for the zero vector.
  LatentVector normalized() const;

  bool operator==(const LatentVector&) const = default;

 private:
  std::vector<double> values_;
};

double dot(const LatentVector& a, const LatentVector& b);
double norm(const LatentVector& a) noexcept;

/// Row-major dense matrix, rows >= 1 and cols >= 1.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) noexcept {
    return values_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// Channels x spatial positions activation map (C >= 1, N >= 1).
class FeatureMap {
 public:
  FeatureMap(std::size_t channels, std::size_t positions);  // zero-filled
  FeatureMap(std::size_t channels, std::size_t positions,
             std::vector<double> values);

  static FeatureMap from_channels(
      const std::vector<std::vector<double>>& channels);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t positions() const noexcept { return positions_; }

  double operator()(std::size_t c, std::size_t n) const noexcept {
    return values_[c * positions_ + n];
  }
  double& operator()(std::size_t c, std::size_t n) noexcept {
    return values_[c * positions_ + n];
  }

  std::span<const double> channel(std::size_t c) const noexcept {
    return {values_.data() + c * positions_, positions_};
  }
  std::span<double> channel(std::size_t c) noexcept {
    return {values_.data() + c * positions_, positions_};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t channels_;
  std::size_t positions_;
  std::vector<double> values_;
};

/// Population mean and floored standard deviation per channel.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;
};

ChannelStats channel_stats(const FeatureMap& f,
                           double eps_std = kDefaultStdFloor);

/// Statistics of each column of `m`, pooling over rows.
ChannelStats column_stats(const Matrix& m, double eps_std = kDefaultStdFloor);

/// Numerically stable row-wise softmax (max subtraction).
Matrix softmax_rows(const Matrix& m);

// Small helpers for the attention kernels.

/// a * b^T. Requires a.cols() == b.cols().
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
/// a * b. Requires a.cols() == b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);
/// Rows of `top` followed by rows of `bottom`.
Matrix vstack(const Matrix& top, const Matrix& bottom);

/// Tokens view of a feature map: positions become rows, channels columns.
Matrix to_tokens(const FeatureMap& f);
FeatureMap from_tokens(const Matrix& tokens);

}  // namespace lbk
