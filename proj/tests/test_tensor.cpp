#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lbk/error.hpp"
#include "lbk/tensor.hpp"
#include "support/oracles.hpp"

using namespace lbk;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an lbk::Error");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_CASE("dot products of basis and small vectors") {
  CHECK(dot(LatentVector::basis(4, 0), LatentVector::basis(4, 0)) == 1.0);
  CHECK(dot(LatentVector::basis(4, 0), LatentVector::basis(4, 1)) == 0.0);
  CHECK(dot(LatentVector{1, 2, 3}, LatentVector{4, 5, 6}) == 32.0);
  CHECK(kind_of([] { dot(LatentVector{1, 2}, LatentVector{1, 2, 3}); }) ==
        ErrorKind::kDimensionMismatch);
}

TEST_CASE("norms") {
  CHECK(norm(LatentVector::zeros(4)) == 0.0);
  CHECK(norm(LatentVector::basis(8, 3)) == 1.0);
  CHECK(norm(LatentVector{3, 4}) == 5.0);
}

TEST_CASE("latent vectors reject empty and non-finite data") {
  CHECK(kind_of([] { LatentVector(std::vector<double>{}); }) ==
        ErrorKind::kInvalidShape);
  CHECK(kind_of([] {
          LatentVector{1.0, std::numeric_limits<double>::quiet_NaN()};
        }) == ErrorKind::kNonFinite);
  CHECK(kind_of([] {
          LatentVector{std::numeric_limits<double>::infinity()};
        }) == ErrorKind::kNonFinite);
  CHECK(kind_of([] { LatentVector::zeros(3).normalized(); }) ==
        ErrorKind::kZeroVector);
}

TEST_CASE("matrices and feature maps validate their shape") {
  CHECK(kind_of([] { Matrix(0, 3); }) == ErrorKind::kInvalidShape);
  CHECK(kind_of([] { Matrix(2, 2, {1, 2, 3}); }) == ErrorKind::kInvalidShape);
  CHECK(kind_of([] { FeatureMap(1, 0); }) == ErrorKind::kInvalidShape);
  CHECK(kind_of([] { Matrix::from_rows({{1, 2}, {3}}); }) ==
        ErrorKind::kInvalidShape);
}

TEST_CASE("channel statistics") {
  SUBCASE("constant channel is floored") {
    const FeatureMap f = FeatureMap::from_channels({{2, 2, 2, 2}});
    const ChannelStats s = channel_stats(f, 1e-5);
    CHECK(s.mean[0] == 2.0);
    CHECK(s.std[0] == 1e-5);
  }
  SUBCASE("population std of {1, 3}") {
    const ChannelStats s = channel_stats(FeatureMap::from_channels({{1, 3}}));
    CHECK(s.mean[0] == 2.0);
    CHECK(s.std[0] == 1.0);
  }
  SUBCASE("per-channel") {
    const ChannelStats s =
        channel_stats(FeatureMap::from_channels({{0, 0}, {1, -1}}));
    CHECK(s.mean[0] == 0.0);
    CHECK(s.mean[1] == 0.0);
    CHECK(s.std[0] == 1e-5);
    CHECK(s.std[1] == 1.0);
  }
  CHECK(kind_of([] { channel_stats(FeatureMap(1, 2), 0.0); }) ==
        ErrorKind::kInvalidArgument);
}

TEST_CASE("channel statistics match a two-pass oracle and shift with the data") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t C = 1 + rng() % 5;
    const std::size_t N = 2 + rng() % 40;
    const FeatureMap f(C, N, oracle::gaussian(rng, C * N, 3.0));
    const double shift = oracle::gaussian(rng, 1, 10.0)[0];
    std::vector<double> shifted(f.values().begin(), f.values().end());
    for (double& x : shifted) x += shift;
    const ChannelStats a = channel_stats(f);
    const ChannelStats b = channel_stats(FeatureMap(C, N, shifted));
    for (std::size_t c = 0; c < C; ++c) {
      const oracle::Stats o = oracle::stats(oracle::to_std(f.channel(c)));
      CHECK(a.mean[c] == doctest::Approx(o.mean).epsilon(1e-12));
      CHECK(a.std[c] == doctest::Approx(o.std).epsilon(1e-12));
      CHECK(b.mean[c] == doctest::Approx(a.mean[c] + shift).epsilon(1e-12));
      CHECK(std::abs(b.std[c] - a.std[c]) <= 1e-10 * a.std[c]);
    }
  }
}

TEST_CASE("softmax rows") {
  const Matrix m = Matrix::from_rows(
      {{0, 0, 0}, {1000, 1000, 1000}, {0, std::log(3.0), -1e300}});
  const Matrix s = softmax_rows(m);
  CHECK(s(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int j = 0; j < 3; ++j) {
    CHECK(std::isfinite(s(1, j)));
    CHECK(s(1, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  CHECK(s(2, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s(2, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(softmax_rows(Matrix::from_rows({{0, 0}}))(0, 1) == 0.5);
}

TEST_CASE("softmax rows sum to one and agree with a direct exp oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 1 + rng() % 6;
    const std::size_t cols = 1 + rng() % 12;
    const Matrix m = oracle::random_matrix(rng, rows, cols, 8.0);
    const Matrix s = softmax_rows(m);
    REQUIRE(s.rows() == rows);
    REQUIRE(s.cols() == cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      const auto expected = oracle::softmax(oracle::to_std(m.row(r)));
      for (std::size_t c = 0; c < cols; ++c) {
        CHECK(s(r, c) >= 0.0);
        CHECK(s(r, c) <= 1.0);
        CHECK(s(r, c) == doctest::Approx(expected[c]).epsilon(1e-12));
        sum += s(r, c);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("norm vanishes only at zero and Cauchy-Schwarz holds") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng() % 16;
    const LatentVector a(oracle::gaussian(rng, d));
    const LatentVector b(oracle::gaussian(rng, d));
    CHECK(a.norm() > 0.0);
    CHECK(std::abs(dot(a, b)) <= a.norm() * b.norm() * (1 + 1e-12));
  }
  CHECK(LatentVector::zeros(5).norm() == 0.0);
  CHECK(LatentVector{0, 0, 1e-300}.norm() > 0.0);
}

TEST_CASE("token views transpose feature maps") {
  const FeatureMap f = FeatureMap::from_channels({{1, 2, 3}, {4, 5, 6}});
  const Matrix t = to_tokens(f);
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 2);
  CHECK(t(2, 0) == 3.0);
  CHECK(t(0, 1) == 4.0);
  CHECK(from_tokens(t) == f);
}

TEST_CASE("matrix products") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  const Matrix ab = matmul(a, b);
  CHECK(ab == Matrix::from_rows({{19, 22}, {43, 50}}));
  const Matrix abt = matmul_transposed(a, b);
  CHECK(abt == Matrix::from_rows({{17, 23}, {39, 53}}));
  CHECK(vstack(a, b).rows() == 4);
  CHECK(kind_of([&] { matmul(a, Matrix(3, 1)); }) ==
        ErrorKind::kDimensionMismatch);
}
