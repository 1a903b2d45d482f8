#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbk/tensor.hpp"

namespace lbk {

enum class NpyDtype { kF4, kF8 };

/// A 1-D or 2-D real array read from or destined for an NPY v1.0 file.
/// Values are always held as doubles; `dtype` records the on-disk type.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;  // C order
  NpyDtype dtype = NpyDtype::kF8;
};

/// Decodes an in-memory NPY v1.0 file (little-endian f4/f8, C order, 1-D or
/// 2-D, no empty axes). Errors name the byte offset where decoding failed.
NpyArray parse_npy(std::string_view bytes);

/// Encodes as NPY v1.0. The header is space-padded so that the payload
/// starts on a 64-byte boundary. kF4 narrows values to float.
std::string encode_npy(const NpyArray& array, NpyDtype dtype = NpyDtype::kF8);

NpyArray read_npy(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed write never leaves a partial file at `path`.
void write_npy(const std::filesystem::path& path, const NpyArray& array,
               NpyDtype dtype = NpyDtype::kF8);

NpyArray to_npy(const LatentVector& v);
NpyArray to_npy(const Matrix& m);
NpyArray to_npy(const FeatureMap& f);
/// Stacks equal-length vectors as the rows of a 2-D array.
NpyArray to_npy(std::span<const LatentVector> rows);

/// 1-D arrays only.
LatentVector as_vector(const NpyArray& a);
/// 1-D arrays give one vector; 2-D arrays give one vector per row.
std::vector<LatentVector> as_row_vectors(const NpyArray& a);
/// 2-D arrays only; rows become channels.
FeatureMap as_feature_map(const NpyArray& a);
/// 2-D arrays only; a 1-D array of length d is taken as a 1 x d matrix.
Matrix as_matrix(const NpyArray& a);

}  // namespace lbk
