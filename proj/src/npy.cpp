#include "lbk/npy.hpp"

#include <unistd.h>

#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <system_error>

#include "lbk/error.hpp"

namespace lbk {
namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreamble = 10;  // magic, version, header length

[[noreturn]] void fail(ErrorKind kind, std::size_t offset,
                       const std::string& what) {
  throw Error(kind, what + " (at byte " + std::to_string(offset) + ")");
}

// Reader for the Python-literal dict in the header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (3, 4), }
class HeaderParser {
 public:
  HeaderParser(std::string_view text, std::size_t base)
      : text_(text), base_(base) {}

  struct Fields {
    std::optional<std::string> descr;
    std::optional<bool> fortran_order;
    std::optional<std::vector<std::size_t>> shape;
  };

  Fields parse() {
    Fields f;
    expect('{');
    for (;;) {
      skip_space();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::size_t key_at = pos_;
      const std::string key = string_literal();
      expect(':');
      skip_space();
      if (key == "descr") {
        f.descr = string_literal();
      } else if (key == "fortran_order") {
        f.fortran_order = boolean();
      } else if (key == "shape") {
        f.shape = tuple();
      } else {
        fail(ErrorKind::kMalformedHeader, base_ + key_at,
             "unexpected header key '" + key + "'");
      }
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail(ErrorKind::kMalformedHeader, base_ + pos_,
             "expected ',' or '}' in header");
      }
    }
    skip_space();
    if (pos_ != text_.size()) {
      fail(ErrorKind::kMalformedHeader, base_ + pos_,
           "trailing characters after header dict");
    }
    return f;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) {
      fail(ErrorKind::kMalformedHeader, base_ + pos_,
           std::string("expected '") + c + "' in header");
    }
    ++pos_;
  }

  std::string string_literal() {
    skip_space();
    const char quote = peek();
    if (quote != '\'' && quote != '"') {
      fail(ErrorKind::kMalformedHeader, base_ + pos_,
           "expected a quoted string in header");
    }
    const std::size_t start = ++pos_;
    while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
    if (pos_ == text_.size()) {
      fail(ErrorKind::kMalformedHeader, base_ + start, "unterminated string");
    }
    return std::string(text_.substr(start, pos_++ - start));
  }

  bool boolean() {
    if (text_.substr(pos_).starts_with("True")) {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_).starts_with("False")) {
      pos_ += 5;
      return false;
    }
    fail(ErrorKind::kMalformedHeader, base_ + pos_, "expected True or False");
  }

  std::vector<std::size_t> tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    for (;;) {
      skip_space();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        fail(ErrorKind::kMalformedHeader, base_ + pos_,
             "expected a dimension in shape tuple");
      }
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        const std::size_t digit = static_cast<std::size_t>(peek() - '0');
        if (value > (SIZE_MAX - digit) / 10) {
          fail(ErrorKind::kMalformedHeader, base_ + pos_, "dimension overflows");
        }
        value = value * 10 + digit;
        ++pos_;
      }
      dims.push_back(value);
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail(ErrorKind::kMalformedHeader, base_ + pos_,
             "expected ',' or ')' in shape tuple");
      }
    }
  }

  std::string_view text_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

template <typename UInt>
UInt load_le(const char* p) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    v |= static_cast<UInt>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

template <typename UInt>
void store_le(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_shape(const NpyArray& a) {
  if (a.shape.empty() || a.shape.size() > 2) {
    throw Error(ErrorKind::kInvalidShape, "only 1-D and 2-D arrays are supported");
  }
  for (std::size_t d : a.shape) {
    if (d == 0) throw Error(ErrorKind::kInvalidShape, "arrays may not be empty");
  }
  if (element_count(a.shape) != a.data.size()) {
    throw Error(ErrorKind::kInvalidShape, "shape does not match data length");
  }
}

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

}  // namespace

NpyArray parse_npy(std::string_view bytes) {
  if (bytes.size() < kMagic.size() ||
      bytes.substr(0, kMagic.size()) != kMagic) {
    fail(ErrorKind::kBadMagic, 0, "missing NPY magic string");
  }
  if (bytes.size() < kPreamble) {
    fail(ErrorKind::kTruncatedPayload, bytes.size(),
         "file ends inside the NPY preamble");
  }
  if (bytes[6] != '\x01' || bytes[7] != '\x00') {
    fail(ErrorKind::kUnsupportedVersion, 6,
         "NPY version " + std::to_string(static_cast<unsigned char>(bytes[6])) +
             "." + std::to_string(static_cast<unsigned char>(bytes[7])) +
             " is not supported (only 1.0)");
  }
  const std::size_t header_len = load_le<std::uint16_t>(bytes.data() + 8);
  if (bytes.size() < kPreamble + header_len) {
    fail(ErrorKind::kTruncatedPayload, bytes.size(),
         "file ends inside the header");
  }
  const HeaderParser::Fields fields =
      HeaderParser(bytes.substr(kPreamble, header_len), kPreamble).parse();
  if (!fields.descr || !fields.fortran_order || !fields.shape) {
    fail(ErrorKind::kMalformedHeader, kPreamble,
         "header lacks descr, fortran_order or shape");
  }

  NpyArray out;
  std::size_t item = 0;
  if (*fields.descr == "<f8") {
    out.dtype = NpyDtype::kF8;
    item = 8;
  } else if (*fields.descr == "<f4") {
    out.dtype = NpyDtype::kF4;
    item = 4;
  } else {
    fail(ErrorKind::kUnsupportedDtype, kPreamble,
         "dtype '" + *fields.descr + "' is not supported (use <f4 or <f8)");
  }
  if (*fields.fortran_order) {
    fail(ErrorKind::kUnsupportedOrder, kPreamble,
         "Fortran-ordered arrays are not supported");
  }
  out.shape = *fields.shape;
  if (out.shape.empty() || out.shape.size() > 2) {
    fail(ErrorKind::kInvalidShape, kPreamble,
         "array has " + std::to_string(out.shape.size()) +
             " dimensions; only 1-D and 2-D are supported");
  }
  std::size_t count = 1;
  for (std::size_t d : out.shape) {
    if (d == 0) fail(ErrorKind::kInvalidShape, kPreamble, "array has an empty axis");
    if (count > SIZE_MAX / 8 / d) {
      fail(ErrorKind::kTruncatedPayload, kPreamble, "shape is impossibly large");
    }
    count *= d;
  }

  const std::size_t payload_at = kPreamble + header_len;
  const std::size_t available = bytes.size() - payload_at;
  if (count > available / item) {
    fail(ErrorKind::kTruncatedPayload, bytes.size(),
         "payload holds " + std::to_string(available) + " bytes, shape needs " +
             std::to_string(count * item));
  }
  if (available != count * item) {
    fail(ErrorKind::kMalformedHeader, payload_at + count * item,
         "unexpected bytes after the payload");
  }

  out.data.resize(count);
  const char* p = bytes.data() + payload_at;
  for (std::size_t i = 0; i < count; ++i, p += item) {
    out.data[i] = item == 8
                      ? std::bit_cast<double>(load_le<std::uint64_t>(p))
                      : static_cast<double>(
                            std::bit_cast<float>(load_le<std::uint32_t>(p)));
  }
  return out;
}

std::string encode_npy(const NpyArray& array, NpyDtype dtype) {
  check_shape(array);
  std::string header = "{'descr': '";
  header += dtype == NpyDtype::kF8 ? "<f8" : "<f4";
  header += "', 'fortran_order': False, 'shape': ";
  header += shape_literal(array.shape);
  header += ", }";
  // Pad with spaces and a final newline so the payload is 64-byte aligned.
  const std::size_t unpadded = kPreamble + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';

  std::string out(kMagic);
  out += '\x01';
  out += '\x00';
  store_le<std::uint16_t>(out, static_cast<std::uint16_t>(header.size()));
  out += header;
  for (double v : array.data) {
    if (dtype == NpyDtype::kF8) {
      store_le(out, std::bit_cast<std::uint64_t>(v));
    } else {
      store_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIoFailure, "cannot open '" + path.string() + "'");
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorKind::kIoFailure, "error reading '" + path.string() + "'");
  }
  try {
    return parse_npy(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + std::string(e.message()));
  }
}

void write_npy(const std::filesystem::path& path, const NpyArray& array,
               NpyDtype dtype) {
  const std::string bytes = encode_npy(array, dtype);
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::kIoFailure,
                  "cannot create '" + tmp.string() + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::kIoFailure, "error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorKind::kIoFailure,
                "cannot move result into '" + path.string() + "': " +
                    ec.message());
  }
}

NpyArray to_npy(const LatentVector& v) {
  return {{v.dim()}, {v.values().begin(), v.values().end()}, NpyDtype::kF8};
}

NpyArray to_npy(const Matrix& m) {
  return {{m.rows(), m.cols()},
          {m.values().begin(), m.values().end()},
          NpyDtype::kF8};
}

NpyArray to_npy(const FeatureMap& f) {
  return {{f.channels(), f.positions()},
          {f.values().begin(), f.values().end()},
          NpyDtype::kF8};
}

NpyArray to_npy(std::span<const LatentVector> rows) {
  if (rows.empty()) {
    throw Error(ErrorKind::kInvalidShape, "cannot write an empty vector list");
  }
  NpyArray a{{rows.size(), rows.front().dim()}, {}, NpyDtype::kF8};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dim() != rows.front().dim()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "vectors to stack differ in length", i);
    }
    a.data.insert(a.data.end(), rows[i].values().begin(),
                  rows[i].values().end());
  }
  return a;
}

LatentVector as_vector(const NpyArray& a) {
  check_shape(a);
  if (a.shape.size() != 1) {
    throw Error(ErrorKind::kInvalidShape,
                "expected a 1-D array, got shape " + shape_literal(a.shape));
  }
  return LatentVector(a.data);
}

std::vector<LatentVector> as_row_vectors(const NpyArray& a) {
  check_shape(a);
  if (a.shape.size() == 1) return {LatentVector(a.data)};
  std::vector<LatentVector> out;
  const std::size_t cols = a.shape[1];
  for (std::size_t r = 0; r < a.shape[0]; ++r) {
    const auto first = a.data.begin() + static_cast<std::ptrdiff_t>(r * cols);
    out.emplace_back(
        std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cols)));
  }
  return out;
}

FeatureMap as_feature_map(const NpyArray& a) {
  check_shape(a);
  if (a.shape.size() != 2) {
    throw Error(ErrorKind::kInvalidShape,
                "expected a 2-D array, got shape " + shape_literal(a.shape));
  }
  return FeatureMap(a.shape[0], a.shape[1], a.data);
}

Matrix as_matrix(const NpyArray& a) {
  check_shape(a);
  if (a.shape.size() == 1) return Matrix(1, a.shape[0], a.data);
  return Matrix(a.shape[0], a.shape[1], a.data);
}

}  // namespace lbk
