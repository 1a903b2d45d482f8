#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lbk {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidShape,
  kNonFinite,
  kDimensionMismatch,
  kChannelMismatch,
  kZeroVector,
  kAntipodalVectors,
  kAllZeroWeights,
  kEmptySet,
  // NPY and file-format errors.
  kBadMagic,
  kUnsupportedVersion,
  kMalformedHeader,
  kUnsupportedDtype,
  kUnsupportedOrder,
  kTruncatedPayload,
  kIoFailure,
  kInvalidSpec,
  // External model providers.
  kProviderUnavailable,
  kProviderFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `subject()` optionally carries the
/// index of the offending input item (a style, a modality, ...) so callers
/// can map it back to a file path or a name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> subject = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the leading "Kind: ".
  std::string_view message() const noexcept;
  std::optional<std::size_t> subject() const noexcept { return subject_; }

  /// Same error with a subject index attached.
  Error with_subject(std::size_t subject) const;

 private:
  ErrorKind kind_;
  std::optional<std::size_t> subject_;
};

}  // namespace lbk
