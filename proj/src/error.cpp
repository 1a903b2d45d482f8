#include "lbk/error.hpp"

namespace lbk {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kInvalidShape: return "InvalidShape";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kChannelMismatch: return "ChannelMismatch";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kAntipodalVectors: return "AntipodalVectors";
    case ErrorKind::kAllZeroWeights: return "AllZeroWeights";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::kUnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::kTruncatedPayload: return "TruncatedPayload";
    case ErrorKind::kIoFailure: return "IoFailure";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::kProviderFailure: return "ProviderFailure";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::size_t> subject)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      subject_(subject) {}

std::string_view Error::message() const noexcept {
  std::string_view full = what();
  full.remove_prefix(to_string(kind_).size() + 2);
  return full;
}

Error Error::with_subject(std::size_t subject) const {
  Error copy = *this;
  copy.subject_ = subject;
  return copy;
}

}  // namespace lbk
