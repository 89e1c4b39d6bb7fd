#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgeroute {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  // profile-store
  kMalformedRow,
  kDuplicateEntry,
  kEmptyTable,
  kEmptyGroup,
  // estimators
  kDegenerateImage,
  kDetectorUnavailable,
  kDetectorProtocolError,
  kDetectorTimeout,
  kMissingGroundTruth,
  // backend
  kUnknownPair,
  kBackendUnreachable,
  kMissingTruth,
  // harness
  kMissingProfileCell,
  kEmptySourceGroup,
  kMalformedRecord,
};

std::string_view to_string(ErrorKind kind);

// Validation errors are caller mistakes in inputs (bad files, bad flags);
// everything else is a runtime failure.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace edgeroute
