#include "edgeroute/error.hpp"

namespace edgeroute {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kDuplicateEntry: return "DuplicateEntry";
    case ErrorKind::kEmptyTable: return "EmptyTable";
    case ErrorKind::kEmptyGroup: return "EmptyGroup";
    case ErrorKind::kDegenerateImage: return "DegenerateImage";
    case ErrorKind::kDetectorUnavailable: return "DetectorUnavailable";
    case ErrorKind::kDetectorProtocolError: return "DetectorProtocolError";
    case ErrorKind::kDetectorTimeout: return "DetectorTimeout";
    case ErrorKind::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorKind::kUnknownPair: return "UnknownPair";
    case ErrorKind::kBackendUnreachable: return "BackendUnreachable";
    case ErrorKind::kMissingTruth: return "MissingTruth";
    case ErrorKind::kMissingProfileCell: return "MissingProfileCell";
    case ErrorKind::kEmptySourceGroup: return "EmptySourceGroup";
    case ErrorKind::kMalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kMalformedRow:
    case ErrorKind::kDuplicateEntry:
    case ErrorKind::kEmptyTable:
    case ErrorKind::kDegenerateImage:
    case ErrorKind::kMalformedRecord:
    case ErrorKind::kEmptySourceGroup:
      return true;
    default:
      return false;
  }
}

}  // namespace edgeroute
