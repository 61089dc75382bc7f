#include "collabnet/error.hpp"

namespace collabnet {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingInput: return "missing input";
    case ErrorKind::MissingColumn: return "missing column";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NodeAbsent: return "node absent";
    case ErrorKind::CoverageMismatch: return "coverage mismatch";
    case ErrorKind::Nonconvergence: return "nonconvergence";
    case ErrorKind::TooManyFailures: return "too many failed trials";
    case ErrorKind::EmptyConsensus: return "empty consensus graph";
    case ErrorKind::MissingYear: return "missing year";
    case ErrorKind::MissingArtifact: return "missing artifact";
  }
  return "unknown";
}

}  // namespace collabnet
