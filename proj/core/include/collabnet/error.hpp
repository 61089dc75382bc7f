#pragma once

#include <stdexcept>
#include <string>

namespace collabnet {

enum class ErrorKind {
  MissingInput,    // a required file does not exist or cannot be opened
  MissingColumn,   // a required table column is absent
  InvalidArgument,
  NodeAbsent,
  CoverageMismatch,
  Nonconvergence,
  TooManyFailures,
  EmptyConsensus,
  MissingYear,
  MissingArtifact,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace collabnet
