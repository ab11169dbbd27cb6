#pragma once

#include <stdexcept>
#include <string>

namespace neuromap {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kInvalidArgument,  // caller broke a precondition
  kParse,            // malformed file or stream content
  kIo,               // file could not be opened / written
  kOutOfBounds,      // pose outside environment bounds
  kDegenerate,       // geometric degeneracy (coincident points, antipodal mean)
  kInfeasible,       // environment cannot satisfy the request
  kConfiguration,    // mismatched sensor / model dimensions
  kContract,         // call-order contract violated
  kEstimatorUnavailable,
  kRuntime,          // aborts during a run (collision, non-finite loss)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace neuromap
