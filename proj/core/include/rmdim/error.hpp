#pragma once

#include <stdexcept>
#include <string>

namespace rmdim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: unknown labels, non-covering families, shape mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid model definitions (laws, transition rows, generator parameters).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  /// Dotted config path that caused the failure, when known.
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// An exact routine was asked to run past its configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A map between poset carriers is not order-preserving.
class ContinuityError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined on the carrier kind it was given.
class UnsupportedCarrier : public Error {
 public:
  using Error::Error;
};

/// Cover erosion destroyed the covering property.
class MarginError : public Error {
 public:
  using Error::Error;
};

/// The partition-of-unity margin reaches outside the original cover member.
class DeltaError : public Error {
 public:
  using Error::Error;
};

}  // namespace rmdim
