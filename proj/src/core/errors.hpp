#pragma once

#include <stdexcept>
#include <string>

namespace attnfc {

/// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor shape disagreement; the message names the offending shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A call violated an API precondition (empty sequence, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data; carries file/row/column context.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Filesystem problem (missing path, unreadable file, failed write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training aborted (e.g. non-finite loss); names epoch and sample.
class TrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace attnfc
