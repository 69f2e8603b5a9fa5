#pragma once

#include <stdexcept>
#include <string>

namespace clsm {

// Bad option values, incompatible settings, mismatched input files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent data files (parse failures, bad indices, self-loops).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint with an unrecognized layout or magic string.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint whose checksum or payload size does not match its header.
class CorruptError : public std::runtime_error {
 public:
  explicit CorruptError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem trouble: unreadable or unwritable paths.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A variational state that violates its structural invariants.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite objective or other numerical breakdown during optimization.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace clsm
