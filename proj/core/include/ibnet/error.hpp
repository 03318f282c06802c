#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ibnet {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A connection triple points at a unit or output that does not exist.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Input arity does not match what the model kind expects.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// An episode is longer than the stack memories can hold.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Convolution or pooling index outside its domain.
class IndexError : public Error {
 public:
  using Error::Error;
};

// An architecture builder was handed an impossible geometry or size.
class BuildError : public Error {
 public:
  using Error::Error;
};

// Input or reference vector arity mismatch at step time.
class StepError : public Error {
 public:
  using Error::Error;
};

// The hierarchy controller graph has a cycle or a dangling reference.
class CompositionError : public Error {
 public:
  using Error::Error;
};

// Malformed file. offset is the byte (or line, for text formats) where
// parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ibnet
