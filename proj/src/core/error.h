// src/core/error.h
//
// Error taxonomy used across the project. Everything derives from zs::Error
// so callers can catch broadly; tests match the concrete types.

#pragma once

#include <stdexcept>
#include <string>

namespace zs {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape disagreement between tensor operands.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid argument to an operation (bad sizes, empty inputs, unknown names).
struct ArgumentError : Error {
  using Error::Error;
};

// Violated internal contract (non-scalar backward root, mismatched buffers).
struct ContractError : Error {
  using Error::Error;
};

// NaN/Inf escaped an arithmetic op.
struct NumericError : Error {
  using Error::Error;
};

// Index outside a valid range (token id >= vocab size and the like).
struct IndexError : Error {
  using Error::Error;
};

// Serialized artifact with a bad magic/framing.
struct FormatError : Error {
  using Error::Error;
};

// Serialized artifact with an unsupported version.
struct VersionError : Error {
  using Error::Error;
};

// Serialized artifact whose payload disagrees with its manifest.
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace zs
