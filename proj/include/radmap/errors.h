// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace radmap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents or channel counts disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// API misuse: bad arguments, violated preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

// User-facing configuration rejected before any work starts.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Base for every "the input file is not what we expected" failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, int line)
      : FormatError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

class SchemaError : public FormatError {
 public:
  SchemaError(const std::string& key, const std::string& where)
      : FormatError("missing or invalid key '" + key + "' in " + where), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Non-finite values during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace radmap
