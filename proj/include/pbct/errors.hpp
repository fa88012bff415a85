#pragma once

#include <stdexcept>
#include <string>

namespace pbct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

class SymbolOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class NoScorablePositions : public Error {
 public:
  using Error::Error;
};

/// A scored symbol has probability zero under the supplied leaf distribution.
class ZeroProbabilityEvent : public Error {
 public:
  ZeroProbabilityEvent(std::size_t sequence, std::size_t position, const std::string& what)
      : Error(what), sequence_(sequence), position_(position) {}

  std::size_t sequence() const noexcept { return sequence_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t sequence_;
  std::size_t position_;
};

class MismatchedUniverse : public Error {
 public:
  using Error::Error;
};

class DepthUnavailable : public Error {
 public:
  using Error::Error;
};

/// Malformed corpus input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FormatVersionMismatch : public Error {
 public:
  using Error::Error;
};

/// Model file content does not match the expected schema. The message starts with the field path.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pbct
