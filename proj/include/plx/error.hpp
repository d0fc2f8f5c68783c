#pragma once

#include <stdexcept>
#include <string>

namespace plx {

struct SourceLocation {
  int line = 1;
  int column = 1;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lexical or grammatical problem at a specific position in the source.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, SourceLocation where);
  SourceLocation where() const { return where_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLocation where_;
  std::string detail_;
};

// Well-formed clause that violates a program invariant.
class SemanticError : public Error {
 public:
  using Error::Error;
};

class GroundingError : public Error {
 public:
  using Error::Error;
};

class InferenceError : public Error {
 public:
  enum class Kind { CapExceeded, InconsistentEvidence, NoSupport };
  InferenceError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class KbError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace plx
