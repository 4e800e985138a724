#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grrw {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

// Use of an element after it was removed from its graph.
class DanglingRefError : public GraphError {
 public:
  using GraphError::GraphError;
};

class TypeMismatchError : public GraphError {
 public:
  using GraphError::GraphError;
};

class ImportError : public Error {
 public:
  using Error::Error;
};

class ExportError : public Error {
 public:
  using Error::Error;
};

// Syntax or resolution error in a text input; what() is "file:line:col: message".
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column, std::string message)
      : Error(format(file, line, column, message)),
        file_(std::move(file)),
        line_(line),
        column_(column),
        message_(std::move(message)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& file, std::size_t line, std::size_t column,
                            const std::string& message) {
    return (file.empty() ? std::string("<input>") : file) + ":" + std::to_string(line) + ":" +
           std::to_string(column) + ": " + message;
  }

  std::string file_;
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class MatchError : public Error {
 public:
  using Error::Error;
};

class RewriteError : public Error {
 public:
  using Error::Error;
};

// A match refers to an element deleted after the match was found.
class StaleMatchError : public RewriteError {
 public:
  using RewriteError::RewriteError;
};

class SequenceError : public Error {
 public:
  using Error::Error;
};

// The program graph does not meet the extraction's preconditions.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

}  // namespace grrw
