#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tgforge {

enum class ErrorCode {
  Parse,     // malformed JSON text
  Schema,    // well-formed JSON with the wrong shape
  Reference, // dangling node or kind reference
  Duplicate, // repeated node, edge, or kind id
  SelfLoop,
  Input,     // bad argument to an operation
  Io,
  Internal,  // bug trap: should never happen
};

const char *to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message, std::string offending_id = {})
      : std::runtime_error(message), code_(code), offending_id_(std::move(offending_id)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string &offending_id() const noexcept { return offending_id_; }

private:
  ErrorCode code_;
  std::string offending_id_;
};

class ParseError : public Error {
public:
  ParseError(const std::string &message, std::size_t line, std::size_t column)
      : Error(ErrorCode::Parse, message), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

} // namespace tgforge
