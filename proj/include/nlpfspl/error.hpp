#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlpfspl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Syntax or domain error in a textual input, with a 1-based position.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : Error(format(what, line, column)), m_message(what), m_line(line), m_column(column)
    {}

    std::size_t line() const noexcept { return m_line; }
    std::size_t column() const noexcept { return m_column; }
    const std::string& message() const noexcept { return m_message; }

  private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column)
    {
        std::string out = "line " + std::to_string(line);
        if (column > 0) {
            out += ", column " + std::to_string(column);
        }
        return out + ": " + what;
    }

    std::string m_message;
    std::size_t m_line;
    std::size_t m_column;
};

/// Input is well-formed line by line but violates corpus structure.
class StructureError : public Error {
  public:
    using Error::Error;
};

/// JSON document does not follow the expected schema. `pointer` is a JSON pointer.
class SchemaError : public Error {
  public:
    SchemaError(const std::string& pointer, const std::string& what)
        : Error(pointer + ": " + what), m_pointer(pointer)
    {}

    const std::string& pointer() const noexcept { return m_pointer; }

  private:
    std::string m_pointer;
};

/// Semantically invalid request (bad argument values, inconsistent state).
class ValidationError : public Error {
  public:
    using Error::Error;
};

class EmptyKnowledgeBase : public ValidationError {
  public:
    EmptyKnowledgeBase() : ValidationError("knowledge base is empty") {}
};

/// Lookup by id failed.
class NotFoundError : public Error {
  public:
    using Error::Error;
};

/// Request refers to state that has since changed (e.g. a stale session).
class ConflictError : public Error {
  public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace nlpfspl
