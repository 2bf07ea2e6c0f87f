#pragma once

#include <stdexcept>
#include <string>

namespace smlock
{

/// Base class of all errors raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A state or derivative does not have the compartment layout of the requested model kind.
class ShapeError : public Error
{
public:
    using Error::Error;
};

/// An argument is outside the domain of a closed-form expression.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Parameters, configuration or input data fail validation. `field()` names the offending key.
class ValidationError : public Error
{
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what)
        , m_field(std::move(field))
    {
    }

    const std::string& field() const
    {
        return m_field;
    }

private:
    std::string m_field;
};

/// Malformed textual input; `line()` is 1-based, 0 if unknown.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what)
        , m_line(line)
    {
    }

    std::size_t line() const
    {
        return m_line;
    }

private:
    std::size_t m_line;
};

/// Integration produced a non-finite value or broke population conservation.
class NumericalError : public Error
{
public:
    using Error::Error;
};

} // namespace smlock
