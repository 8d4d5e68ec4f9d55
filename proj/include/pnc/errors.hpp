#pragma once

#include <stdexcept>
#include <string>

namespace pnc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside its mathematical domain (bad angle range, arcsin overflow, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// The apex (size below apex tolerance) was passed to an angular operation.
class ApexError : public DomainError {
public:
    explicit ApexError(const std::string& what) : DomainError(what) {}
};

/// A point claimed to be on a cone is not (angle mismatch beyond tolerance).
class NotOnConeError : public DomainError {
public:
    explicit NotOnConeError(const std::string& what) : DomainError(what) {}
};

/// Shape mismatch between model, scores, sizes or data.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Numerical breakdown (size drift across stages, exhausted retries, ...).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Malformed input file (CSV/JSON parse problems).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace pnc
