/**
 * @file error.hpp
 * @brief Exception hierarchy shared by all ptrs components.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace ptrs {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an argument or configuration was violated.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Autocorrelation input is constant (~1 everywhere); the floor parameter
/// of the exponential model would sit on its clamp and the decay rate is
/// unidentifiable.
class DegenerateAutocorrelation : public DomainError {
public:
    explicit DegenerateAutocorrelation(const std::string& what) : DomainError(what) {}
};

/// The pilot autocorrelation matrix is numerically singular for the given
/// model/pattern combination.
class SingularModel : public Error {
public:
    explicit SingularModel(const std::string& what) : Error(what) {}
};

/// The closed-form coefficient path requires at least three pilots; the
/// caller should route the request to the dense numeric path instead.
class FallbackToNumeric : public Error {
public:
    explicit FallbackToNumeric(const std::string& what) : Error(what) {}
};

/// File or stream input/output failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace ptrs
