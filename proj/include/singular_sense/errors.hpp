#pragma once

#include <stdexcept>
#include <string>

namespace singular_sense {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when parameters violate a physical constraint (negative rates, unphysical covariance).
class PhysicalityError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// No pole order found within the search cap: the matrix family is not invertible near zero.
class NotInvertibleFamilyError : public Error {
public:
    using Error::Error;
};

class PoleAtZeroError : public Error {
public:
    using Error::Error;
};

class NearPureStateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace singular_sense
