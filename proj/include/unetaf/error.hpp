#pragma once

#include <stdexcept>
#include <string>

namespace unetaf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class IndivisibleSize : public Error {
public:
    using Error::Error;
};

/// An inverse transform produced a non-negligible imaginary residue.
class NonHermitianSpectrum : public Error {
public:
    using Error::Error;
};

class MarginExceeded : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed weight file or image.
class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace unetaf
