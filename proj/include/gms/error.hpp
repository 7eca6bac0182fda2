#pragma once

#include <stdexcept>
#include <string>

namespace gms {

// Base of every error thrown by the library. The CLI maps ConfigError
// subclasses to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public ConfigError {
public:
    InvalidParameter(std::string field, const std::string& what)
        : ConfigError("invalid parameter '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public ConfigError {
public:
    ParseError(std::string token, const std::string& what)
        : ConfigError("cannot parse '" + token + "': " + what), token_(std::move(token)) {}

    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

class OutOfRangeFitness : public Error {
public:
    explicit OutOfRangeFitness(double v)
        : Error("fitness " + std::to_string(v) + " outside [0,1]") {}
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class BothMeansInfinite : public Error {
public:
    BothMeansInfinite() : Error("critical probability undefined: both means are infinite") {}
};

class NotSupercritical : public Error {
public:
    using Error::Error;
};

class DriftNotZero : public Error {
public:
    using Error::Error;
};

class EmptySample : public Error {
public:
    EmptySample() : Error("empty sample") {}
};

class BadInterval : public Error {
public:
    using Error::Error;
};

class TooFewCheckpoints : public Error {
public:
    using Error::Error;
};

class SupportTooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace gms
