// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace essr {

using real = float;

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shapes or channel counts do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An unsupported or inconsistent configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed weight file. Carries the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Fusion was asked to assemble an image while some tiles are missing.
class FusionError : public Error {
public:
    using Error::Error;
};

/// Bad caller input that is not a shape problem (e.g. share vector not summing to 1).
class InputError : public Error {
public:
    using Error::Error;
};

/// Image file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace essr
