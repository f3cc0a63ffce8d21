#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mssr {

/// Tensor or image dimensions do not fit the operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A caller broke an ordering or state contract (stale trace, missing gradients).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary file. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Model file whose header parses but whose layer shapes disagree with it.
class ModelShapeError : public FormatError {
public:
    using FormatError::FormatError;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mssr
