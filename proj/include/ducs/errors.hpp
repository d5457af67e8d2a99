#pragma once

#include <stdexcept>
#include <string>

namespace ducs {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError -> 2, DataError -> 3, NumericError -> 4.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structured failure modes of the binary trace format.
class TraceError : public DataError {
public:
    enum class Kind { BadMagic, Version, Truncated, Checksum, MissingChannel };

    TraceError(Kind kind, const std::string& msg) : DataError(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

} // namespace ducs
