#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

namespace navkit {

enum class ErrorCode {
    OutOfBounds,
    InvalidParams,
    Unreachable,
    EmptyPath,
    NoValidPerturbation,
    SceneTooSmall,
    NoVisiblePosition,
    NoDoors,
    NoPois,
    InvalidTime,
    AngleDegenerate,
    PolicyError,
    GroupTooSmall,
    LengthMismatch,
    DegeneratePlan,
    WrongTask,
    UnknownEdge,
    UnknownNode,
    SchemaError,
    ParseError,
    Io,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a stable code. Everything the toolkit throws on
/// bad input derives from this.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::set<std::string> expected, const std::string& found);

    std::size_t offset() const noexcept { return offset_; }
    const std::set<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::set<std::string> expected_;
};

class SchemaError : public Error {
public:
    SchemaError(std::string location, const std::string& what);

    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

class PolicyError : public Error {
public:
    PolicyError(int step, const std::string& what);

    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace navkit
