#include "navkit/error.hpp"

#include <sstream>

namespace navkit {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::EmptyPath: return "EmptyPath";
        case ErrorCode::NoValidPerturbation: return "NoValidPerturbation";
        case ErrorCode::SceneTooSmall: return "SceneTooSmall";
        case ErrorCode::NoVisiblePosition: return "NoVisiblePosition";
        case ErrorCode::NoDoors: return "NoDoors";
        case ErrorCode::NoPois: return "NoPois";
        case ErrorCode::InvalidTime: return "InvalidTime";
        case ErrorCode::AngleDegenerate: return "AngleDegenerate";
        case ErrorCode::PolicyError: return "PolicyError";
        case ErrorCode::GroupTooSmall: return "GroupTooSmall";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DegeneratePlan: return "DegeneratePlan";
        case ErrorCode::WrongTask: return "WrongTask";
        case ErrorCode::UnknownEdge: return "UnknownEdge";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string parse_message(std::size_t offset, const std::set<std::string>& expected,
                          const std::string& found) {
    std::ostringstream out;
    out << "at byte " << offset << ", found '" << found << "', expected one of {";
    bool first = true;
    for (const auto& e : expected) {
        if (!first) out << ", ";
        out << '"' << e << '"';
        first = false;
    }
    out << '}';
    return out.str();
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::set<std::string> expected, const std::string& found)
    : Error(ErrorCode::ParseError, parse_message(offset, expected, found)),
      offset_(offset),
      expected_(std::move(expected)) {}

SchemaError::SchemaError(std::string location, const std::string& what)
    : Error(ErrorCode::SchemaError, location + ": " + what), location_(std::move(location)) {}

PolicyError::PolicyError(int step, const std::string& what)
    : Error(ErrorCode::PolicyError, "step " + std::to_string(step) + ": " + what), step_(step) {}

}  // namespace navkit
