#include "predscale/errors.hpp"

namespace predscale {

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

}  // namespace predscale
