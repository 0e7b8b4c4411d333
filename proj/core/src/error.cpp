#include "phenosample/error.hpp"

#include <utility>

namespace phenosample {

ValidationError::ValidationError(std::string rule, const std::string& detail)
    : Error("validation failed [" + rule + "]: " + detail), rule_(std::move(rule)) {}

DecodeError::DecodeError(const std::string& what, std::size_t line)
    : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace phenosample
