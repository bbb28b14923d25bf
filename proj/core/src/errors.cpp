#include "mshedge/errors.hpp"

namespace mshedge {

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : InputError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace mshedge
