#include "anmvae/errors.hpp"

namespace anmvae {

ParseError::ParseError(const std::string& what, std::size_t offset,
                       std::vector<std::string> expected)
    : std::runtime_error(what), offset_(offset), expected_(std::move(expected)) {}

}  // namespace anmvae
