#include "spurious/artifact.hpp"

#include <sstream>

namespace spurious {

std::string stamp_comment(const Stamp& stamp) {
    return "# config_hash=" + stamp.config_hash + " seed=" + std::to_string(stamp.seed);
}

std::optional<Stamp> parse_stamp_comment(const std::string& line) {
    if (line.rfind("# config_hash=", 0) != 0) return std::nullopt;
    std::istringstream in(line.substr(2));
    std::string hash_part, seed_part;
    in >> hash_part >> seed_part;
    if (hash_part.rfind("config_hash=", 0) != 0 || seed_part.rfind("seed=", 0) != 0)
        return std::nullopt;
    Stamp s;
    s.config_hash = hash_part.substr(12);
    try {
        s.seed = std::stoull(seed_part.substr(5));
    } catch (...) {
        return std::nullopt;
    }
    return s;
}

}  // namespace spurious
