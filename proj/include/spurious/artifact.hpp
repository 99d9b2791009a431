#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace spurious {

// Provenance carried by every pipeline artifact.
struct Stamp {
    std::string config_hash;
    std::uint64_t seed = 0;

    bool operator==(const Stamp&) const = default;
};

// "# config_hash=<hex> seed=<n>"; used as the first line of CSV and text artifacts.
std::string stamp_comment(const Stamp& stamp);
std::optional<Stamp> parse_stamp_comment(const std::string& line);

}  // namespace spurious
