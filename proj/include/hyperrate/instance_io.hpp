#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "hyperrate/model.hpp"

namespace hyperrate {

// JSON instance document -> validated instance. Throws ParseError or ValidationError.
ProblemInstance load_instance(std::string_view text);
ProblemInstance load_instance_file(const std::filesystem::path& path);

// Canonical document: sorted keys, exact pmfs as "a/b", values as d-vectors.
std::string serialize_instance(const ProblemInstance& inst);

// FNV-1a over the canonical serialization.
std::uint64_t instance_hash(const ProblemInstance& inst);
std::string hash_hex(std::uint64_t h);

}  // namespace hyperrate
