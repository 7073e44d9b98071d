#pragma once

#include <filesystem>
#include <iosfwd>

#include "melodist/neural/model.hpp"

namespace melodist {

// Layout: 8-byte magic "MELODIST", uint32 little-endian header length, JSON
// header (format version, architecture, seed, vocabulary), then the weights as
// little-endian IEEE-754 doubles.
inline constexpr int kCheckpointVersion = 1;

void save_model(std::ostream& out, const ModelParams& params);
void save_model(const std::filesystem::path& path, const ModelParams& params);

ModelParams load_model(std::istream& in);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace melodist
