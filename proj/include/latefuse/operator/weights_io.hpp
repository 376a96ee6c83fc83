#pragma once

#include <filesystem>

#include "json.hpp"
#include "latefuse/operator/fno.hpp"

namespace latefuse::op {

/// Writes the parameters in order as little-endian f64 into `bin` and
/// returns the index (name, shape, offset in elements, crc32 of the file)
/// that model.json embeds.
nlohmann::ordered_json write_weights(const std::filesystem::path& bin, const std::vector<NamedParameter>& params);

/// Loads weights into `params` (matched by name and shape, same order as
/// written). Throws ChecksumError / FormatError on any disagreement.
void read_weights(const std::filesystem::path& bin, const nlohmann::ordered_json& index,
                  const std::vector<NamedParameter>& params);

nlohmann::ordered_json to_json(const BackboneConfig& c);
BackboneConfig backbone_from_json(const nlohmann::ordered_json& j);

}  // namespace latefuse::op
