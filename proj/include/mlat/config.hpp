#pragma once

#include "mlat/metrology.hpp"
#include "mlat/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mlat {

struct RunInputs {
  NetworkConfig network;
  UncertaintyBudget budget;
};

/// Parses a network configuration document (YAML). Geometry is given in
/// metres and dead zones in mm; numbers are read from their decimal text, so
/// no precision is lost before the solver rounds them. Throws ConfigError on
/// malformed documents, unknown keys or invalid networks.
RunInputs parse_config(std::string_view text, std::string_view origin = "<config>");

/// Throws ConfigError when the file cannot be read.
RunInputs load_config(const std::filesystem::path& path);

/// The five-station, eleven-point network bundled as configs/table1.cfg.
NetworkConfig table1_network();

/// The three-station teaching network bundled as configs/teaching3.cfg.
NetworkConfig teaching_network();

/// 64-bit FNV-1a of a byte string, used to tag run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mlat
