#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace luxloop {

// Output root resolution: --out flag beats the LUXLOOP_OUT environment
// variable, which beats ./runs.
std::filesystem::path default_output_root();

// Timestamped run identifier, unique enough for a desk-scale experiment log.
std::string make_run_id(std::uint64_t seed);

struct RunManifest {
  std::string run_id;
  std::string command;
  nlohmann::ordered_json config;
  std::vector<std::string> outputs;  // paths relative to the run directory
};

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace luxloop
