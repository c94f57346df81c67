#include "luxloop/run_dir.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace luxloop {

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("LUXLOOP_OUT"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::filesystem::path("runs");
}

std::string make_run_id(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02dT%02d%02d%02dZ-seed%llu",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                tm.tm_sec, static_cast<unsigned long long>(seed));
  return buf;
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["run_id"] = manifest.run_id;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["outputs"] = manifest.outputs;
  write_text_file(run_dir / "manifest.json", j.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

}  // namespace luxloop
