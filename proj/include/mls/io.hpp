#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mls/field.hpp"
#include "mls/grid.hpp"

namespace mls::io {

// %.17g — lossless and locale-independent (the process stays in the C locale).
std::string format_double(double x);

// Header row plus %.17g rows; byte-identical across runs for identical data.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

std::string crc32_hex(const std::string& bytes);
std::string iso8601_now();

// Write to `<path>.tmp` then rename, so a crash never leaves a partial file
// under the final name.
void atomic_write(const std::filesystem::path& path, const std::string& content);

// Spectral snapshot: "MLSF" magic, format version, N, L, coefficient count,
// then the raw complex coefficients (component-major).
std::string encode_snapshot(const Grid& g, const SpectralField& F);
SpectralField decode_snapshot(const std::string& bytes, int& N, double& L);

// Collects output files for one run directory and writes the manifest last.
// Every write is atomic; the manifest lists each file with its checksum, so an
// interrupted run never leaves a manifest claiming unverifiable files.
class ArtifactWriter {
 public:
  struct Entry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string crc32;
  };

  explicit ArtifactWriter(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  // Writes `name` plus a `name.json` sidecar describing the payload.
  void write_snapshot(const std::string& name, const Grid& g, const SpectralField& F);

  const std::vector<Entry>& inventory() const { return entries_; }

  // status: "ok" or "error" (with the message in `error`).
  std::filesystem::path finalize(const std::string& config_hash, const std::string& status,
                                 const std::string& error = "");

 private:
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
  std::string started_;
};

}  // namespace mls::io
