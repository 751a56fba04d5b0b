#include "mls/io.hpp"

#include <zlib.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace mls::io {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'S', 'F'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void append_raw(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(const std::string& in, std::size_t& off) {
  if (off + sizeof(T) > in.size()) throw std::runtime_error("snapshot: truncated data");
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("csv_table: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string crc32_hex(const std::string& bytes) {
  const uLong crc = ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
                            static_cast<uInt>(bytes.size()));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::string iso8601_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string encode_snapshot(const Grid& g, const SpectralField& F) {
  if (F.modes != g.modes()) throw std::invalid_argument("encode_snapshot: grid/field mismatch");
  std::string out;
  const std::uint64_t count = F.data.size();
  out.reserve(4 + 4 + 4 + 8 + 8 + count * sizeof(Complex));
  out.append(kMagic, 4);
  append_raw(out, kSnapshotVersion);
  append_raw(out, static_cast<std::int32_t>(g.N()));
  append_raw(out, g.L());
  append_raw(out, count);
  out.append(reinterpret_cast<const char*>(F.data.data()), count * sizeof(Complex));
  return out;
}

SpectralField decode_snapshot(const std::string& bytes, int& N, double& L) {
  std::size_t off = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic");
  off = 4;
  if (read_raw<std::uint32_t>(bytes, off) != kSnapshotVersion)
    throw std::runtime_error("snapshot: unsupported version");
  N = read_raw<std::int32_t>(bytes, off);
  L = read_raw<double>(bytes, off);
  const std::uint64_t count = read_raw<std::uint64_t>(bytes, off);
  if (count % 3 != 0 || off + count * sizeof(Complex) != bytes.size())
    throw std::runtime_error("snapshot: inconsistent coefficient count");
  SpectralField f(count / 3);
  std::memcpy(f.data.data(), bytes.data() + off, count * sizeof(Complex));
  return f;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  started_ = iso8601_now();
}

void ArtifactWriter::write_text(const std::string& name, const std::string& content) {
  atomic_write(dir_ / name, content);
  entries_.push_back({name, content.size(), crc32_hex(content)});
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) {
  write_text(name, j.dump(2) + "\n");
}

void ArtifactWriter::write_snapshot(const std::string& name, const Grid& g,
                                    const SpectralField& F) {
  const std::string payload = encode_snapshot(g, F);
  write_text(name, payload);
  nlohmann::json side;
  side["file"] = name;
  side["N"] = g.N();
  side["L"] = g.L();
  side["count"] = F.data.size();
  side["crc32"] = crc32_hex(payload);
  write_json(name + ".json", side);
}

std::filesystem::path ArtifactWriter::finalize(const std::string& config_hash,
                                               const std::string& status,
                                               const std::string& error) {
  nlohmann::json m;
  m["config_hash"] = config_hash;
  m["version"] = MLS_VERSION;
  m["started"] = started_;
  m["finished"] = iso8601_now();
  m["status"] = status;
  if (!error.empty()) m["error"] = error;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json f;
    f["name"] = e.name;
    f["bytes"] = e.bytes;
    f["crc32"] = e.crc32;
    files.push_back(f);
  }
  m["files"] = files;
  const std::filesystem::path path = dir_ / "manifest.json";
  atomic_write(path, m.dump(2) + "\n");
  return path;
}

}  // namespace mls::io
