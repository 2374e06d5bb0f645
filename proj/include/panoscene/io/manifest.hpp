#pragma once

// Output directory bookkeeping: every artifact is recorded with its size and
// SHA-256 digest.

#include "panoscene/core.hpp"
#include "panoscene/io/json.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace panoscene::io {

inline std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::string path_of(const std::string& name) const { return (dir_ / name).string(); }

  /// Records a file already written under the output directory.
  void record(const std::string& name) {
    const std::string bytes = read_text(path_of(name));
    entries_.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  void write_json_artifact(const std::string& name, const json& j) {
    write_json(path_of(name), j);
    record(name);
  }

  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }

  json to_json() const {
    std::vector<ManifestEntry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    json arts = json::array();
    for (const ManifestEntry& e : sorted) arts.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    json out = extra_;
    out["artifacts"] = arts;
    return out;
  }

  void finish(const std::string& name = "manifest.json") const { write_json(path_of(name), to_json()); }

 private:
  std::filesystem::path dir_;
  std::vector<ManifestEntry> entries_;
  json extra_ = json::object();
};

}  // namespace panoscene::io
