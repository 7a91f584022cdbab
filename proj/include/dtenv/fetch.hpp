#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <httplib.h>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtenv/csv.hpp"
#include "dtenv/registry.hpp"

namespace dtenv {

struct FetchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw FetchError("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

/// Body of an http(s):// or file:// URL.
inline std::string download(const std::string& url) {
  if (url.starts_with("file://")) {
    std::ifstream in(url.substr(7), std::ios::binary);
    if (!in) throw FetchError("cannot read " + url);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  if (!url.starts_with("http://") && !url.starts_with("https://")) throw FetchError("unsupported URL: " + url);
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) throw FetchError("download failed for " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw FetchError("download failed for " + url + ": HTTP " + std::to_string(res->status));
  return res->body;
}

struct FetchOptions {
  /// Replaces the registry URLs when non-empty.
  std::vector<std::string> urls;
  /// Expected SHA-256 of the concatenated raw files; overrides the registry.
  std::string sha256;
  std::filesystem::path dest_dir = cache_dir();
};

struct FetchResult {
  std::filesystem::path csv;
  bool from_cache = false;
  std::string sha256;
};

/// Downloads, verifies and converts a known dataset into `dest_dir/<id>.csv`.
/// An existing file is returned without network access. Without a pinned
/// digest, the first download's digest is recorded next to the CSV as
/// `<id>.sha256`.
inline FetchResult fetch_dataset(std::string_view id, const FetchOptions& options = {}) {
  const DatasetInfo& info = find_dataset(id);
  namespace fs = std::filesystem;
  const fs::path csv = cached_csv_path(id, options.dest_dir);
  const fs::path sidecar = options.dest_dir / (std::string(id) + ".sha256");
  if (fs::exists(csv)) {
    FetchResult hit{csv, true, {}};
    if (std::ifstream in(sidecar); in) in >> hit.sha256;
    return hit;
  }

  const auto& urls = options.urls.empty() ? info.urls : options.urls;
  std::vector<std::string> raw;
  std::string joined;
  for (const auto& u : urls) {
    raw.push_back(download(u));
    joined += raw.back();
  }
  const std::string digest = sha256_hex(joined);
  const std::string expected = !options.sha256.empty() ? options.sha256 : std::string(info.sha256);
  if (!expected.empty() && expected != digest) {
    std::error_code ec;
    fs::remove(csv, ec);
    throw FetchError("checksum mismatch for '" + std::string(id) + "': expected " + expected + ", got " + digest);
  }

  const std::string text = info.convert(raw);
  std::istringstream check(text);
  const Dataset parsed = parse_csv(check, std::string("class"));
  if (parsed.num_features() != info.num_features || parsed.num_classes() != info.num_classes)
    throw FetchError("converted '" + std::string(id) + "' has " + std::to_string(parsed.num_features()) +
                     " features and " + std::to_string(parsed.num_classes()) + " classes; expected " +
                     std::to_string(info.num_features) + " and " + std::to_string(info.num_classes));

  fs::create_directories(options.dest_dir);
  const fs::path tmp = csv.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw FetchError("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, csv);
  if (std::ofstream out(sidecar); out) out << digest << '\n';
  return {csv, false, digest};
}

}  // namespace dtenv
