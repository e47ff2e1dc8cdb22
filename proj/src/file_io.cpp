// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/file_io.hpp"

#include <zlib.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "layoutprior/error.hpp"

namespace layoutprior {

namespace {

bool is_gzip_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("no such file: " + path.string());
  }
  if (is_gzip_path(path)) {
    GzHandle f(gzopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path.string());
    std::string out;
    std::array<char, 1 << 16> buf{};
    for (;;) {
      const int n = gzread(f.get(), buf.data(), static_cast<unsigned>(buf.size()));
      if (n < 0) throw IoError("gzip read failure in " + path.string());
      if (n == 0) break;
      out.append(buf.data(), static_cast<std::size_t>(n));
    }
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (is_gzip_path(path)) {
    GzHandle f(gzopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot write " + path.string());
    if (!content.empty() &&
        gzwrite(f.get(), content.data(), static_cast<unsigned>(content.size())) == 0) {
      throw IoError("gzip write failure in " + path.string());
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failure in " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, canonical_json(j));
}

}  // namespace layoutprior
