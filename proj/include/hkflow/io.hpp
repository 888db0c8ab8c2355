#ifndef HKFLOW_IO_HPP
#define HKFLOW_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "common.hpp"

namespace hkflow {

using Json = nlohmann::ordered_json;

/// %.17g, the round-trip representation used for every CSV number.
inline std::string format_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string sha256_hex(const std::string& bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Collects the artifacts written into one output directory, for the run manifest.
class ArtifactWriter {
public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir))
  {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw Error("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write_text(const std::string& name, const std::string& content)
  {
    const auto p = dir_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
      throw Error("cannot write '" + p.string() + "'");
    out << content;
    out.close();
    if (!out)
      throw Error("write failed for '" + p.string() + "'");
    files_.push_back({name, sha256_hex(content), content.size()});
  }

  void write_json(const std::string& name, const Json& j) { write_text(name, j.dump(2) + "\n"); }

  /// CSV with a one-line header; every value at 17 significant digits.
  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows)
  {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i)
      os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      if (r.size() != header.size())
        throw Error("CSV row width does not match the header");
      for (std::size_t i = 0; i < r.size(); ++i)
        os << (i ? "," : "") << format_number(r[i]);
      os << '\n';
    }
    write_text(name, os.str());
  }

  /// Files written so far, as {path, sha256, bytes} records.
  Json listing() const
  {
    Json a = Json::array();
    for (const auto& f : files_)
      a.push_back(Json{{"path", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return a;
  }

  /// Adds the artifacts of a nested writer under its subdirectory.
  void absorb(const ArtifactWriter& child)
  {
    const auto rel = std::filesystem::relative(child.dir_, dir_).generic_string();
    for (const auto& f : child.files_)
      files_.push_back({rel + "/" + f.name, f.sha256, f.bytes});
  }

private:
  struct File {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  std::filesystem::path dir_;
  std::vector<File> files_;
};

} // namespace hkflow

#endif
