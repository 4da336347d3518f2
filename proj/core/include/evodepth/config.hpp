#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace evd {

// Plain-text run configuration: "[section]" headers, "key = value" lines,
// '#' comments. The raw text is retained so manifests can echo it verbatim.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::filesystem::path& path);

  const std::string& text() const { return text_; }

  bool has(const std::string& section, const std::string& key) const;

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // Comma-separated numeric list.
  std::vector<double> get_list(const std::string& section,
                               const std::string& key,
                               std::vector<double> fallback) const;

 private:
  std::string text_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace evd
