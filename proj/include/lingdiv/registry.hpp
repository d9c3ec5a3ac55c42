#pragma once

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/error.hpp"
#include "lingdiv/text.hpp"

namespace lingdiv {

inline bool is_alpha3_country(std::string_view code) {
  return code.size() == 3 && std::all_of(code.begin(), code.end(), [](unsigned char c) { return c >= 'A' && c <= 'Z'; });
}

inline bool is_iso639_3(std::string_view code) {
  return code.size() == 3 && std::all_of(code.begin(), code.end(), [](unsigned char c) { return c >= 'a' && c <= 'z'; });
}

// Country (ISO 3166-1 alpha-3) to region label. Each country maps to exactly
// one region; loading a file that maps a country twice is an error.
class CountryRegistry {
 public:
  CountryRegistry() = default;

  void add(const std::string& country, const std::string& region) {
    if (!is_alpha3_country(country))
      throw Error(ErrorCode::ConfigError, "registry: '" + country + "' is not an alpha-3 country code");
    if (region.empty()) throw Error(ErrorCode::ConfigError, "registry: empty region for " + country);
    auto [it, inserted] = regions_.emplace(country, region);
    if (!inserted && it->second != region)
      throw Error(ErrorCode::ConfigError, "registry: " + country + " mapped to both '" + it->second + "' and '" + region + "'");
  }

  bool contains(std::string_view country) const { return regions_.find(country) != regions_.end(); }

  std::optional<std::string> region_of(std::string_view country) const {
    auto it = regions_.find(country);
    if (it == regions_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& region_or_throw(std::string_view country) const {
    auto it = regions_.find(country);
    if (it == regions_.end()) throw Error(ErrorCode::UnmappedCountry, "country '" + std::string(country) + "' not in registry");
    return it->second;
  }

  std::vector<std::string> regions() const {
    std::set<std::string> uniq;
    for (const auto& [c, r] : regions_) uniq.insert(r);
    return {uniq.begin(), uniq.end()};
  }

  const std::map<std::string, std::string, std::less<>>& entries() const { return regions_; }
  size_t size() const { return regions_.size(); }
  bool empty() const { return regions_.empty(); }

  // `country,region` with an optional header row.
  static CountryRegistry read(std::istream& in) {
    CountryRegistry reg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::is_blank(line) || line[0] == '#') continue;
      auto fields = text::split_csv(line);
      if (!fields || fields->size() != 2)
        throw Error(ErrorCode::MalformedInput, "registry line " + std::to_string(lineno) + ": expected country,region");
      auto country = std::string(text::trim((*fields)[0]));
      auto region = std::string(text::trim((*fields)[1]));
      if (lineno == 1 && country == "country") continue;
      reg.add(country, region);
    }
    return reg;
  }

  static CountryRegistry load(const std::string& path) {
    auto in = text::open_input(path);
    return read(in);
  }

 private:
  std::map<std::string, std::string, std::less<>> regions_;
};

// Accepted language codes. Without an explicit list any well-formed ISO 639-3
// code is accepted; with one, membership is required as well.
class LanguageSet {
 public:
  LanguageSet() = default;
  explicit LanguageSet(std::set<std::string, std::less<>> codes) : codes_(std::move(codes)) {}

  bool accepts(std::string_view code) const {
    if (!is_iso639_3(code)) return false;
    return codes_.empty() || codes_.find(code) != codes_.end();
  }

  bool restricted() const { return !codes_.empty(); }

  // One code per line (first CSV column); '#' comments and an optional header allowed.
  static LanguageSet load(const std::string& path) {
    auto in = text::open_input(path);
    std::set<std::string, std::less<>> codes;
    std::string line;
    while (std::getline(in, line)) {
      if (text::is_blank(line) || line[0] == '#') continue;
      auto fields = text::split_csv(line);
      if (!fields || fields->empty()) continue;
      auto code = std::string(text::trim((*fields)[0]));
      if (code == "language" || code == "lang") continue;
      if (!is_iso639_3(code)) throw Error(ErrorCode::ConfigError, "language list: '" + code + "' is not an ISO 639-3 code");
      codes.insert(code);
    }
    return LanguageSet(std::move(codes));
  }

 private:
  std::set<std::string, std::less<>> codes_;
};

}  // namespace lingdiv
