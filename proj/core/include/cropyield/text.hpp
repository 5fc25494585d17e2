#pragma once

#include <charconv>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cropyield/errors.hpp"

namespace cropyield {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Line-oriented "key = value" text. Blank lines and lines starting with '#'
/// are ignored; anything else without '=' is a parse error.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueFile parse(std::istream& in, std::string source);
  static KeyValueFile load(const std::filesystem::path& path);

  const std::string& source() const noexcept { return source_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const Entry* find(std::string_view key) const;

  // Typed getters; a present but malformed value raises ParseError at its line.
  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;

  // ParseError on the first key not in `known`.
  void require_known(std::span<const std::string_view> known) const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

}  // namespace cropyield
