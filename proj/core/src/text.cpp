#include "cropyield/text.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace cropyield {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string source) {
  KeyValueFile file;
  file.source_ = std::move(source);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(file.source_, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(file.source_, line_no, "empty key");
    if (file.find(key)) throw ParseError(file.source_, line_no, "duplicate key '" + key + "'");
    file.entries_.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse(in, path.string());
}

const KeyValueFile::Entry* KeyValueFile::find(std::string_view key) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(), [key](const Entry& e) { return e.key == key; });
  return it == entries_.end() ? nullptr : &*it;
}

std::optional<std::string> KeyValueFile::get_string(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  auto v = parse_double(e->value);
  if (!v) throw ParseError(source_, e->line, "'" + e->key + "' expects a number, got '" + e->value + "'");
  return v;
}

std::optional<long long> KeyValueFile::get_int(std::string_view key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  auto v = parse_int(e->value);
  if (!v) throw ParseError(source_, e->line, "'" + e->key + "' expects an integer, got '" + e->value + "'");
  return v;
}

void KeyValueFile::require_known(std::span<const std::string_view> known) const {
  for (const auto& e : entries_) {
    if (std::find(known.begin(), known.end(), e.key) == known.end()) {
      throw ParseError(source_, e.line, "unknown key '" + e.key + "'");
    }
  }
}

}  // namespace cropyield
