#include "cropyield/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "cropyield/text.hpp"

namespace cropyield {

namespace {

constexpr std::string_view kLabelsHeader = "region_id,state,year,yield_kg_per_ha,agri_area_ha,district_id";

}  // namespace

std::vector<RegionRecord> read_labels_csv(std::istream& in, const std::string& source) {
  std::vector<RegionRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kLabelsHeader) throw ParseError(source, line_no, "expected header '" + std::string(kLabelsHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 6) throw ParseError(source, line_no, "expected 6 columns, got " + std::to_string(cols.size()));
    const auto year = parse_int(cols[2]);
    const auto yield = parse_double(cols[3]);
    const auto area = parse_double(cols[4]);
    if (!year || !yield || !area) throw ParseError(source, line_no, "malformed numeric field");
    if (*yield < 0.0) throw ParseError(source, line_no, "yield must be non-negative");
    if (!(*area > 0.0)) throw ParseError(source, line_no, "agricultural area must be positive");
    records.push_back({cols[0], cols[1], static_cast<int>(*year), *yield, *area, cols[5]});
  }
  if (!header_seen) throw ParseError(source, line_no, "missing header");
  return records;
}

void write_labels_csv(std::ostream& out, const std::vector<RegionRecord>& records) {
  out << kLabelsHeader << '\n';
  for (const auto& r : records) {
    out << r.region_id << ',' << r.state << ',' << r.year << ',' << format_double(r.yield_kg_per_ha) << ','
        << format_double(r.agri_area_ha) << ',' << r.district_id << '\n';
  }
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& labels_path,
                              const std::filesystem::path& raster_dir) {
  std::ifstream labels_in(labels_path);
  if (!labels_in) throw InputError("cannot open labels file " + labels_path.string());
  std::map<std::pair<std::string, int>, RegionRecord> labels;
  for (auto& r : read_labels_csv(labels_in, labels_path.string())) {
    auto key = std::make_pair(r.region_id, r.year);
    labels.emplace(std::move(key), std::move(r));
  }

  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open manifest " + manifest_path.string());
  const std::filesystem::path base = raster_dir.empty() ? manifest_path.parent_path() : raster_dir;
  const std::string source = manifest_path.string();

  DatasetManifest manifest;
  std::set<std::pair<std::string, int>> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    for (auto& c : split(line, ' ')) {
      if (!c.empty()) cols.push_back(std::move(c));
    }
    if (cols.size() != 3) throw ParseError(source, line_no, "expected 'region_id year raster_path'");
    const auto year = parse_int(cols[1]);
    if (!year) throw ParseError(source, line_no, "malformed year '" + cols[1] + "'");
    const auto key = std::make_pair(cols[0], static_cast<int>(*year));
    if (!seen.insert(key).second) throw ParseError(source, line_no, "duplicate raster for " + cols[0] + " " + cols[1]);
    const auto it = labels.find(key);
    if (it == labels.end()) throw ParseError(source, line_no, "no label for " + cols[0] + " " + cols[1]);
    std::filesystem::path raster = cols[2];
    if (raster.is_relative()) raster = base / raster;
    manifest.entries.push_back({it->second, raster});
  }
  return manifest;
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  out << "# region_id year raster_path\n";
  for (const auto& e : manifest.entries) {
    out << e.record.region_id << ' ' << e.record.year << ' ' << e.raster_path.generic_string() << '\n';
  }
}

DatasetManifest filter_state(const DatasetManifest& manifest, const std::string& state) {
  if (state.empty()) return manifest;
  DatasetManifest out;
  std::copy_if(manifest.entries.begin(), manifest.entries.end(), std::back_inserter(out.entries),
               [&state](const ManifestEntry& e) { return e.record.state == state; });
  return out;
}

void sort_entries(DatasetManifest& manifest) {
  std::stable_sort(manifest.entries.begin(), manifest.entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return std::tie(a.record.region_id, a.record.year) < std::tie(b.record.region_id, b.record.year);
  });
}

SplitManifests split_by_year(const DatasetManifest& manifest, const YearSplit& split) {
  const std::set<int> train(split.train_years.begin(), split.train_years.end());
  if (split.val_year == split.test_year || train.count(split.val_year) || train.count(split.test_year)) {
    throw InputError("split_by_year: train, validation and test years must be disjoint");
  }
  SplitManifests out;
  for (const auto& e : manifest.entries) {
    if (train.count(e.record.year)) {
      out.train.entries.push_back(e);
    } else if (e.record.year == split.val_year) {
      out.val.entries.push_back(e);
    } else if (e.record.year == split.test_year) {
      out.test.entries.push_back(e);
    }
  }
  return out;
}

std::vector<int> parse_year_list(const std::string& text) {
  std::vector<int> years;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-', 1);
    if (dash != std::string::npos) {
      const auto lo = parse_int(part.substr(0, dash));
      const auto hi = parse_int(part.substr(dash + 1));
      if (!lo || !hi || *lo > *hi) throw InputError("malformed year range '" + part + "'");
      for (auto y = *lo; y <= *hi; ++y) years.push_back(static_cast<int>(y));
    } else {
      const auto y = parse_int(part);
      if (!y) throw InputError("malformed year '" + part + "'");
      years.push_back(static_cast<int>(*y));
    }
  }
  if (years.empty()) throw InputError("empty year list");
  return years;
}

std::vector<double> apportion_yield(double district_production_kg, const std::vector<double>& tehsil_areas_ha) {
  if (tehsil_areas_ha.empty()) throw InputError("apportion_yield: no tehsils");
  double total = 0.0;
  for (double a : tehsil_areas_ha) {
    if (!(a > 0.0)) throw InputError("apportion_yield: tehsil areas must be positive");
    total += a;
  }
  std::vector<double> out;
  out.reserve(tehsil_areas_ha.size());
  for (double a : tehsil_areas_ha) out.push_back(district_production_kg * (a / total));
  return out;
}

std::vector<double> apportioned_yields(double district_production_kg, const std::vector<double>& tehsil_areas_ha) {
  auto production = apportion_yield(district_production_kg, tehsil_areas_ha);
  for (std::size_t i = 0; i < production.size(); ++i) production[i] /= tehsil_areas_ha[i];
  return production;
}

}  // namespace cropyield
