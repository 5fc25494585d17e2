#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cropyield/data/raster.hpp"

namespace cropyield {

struct RegionRecord {
  std::string region_id;
  std::string state;
  int year = 0;
  double yield_kg_per_ha = 0.0;
  double agri_area_ha = 0.0;
  std::string district_id;

  bool operator==(const RegionRecord&) const = default;
};

struct ManifestEntry {
  RegionRecord record;
  std::filesystem::path raster_path;

  bool operator==(const ManifestEntry&) const = default;
};

/// One raster per (region, year), with its label record.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// A record together with its loaded raster.
struct Sample {
  RegionRecord record;
  RasterSequence raster;
};

// Labels CSV with header `region_id,state,year,yield_kg_per_ha,agri_area_ha,district_id`.
std::vector<RegionRecord> read_labels_csv(std::istream& in, const std::string& source = "<labels>");
void write_labels_csv(std::ostream& out, const std::vector<RegionRecord>& records);

/// Manifest text: one `region_id year raster_path` line per sample; '#'
/// starts a comment. Relative raster paths resolve against `raster_dir`,
/// which defaults to the manifest's own directory. Labels are joined on
/// (region_id, year).
DatasetManifest load_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& labels_path,
                              const std::filesystem::path& raster_dir = {});
void write_manifest(std::ostream& out, const DatasetManifest& manifest);

// Rows whose state equals `state`; an empty filter keeps everything.
DatasetManifest filter_state(const DatasetManifest& manifest, const std::string& state);

// Sorted by (region_id, year).
void sort_entries(DatasetManifest& manifest);

struct YearSplit {
  std::vector<int> train_years{2001, 2002, 2003, 2004, 2005, 2006, 2007, 2008, 2009};
  int val_year = 2010;
  int test_year = 2011;
};

struct SplitManifests {
  DatasetManifest train;
  DatasetManifest val;
  DatasetManifest test;
};

// Partition by year. Rows from years outside the split are left out.
SplitManifests split_by_year(const DatasetManifest& manifest, const YearSplit& split = {});

// Parses "2001-2009" or "2001,2003,2005".
std::vector<int> parse_year_list(const std::string& text);

/// District production apportioned to tehsils in proportion to their
/// agricultural area. As a consequence every tehsil of a district receives
/// the same per-hectare yield, production / total area.
std::vector<double> apportion_yield(double district_production_kg, const std::vector<double>& tehsil_areas_ha);

// Per-tehsil yield labels (kg/ha) implied by apportion_yield.
std::vector<double> apportioned_yields(double district_production_kg, const std::vector<double>& tehsil_areas_ha);

}  // namespace cropyield
