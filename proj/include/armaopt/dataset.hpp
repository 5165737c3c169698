#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "armaopt/simulate.hpp"
#include "armaopt/types.hpp"

namespace armaopt {

/// Series file: header `t,y`, one row per observation, full double
/// round-trip precision.
void write_series_csv(const std::filesystem::path& path,
                      std::span<const double> y);
std::vector<double> read_series_csv(const std::filesystem::path& path);

/// One manifest row: provenance and ground truth of a stored series.
struct DatasetEntry {
  int series_id = 0;
  ArmaOrder order;
  std::size_t length = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;  // per-series substream key
  GroundTruth truth;
  std::string file;  // series CSV, relative to the dataset directory
};

/// Dataset directory: manifest.json plus one CSV per series.
struct Dataset {
  std::filesystem::path dir;
  std::uint64_t seed = 0;
  double epsilon = 1e-2;
  double tau = 2e-2;
  std::vector<DatasetEntry> entries;

  std::vector<double> load(const DatasetEntry& e) const;
};

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   std::span<const SimulatedSeries> series);

/// Parse a dataset directory. Throws std::runtime_error on a missing or
/// malformed manifest; a manifest entry whose series file is missing is
/// kept (load fails lazily), so partial datasets are usable.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace armaopt
