#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rfio/grid.hpp"

namespace rfio {

// Densities and fields are exchanged as flat little-endian complex arrays
// behind a one-line text header carrying the shape and the grid hash.

void save_density(const std::filesystem::path& path, const HalfDensity& f,
                  const PolarFrequencyGrid& grid);
HalfDensity load_density(const std::filesystem::path& path, const PolarFrequencyGrid& grid);

void save_field(const std::filesystem::path& path, const SpatialField& F,
                const SpatialGrid& grid);
SpatialField load_field(const std::filesystem::path& path, const SpatialGrid& grid);

// Minimal CSV writer with stable "%.12g" formatting (outputs are part of the
// reproducibility contract).
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_labeled(const std::string& label, const std::vector<double>& values);

private:
    struct Impl;
    Impl* impl_;
};

std::string format_double(double v);

} // namespace rfio
