#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "windri/preprocess.hpp"

namespace windri {

using Index4 = std::array<std::size_t, 4>;

// One (station, time, height, wind, Ri) record; the atomic sample.
struct WindObservation {
    std::string station_id;
    double timestamp = 0.0;  // seconds since epoch
    double h = 0.0;          // elevation, m
    double u = 0.0;          // zonal wind, m/s
    double v = 0.0;          // meridional wind, m/s
    double w = 0.0;          // vertical wind, m/s
    std::optional<double> ri;
};

struct Dataset {
    std::vector<WindObservation> records;
    std::vector<std::string> provenance;
};

// CSV schema (UTF-8, comma separated, header required):
//   station_id,timestamp,h,u,v,w[,ri]
// h,u,v,w are mandatory columns; an absent ri cell is the empty string.
// Rows with invalid required fields fail the load with a row-numbered error.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

struct MergeTolerance {
    double time_s = 0.0;
    double height_m = 0.0;
};

// Fills missing ri in primary by linear interpolation in time between
// secondary records of the same station that bracket the primary record and
// lie within both tolerances (height ties broken by proximity). Records with
// no bracketing pair pass through unfilled.
Dataset merge_interpolate(const Dataset& primary, const Dataset& secondary, MergeTolerance tol);

// Coordinate-format mode-4 tensor. Duplicate index tuples are kept as
// separate samples; collision_count reports how many entries share a cell
// with an earlier one.
struct SparseTensor4 {
    struct Entry {
        Index4 idx{};
        double value = 0.0;
    };
    std::vector<Entry> entries;
    std::array<std::size_t, 4> mode_sizes{};
    std::size_t collision_count = 0;
};

// One entry per record: indices from discretizing (h,u,v,w), value from the
// fitted target transform. Every record must carry ri.
SparseTensor4 build_sparse_tensor(const Dataset& ds, const Discretizer& disc);

struct FeatureColumns {
    std::vector<double> h, u, v, w;
    std::vector<double> ri;  // rows that carry ri only
};

FeatureColumns columns(const Dataset& ds);

// Shortest-round-trip decimal rendering, shared by every text output.
std::string format_double(double v);

}  // namespace windri
