#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fsvr {

enum class GridTopology { Rectangular, Hexagonal };

struct SomConfig {
    std::size_t rows = 3;
    std::size_t cols = 3;
    GridTopology topology = GridTopology::Rectangular;
    std::size_t epochs = 20;
    double lr_initial = 0.5;
    double lr_final = 0.02;
    double radius_initial = 1.5;
    double radius_final = 0.01;
    std::uint64_t seed = 0;
};

// A self-organizing map: reference vectors laid out row-major on a
// rows x cols grid. Works on plain numeric rows of any dimension.
struct SomMap {
    SomConfig config;
    std::size_t dim = 0;
    std::vector<std::vector<double>> nodes;  // rows*cols entries, row-major
    bool trained = false;

    std::size_t node_count() const { return config.rows * config.cols; }
};

// Data rows grouped by winning node.
struct Partition {
    std::vector<std::size_t> assignment;             // row -> node index
    std::vector<std::vector<std::size_t>> clusters;  // node index -> row indices
};

// Distance between two grid nodes in layout coordinates (not in data
// space). Rectangular grids use plain (row, col) positions; hexagonal
// grids offset odd rows by half a cell and compress rows by sqrt(3)/2.
double grid_distance(const SomMap& map, std::size_t a, std::size_t b);

// Reference vectors drawn uniformly inside the data bounding box with
// the seeded generator; identical (config, dim, data) give identical
// maps.
SomMap init_map(const SomConfig& config, std::size_t dim,
                const std::vector<std::vector<double>>& data);

// Online training: epochs passes over the data in seeded shuffled
// order; every sample moves all nodes toward it, weighted by a
// Gaussian of grid distance. Learning rate and radius decay
// exponentially from their initial to final values over all steps.
// Zero epochs only marks the map trained.
SomMap train_som(const SomMap& map, const std::vector<std::vector<double>>& data);

// Index of the best-matching node (smallest Euclidean distance; ties
// go to the lowest index).
std::size_t bmu(const SomMap& map, const std::vector<double>& x);

Partition partition_data(const SomMap& map, const std::vector<std::vector<double>>& data);

// Mean Euclidean distance from each row to its winning reference vector.
double quantization_error(const SomMap& map, const std::vector<std::vector<double>>& data);

std::string topology_name(GridTopology topology);
GridTopology topology_from_name(const std::string& name);

}  // namespace fsvr
