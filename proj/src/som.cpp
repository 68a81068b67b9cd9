#include "fsvr/som.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fsvr/errors.hpp"
#include "fsvr/rng.hpp"

namespace fsvr {

namespace {

constexpr std::uint64_t kInitSalt = 0x1;
constexpr std::uint64_t kOrderSalt = 0x2;

void validate_config(const SomConfig& config) {
    if (config.rows == 0 || config.cols == 0) throw ParamError("som grid dimensions must be >= 1");
    if (!(config.lr_initial > 0.0) || !(config.lr_final > 0.0) ||
        config.lr_initial > 1.0 || config.lr_final > config.lr_initial)
        throw ParamError("som learning rates must satisfy 1 >= lr_initial >= lr_final > 0");
    if (config.radius_final < 0.0 || config.radius_initial < config.radius_final)
        throw ParamError("som radii must satisfy radius_initial >= radius_final >= 0");
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_rows(const SomMap& map, const std::vector<std::vector<double>>& data) {
    for (const auto& row : data)
        if (row.size() != map.dim)
            throw ParamError("data dimension " + std::to_string(row.size()) +
                             " does not match map dimension " + std::to_string(map.dim));
}

// Node position in layout coordinates.
void node_position(const SomConfig& config, std::size_t index, double& x, double& y) {
    const std::size_t row = index / config.cols;
    const std::size_t col = index % config.cols;
    if (config.topology == GridTopology::Hexagonal) {
        x = static_cast<double>(col) + ((row & 1) ? 0.5 : 0.0);
        y = static_cast<double>(row) * std::sqrt(3.0) / 2.0;
    } else {
        x = static_cast<double>(col);
        y = static_cast<double>(row);
    }
}

// Exponential interpolation between two positive endpoints.
double decay(double initial, double final_value, double u) {
    const double lo = 1e-9;
    const double a = std::max(initial, lo);
    const double b = std::max(final_value, lo);
    return a * std::pow(b / a, u);
}

}  // namespace

double grid_distance(const SomMap& map, std::size_t a, std::size_t b) {
    if (a >= map.node_count() || b >= map.node_count())
        throw ParamError("grid_distance: node index out of range");
    double ax, ay, bx, by;
    node_position(map.config, a, ax, ay);
    node_position(map.config, b, bx, by);
    return std::hypot(ax - bx, ay - by);
}

SomMap init_map(const SomConfig& config, std::size_t dim,
                const std::vector<std::vector<double>>& data) {
    validate_config(config);
    if (dim == 0) throw ParamError("init_map: dimension must be >= 1");
    if (data.empty()) throw DataError("init_map: no data rows");
    for (const auto& row : data)
        if (row.size() != dim)
            throw ParamError("init_map: data dimension " + std::to_string(row.size()) +
                             " does not match dim " + std::to_string(dim));

    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& row : data)
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], row[d]);
            hi[d] = std::max(hi[d], row[d]);
        }

    SomMap map;
    map.config = config;
    map.dim = dim;
    map.nodes.assign(config.rows * config.cols, std::vector<double>(dim));
    Rng rng(Rng::mix(config.seed, kInitSalt));
    for (auto& node : map.nodes)
        for (std::size_t d = 0; d < dim; ++d) node[d] = rng.uniform(lo[d], hi[d]);
    return map;
}

SomMap train_som(const SomMap& map, const std::vector<std::vector<double>>& data) {
    if (data.empty()) throw DataError("train_som: no data rows");
    check_rows(map, data);

    SomMap out = map;
    const SomConfig& config = out.config;
    const std::size_t n = data.size();
    const std::size_t total_steps = config.epochs * n;
    if (total_steps == 0) {
        out.trained = true;
        return out;
    }

    Rng rng(Rng::mix(config.seed, kOrderSalt));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t k = 0; k < n; ++k, ++step) {
            const double u = total_steps > 1
                                 ? static_cast<double>(step) / static_cast<double>(total_steps - 1)
                                 : 0.0;
            const double lr = decay(config.lr_initial, config.lr_final, u);
            const double radius = decay(config.radius_initial, config.radius_final, u);
            const std::vector<double>& x = data[order[k]];
            const std::size_t winner = bmu(out, x);
            if (radius < 1e-12) {
                auto& node = out.nodes[winner];
                for (std::size_t d = 0; d < out.dim; ++d) node[d] += lr * (x[d] - node[d]);
                continue;
            }
            for (std::size_t j = 0; j < out.nodes.size(); ++j) {
                const double gd = grid_distance(out, j, winner);
                const double h = std::exp(-gd * gd / (2.0 * radius * radius));
                auto& node = out.nodes[j];
                for (std::size_t d = 0; d < out.dim; ++d) node[d] += lr * h * (x[d] - node[d]);
            }
        }
    }
    out.trained = true;
    return out;
}

std::size_t bmu(const SomMap& map, const std::vector<double>& x) {
    if (x.size() != map.dim)
        throw ParamError("bmu: input dimension " + std::to_string(x.size()) +
                         " does not match map dimension " + std::to_string(map.dim));
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < map.nodes.size(); ++j) {
        const double d = sq_distance(map.nodes[j], x);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

Partition partition_data(const SomMap& map, const std::vector<std::vector<double>>& data) {
    check_rows(map, data);
    Partition partition;
    partition.assignment.resize(data.size());
    partition.clusters.assign(map.node_count(), {});
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t node = bmu(map, data[i]);
        partition.assignment[i] = node;
        partition.clusters[node].push_back(i);
    }
    return partition;
}

double quantization_error(const SomMap& map, const std::vector<std::vector<double>>& data) {
    if (data.empty()) throw DataError("quantization_error: no data rows");
    check_rows(map, data);
    double sum = 0.0;
    for (const auto& row : data) sum += std::sqrt(sq_distance(map.nodes[bmu(map, row)], row));
    return sum / static_cast<double>(data.size());
}

std::string topology_name(GridTopology topology) {
    return topology == GridTopology::Hexagonal ? "hexagonal" : "rectangular";
}

GridTopology topology_from_name(const std::string& name) {
    if (name == "rectangular") return GridTopology::Rectangular;
    if (name == "hexagonal") return GridTopology::Hexagonal;
    throw ParamError("unknown grid topology '" + name + "' (expected rectangular or hexagonal)");
}

}  // namespace fsvr
