#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgrg/model.hpp"

namespace cgrg {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

/// A realised coloured random geometric graph.
///
/// `points` holds n*d coordinates (row per vertex) and is empty for samples
/// drawn under EdgeModel::independent, where positions play no role.
/// `radii` are the connection radii actually used, so every geometric edge
/// satisfies dist(i, j) <= radii(colour_i, colour_j). Edges are stored with
/// i < j and sorted lexicographically.
struct GraphSample {
    std::size_t n = 0;
    int d = 0;
    std::size_t k = 0;
    Geometry geometry = Geometry::torus;
    EdgeModel edge_model = EdgeModel::geometric;
    std::uint64_t seed = 0;
    std::vector<double> points;
    std::vector<std::uint32_t> colours;
    std::vector<Edge> edges;
    SquareMatrix radii;

    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(points).subspan(i * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    }

    friend bool operator==(const GraphSample&, const GraphSample&) = default;
};

/// Raised when a sample violates its structural or geometric invariants.
class SampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks colours, edge indices, self-loops, duplicates and canonical order.
/// Throws SampleError naming the first offending vertex or edge.
void validate_structure(const GraphSample& sample);

/// Checks every edge against the stored radii under the stored geometry.
/// No-op for samples without points.
void validate_geometry(const GraphSample& sample);

/// Squared distance between two points of [0,1]^d (wrap-around on the torus).
double squared_distance(std::span<const double> x, std::span<const double> y, Geometry geometry);

}  // namespace cgrg
