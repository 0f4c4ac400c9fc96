#include "cgrg/graph_sample.hpp"

#include <cmath>

namespace cgrg {

namespace {

std::string edge_name(std::size_t idx, const Edge& e) {
    return "edge #" + std::to_string(idx) + " (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
}

}  // namespace

void validate_structure(const GraphSample& s) {
    if (s.k == 0) throw SampleError("sample has an empty colour alphabet");
    if (s.colours.size() != s.n)
        throw SampleError("sample declares n=" + std::to_string(s.n) + " but has " +
                          std::to_string(s.colours.size()) + " colours");
    if (!s.points.empty() && s.points.size() != s.n * static_cast<std::size_t>(s.d))
        throw SampleError("sample has " + std::to_string(s.points.size()) + " coordinates, expected n*d=" +
                          std::to_string(s.n * static_cast<std::size_t>(s.d)));
    for (std::size_t v = 0; v < s.n; ++v)
        if (s.colours[v] >= s.k)
            throw SampleError("vertex " + std::to_string(v) + " has colour " + std::to_string(s.colours[v]) +
                              " outside alphabet of size " + std::to_string(s.k));
    for (std::size_t i = 0; i < s.edges.size(); ++i) {
        const Edge& e = s.edges[i];
        if (e.first >= s.n || e.second >= s.n)
            throw SampleError(edge_name(i, e) + " references a vertex outside [0," + std::to_string(s.n) + ")");
        if (e.first == e.second) throw SampleError(edge_name(i, e) + " is a self-loop");
        if (e.first > e.second) throw SampleError(edge_name(i, e) + " is not in canonical i<j order");
        if (i > 0) {
            if (s.edges[i - 1] == e) throw SampleError(edge_name(i, e) + " is a duplicate");
            if (s.edges[i - 1] > e) throw SampleError(edge_name(i, e) + " is out of sorted order");
        }
    }
}

void validate_geometry(const GraphSample& s) {
    if (s.points.empty() || s.edge_model != EdgeModel::geometric) return;
    if (s.radii.size() != s.k) throw SampleError("sample radii matrix does not match alphabet size");
    for (std::size_t i = 0; i < s.edges.size(); ++i) {
        const auto [u, v] = s.edges[i];
        const double r = s.radii(s.colours[u], s.colours[v]);
        const double d2 = squared_distance(s.point(u), s.point(v), s.geometry);
        if (!(d2 <= r * r))
            throw SampleError(edge_name(i, s.edges[i]) + " has length " + std::to_string(std::sqrt(d2)) +
                              " > radius " + std::to_string(r));
    }
}

double squared_distance(std::span<const double> x, std::span<const double> y, Geometry geometry) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double delta = std::abs(x[i] - y[i]);
        if (geometry == Geometry::torus && delta > 0.5) delta = 1.0 - delta;
        acc += delta * delta;
    }
    return acc;
}

}  // namespace cgrg
