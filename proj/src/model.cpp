#include "cgrg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cgrg {

std::string_view to_string(Geometry g) {
    return g == Geometry::torus ? "torus" : "cube";
}

std::string_view to_string(EdgeModel m) {
    return m == EdgeModel::geometric ? "geometric" : "independent";
}

Geometry parse_geometry(std::string_view s) {
    if (s == "torus") return Geometry::torus;
    if (s == "cube") return Geometry::cube;
    throw std::invalid_argument("unknown geometry '" + std::string(s) + "' (expected torus|cube)");
}

EdgeModel parse_edge_model(std::string_view s) {
    if (s == "geometric") return EdgeModel::geometric;
    if (s == "independent") return EdgeModel::independent;
    throw std::invalid_argument("unknown edge model '" + std::string(s) +
                                "' (expected geometric|independent)");
}

SquareMatrix::SquareMatrix(std::size_t k, std::vector<double> data) : k_(k), data_(std::move(data)) {
    if (data_.size() != k * k)
        throw std::invalid_argument("SquareMatrix: expected " + std::to_string(k * k) + " entries, got " +
                                    std::to_string(data_.size()));
}

bool SquareMatrix::is_symmetric(double tol) const {
    for (std::size_t a = 0; a < k_; ++a)
        for (std::size_t b = a + 1; b < k_; ++b)
            if (std::abs((*this)(a, b) - (*this)(b, a)) > tol) return false;
    return true;
}

double SquareMatrix::max() const {
    return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double SquareMatrix::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

double ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("ball_volume: dimension must be >= 1");
    const double half = 0.5 * d;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

ModelParameters::ModelParameters(int d, std::vector<double> nu, SquareMatrix kernel, Geometry geometry,
                                 EdgeModel edge_model)
    : d_(d), nu_(std::move(nu)), kernel_(std::move(kernel)), geometry_(geometry), edge_model_(edge_model),
      rho_(0.0) {
    if (d_ < 1) throw std::invalid_argument("ModelParameters: d must be >= 1");
    if (nu_.empty()) throw std::invalid_argument("ModelParameters: colour alphabet is empty");
    if (kernel_.size() != nu_.size())
        throw std::invalid_argument("ModelParameters: kernel is " + std::to_string(kernel_.size()) + "x" +
                                    std::to_string(kernel_.size()) + " but nu has " +
                                    std::to_string(nu_.size()) + " colours");
    double total = 0.0;
    for (double w : nu_) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("ModelParameters: nu entries must be finite and >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("ModelParameters: nu must sum to 1 (got " + std::to_string(total) + ")");
    for (double c : kernel_.data())
        if (!(c >= 0.0) || !std::isfinite(c))
            throw std::invalid_argument("ModelParameters: kernel entries must be finite and >= 0");
    if (!kernel_.is_symmetric(1e-12)) throw std::invalid_argument("ModelParameters: kernel must be symmetric");
    if (kernel_.max() <= 0.0) throw std::invalid_argument("ModelParameters: kernel is identically zero");
    rho_ = ball_volume(d_);
}

ModelParameters ModelParameters::uncoloured(int d, double c, Geometry geometry, EdgeModel edge_model) {
    return ModelParameters(d, {1.0}, SquareMatrix(1, c), geometry, edge_model);
}

SquareMatrix ModelParameters::radii(std::size_t n) const {
    if (n == 0) throw std::invalid_argument("radii: n must be >= 1");
    SquareMatrix r(k());
    for (std::size_t a = 0; a < k(); ++a)
        for (std::size_t b = 0; b < k(); ++b)
            r(a, b) = std::pow(kernel_(a, b) / static_cast<double>(n), 1.0 / d_);
    return r;
}

SquareMatrix ModelParameters::connection_probabilities(std::size_t n) const {
    if (n == 0) throw std::invalid_argument("connection_probabilities: n must be >= 1");
    SquareMatrix p(k());
    for (std::size_t a = 0; a < k(); ++a)
        for (std::size_t b = 0; b < k(); ++b)
            p(a, b) = rho_ * kernel_(a, b) / static_cast<double>(n);
    return p;
}

ModelParameters ModelParameters::with_geometry(Geometry g) const {
    ModelParameters copy = *this;
    copy.geometry_ = g;
    return copy;
}

ModelParameters ModelParameters::with_edge_model(EdgeModel m) const {
    ModelParameters copy = *this;
    copy.edge_model_ = m;
    return copy;
}

}  // namespace cgrg
