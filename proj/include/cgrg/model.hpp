#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cgrg {

enum class Geometry { torus, cube };

/// How edges are realised given positions and colours.
///
/// `geometric` is the literal model: two vertices are joined iff their
/// distance is at most r_n(a,b). `independent` joins every pair independently
/// with probability F(r_n(a,b)); this is the law under which the tilted
/// change of measure has an exact product Radon-Nikodym derivative.
enum class EdgeModel { geometric, independent };

std::string_view to_string(Geometry g);
std::string_view to_string(EdgeModel m);
Geometry parse_geometry(std::string_view s);
EdgeModel parse_edge_model(std::string_view s);

/// Dense k x k matrix of doubles, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t k, double fill = 0.0) : k_(k), data_(k * k, fill) {}
    SquareMatrix(std::size_t k, std::vector<double> data);

    std::size_t size() const { return k_; }
    double& operator()(std::size_t a, std::size_t b) { return data_[a * k_ + b]; }
    double operator()(std::size_t a, std::size_t b) const { return data_[a * k_ + b]; }
    std::span<const double> data() const { return data_; }

    bool is_symmetric(double tol) const;
    double max() const;
    double sum() const;

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t k_ = 0;
    std::vector<double> data_;
};

/// Volume of the unit ball in R^d, pi^{d/2} / Gamma(d/2 + 1).
double ball_volume(int d);

/// Colour alphabet, colour law, connection kernel and geometry of a CGRG.
///
/// The kernel C(a,b) is the limit of n r_n^d(a,b); radii are taken as
/// r_n(a,b) = (C(a,b)/n)^{1/d}. Construction validates that nu is a
/// probability vector (within 1e-12) and that C is symmetric, nonnegative
/// and not identically zero.
class ModelParameters {
public:
    ModelParameters(int d, std::vector<double> nu, SquareMatrix kernel,
                    Geometry geometry = Geometry::torus,
                    EdgeModel edge_model = EdgeModel::geometric);

    /// Single-colour model with constant kernel c.
    static ModelParameters uncoloured(int d, double c, Geometry geometry = Geometry::torus,
                                      EdgeModel edge_model = EdgeModel::geometric);

    std::size_t k() const { return nu_.size(); }
    int d() const { return d_; }
    std::span<const double> nu() const { return nu_; }
    double nu(std::size_t a) const { return nu_[a]; }
    const SquareMatrix& kernel() const { return kernel_; }
    double kernel(std::size_t a, std::size_t b) const { return kernel_(a, b); }
    Geometry geometry() const { return geometry_; }
    EdgeModel edge_model() const { return edge_model_; }
    double rho() const { return rho_; }

    /// r_n(a,b) = (C(a,b)/n)^{1/d}.
    SquareMatrix radii(std::size_t n) const;
    /// F(r_n(a,b)) = rho(d) C(a,b) / n.
    SquareMatrix connection_probabilities(std::size_t n) const;

    ModelParameters with_geometry(Geometry g) const;
    ModelParameters with_edge_model(EdgeModel m) const;

private:
    int d_;
    std::vector<double> nu_;
    SquareMatrix kernel_;
    Geometry geometry_;
    EdgeModel edge_model_;
    double rho_;
};

}  // namespace cgrg
