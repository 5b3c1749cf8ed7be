#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace velo {

using Array = Eigen::ArrayXXd;
using CArray = Eigen::ArrayXXcd;

/// Regular periodic grid over (-pi,pi)^2. Nodes are x_i = -pi + i*h,
/// i = 0..n-1; the node at x = pi is identified with x = -pi.
struct Grid2D {
    int n1 = 0;  ///< samples along x1
    int n2 = 0;  ///< samples along x2

    Grid2D() = default;
    Grid2D(int n1_, int n2_) : n1(n1_), n2(n2_) {
        if (n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0)
            throw std::invalid_argument("Grid2D: sizes must be even and >= 4");
    }

    double h1() const { return 2.0 * M_PI / n1; }
    double h2() const { return 2.0 * M_PI / n2; }
    double min_h() const { return std::min(h1(), h2()); }
    double cell_area() const { return h1() * h2(); }
    long size() const { return static_cast<long>(n1) * n2; }

    double x1(int i) const { return -M_PI + i * h1(); }
    double x2(int j) const { return -M_PI + j * h2(); }

    bool operator==(const Grid2D& o) const { return n1 == o.n1 && n2 == o.n2; }
    bool operator!=(const Grid2D& o) const { return !(*this == o); }
};

/// Real scalar samples; data(i,j) = f(x1(i), x2(j)).
struct ScalarField {
    Grid2D grid;
    Array data;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g) : grid(g), data(Array::Zero(g.n1, g.n2)) {}
    ScalarField(const Grid2D& g, Array values) : grid(g), data(std::move(values)) {
        if (data.rows() != grid.n1 || data.cols() != grid.n2)
            throw std::invalid_argument("ScalarField: array shape does not match grid");
    }

    bool finite() const { return data.isFinite().all(); }
};

/// Two scalar components sharing one grid.
struct VectorField {
    Grid2D grid;
    Array x, y;

    VectorField() = default;
    explicit VectorField(const Grid2D& g)
        : grid(g), x(Array::Zero(g.n1, g.n2)), y(Array::Zero(g.n1, g.n2)) {}
    VectorField(const Grid2D& g, Array vx, Array vy)
        : grid(g), x(std::move(vx)), y(std::move(vy)) {
        if (x.rows() != grid.n1 || x.cols() != grid.n2 ||
            y.rows() != grid.n1 || y.cols() != grid.n2)
            throw std::invalid_argument("VectorField: array shape does not match grid");
    }

    bool finite() const { return x.isFinite().all() && y.isFinite().all(); }
};

/// 2x2 tensor samples, entries row-major (e11 e12 / e21 e22).
struct TensorField2x2 {
    Grid2D grid;
    Array e11, e12, e21, e22;

    TensorField2x2() = default;
    explicit TensorField2x2(const Grid2D& g)
        : grid(g),
          e11(Array::Zero(g.n1, g.n2)), e12(Array::Zero(g.n1, g.n2)),
          e21(Array::Zero(g.n1, g.n2)), e22(Array::Zero(g.n1, g.n2)) {}

    bool finite() const {
        return e11.isFinite().all() && e12.isFinite().all() &&
               e21.isFinite().all() && e22.isFinite().all();
    }
};

/// Scalar field sampled at n_t+1 uniform times t_j = j/n_t in [0,1].
struct TimeSeriesField {
    Grid2D grid;
    int nt = 0;
    std::vector<Array> slices;  ///< size nt+1

    TimeSeriesField() = default;
    TimeSeriesField(const Grid2D& g, int nt_) : grid(g), nt(nt_) {
        if (nt < 1) throw std::invalid_argument("TimeSeriesField: n_t must be >= 1");
        slices.assign(nt + 1, Array::Zero(g.n1, g.n2));
    }

    double dt() const { return 1.0 / nt; }
    const Array& front() const { return slices.front(); }
    const Array& back() const { return slices.back(); }
};

// Grid-scaled L2 inner products and norms (trapezoidal == rectangle rule
// on a periodic grid).

inline double l2_inner(const ScalarField& a, const ScalarField& b) {
    return (a.data * b.data).sum() * a.grid.cell_area();
}
inline double l2_inner(const VectorField& a, const VectorField& b) {
    return ((a.x * b.x).sum() + (a.y * b.y).sum()) * a.grid.cell_area();
}
inline double l2_norm(const ScalarField& f) { return std::sqrt(l2_inner(f, f)); }
inline double l2_norm(const VectorField& v) { return std::sqrt(l2_inner(v, v)); }
inline double linf_norm(const ScalarField& f) { return f.data.abs().maxCoeff(); }
inline double linf_norm(const VectorField& v) {
    return std::max(v.x.abs().maxCoeff(), v.y.abs().maxCoeff());
}
inline double mean(const ScalarField& f) { return f.data.mean(); }

}  // namespace velo
