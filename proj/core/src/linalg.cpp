#include "uavad/linalg.hpp"

#include <cassert>
#include <cmath>

namespace uavad {

void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> out) {
    assert(x.size() == a.cols() && out.size() == a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        out[r] += dot(a.row(r), x);
    }
}

void matvec_transpose_add(const Matrix& a, std::span<const double> d, std::span<double> out) {
    assert(d.size() == a.rows() && out.size() == a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        axpy(d[r], a.row(r), out);
    }
}

void outer_add(Matrix& a, std::span<const double> u, std::span<const double> v) {
    assert(u.size() == a.rows() && v.size() == a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        axpy(u[r], v, a.row(r));
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const Matrix& m) { return all_finite(m.flat()); }

}  // namespace uavad
