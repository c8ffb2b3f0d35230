#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uavad {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Deliberately minimal: the model and
// PCA code only need matrix-vector products, outer-product accumulation
// and a symmetric eigensolver, all of which run on this one type.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// out += A x
void matvec_add(const Matrix& a, std::span<const double> x, std::span<double> out);
// out += A^T d  (backprop of matvec through x)
void matvec_transpose_add(const Matrix& a, std::span<const double> d, std::span<double> out);
// A += u v^T   (gradient accumulation for weight matrices)
void outer_add(Matrix& a, std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha x

bool all_finite(std::span<const double> v);
bool all_finite(const Matrix& m);

}  // namespace uavad
