#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pmgc {

// Dense row-major matrix of doubles. The single numeric carrier for
// windows, embeddings, adjacencies and parameters.
struct Matrix2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Matrix2D() = default;
    Matrix2D(int r, int c, double fill = 0.0);

    static Matrix2D identity(int n);
    static Matrix2D from_rows(std::initializer_list<std::initializer_list<double>> vals);

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    int size() const { return rows * cols; }
    bool same_shape(const Matrix2D& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    std::string shape_str() const;
};

bool operator==(const Matrix2D& a, const Matrix2D& b);

// Shape-checked kernels. All throw std::invalid_argument on mismatch.
Matrix2D matmul(const Matrix2D& a, const Matrix2D& b);
Matrix2D transpose(const Matrix2D& a);
Matrix2D add(const Matrix2D& a, const Matrix2D& b);
Matrix2D sub(const Matrix2D& a, const Matrix2D& b);
Matrix2D hadamard(const Matrix2D& a, const Matrix2D& b);
Matrix2D scale(const Matrix2D& a, double c);
Matrix2D relu(const Matrix2D& a);

// out(i,j) = x(i,j) + bias(0,j); bias must be 1 x x.cols.
Matrix2D row_bias_add(const Matrix2D& x, const Matrix2D& bias);

// Columns [c0, c1) as a new matrix.
Matrix2D col_slice(const Matrix2D& a, int c0, int c1);

// Zero-pad on the right to `cols` columns.
Matrix2D pad_cols(const Matrix2D& a, int cols);

double sum_sq(const Matrix2D& a);
double frob_sq_diff(const Matrix2D& a, const Matrix2D& b);  // ||a-b||_F^2
double max_abs_diff(const Matrix2D& a, const Matrix2D& b);

}  // namespace pmgc
