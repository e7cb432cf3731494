#include "pmgc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmgc {

Matrix2D::Matrix2D(int r, int c, double fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix2D: negative dimension");
    rows = r;
    cols = c;
    data.assign(static_cast<size_t>(r) * c, fill);
}

Matrix2D Matrix2D::identity(int n) {
    Matrix2D m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix2D Matrix2D::from_rows(std::initializer_list<std::initializer_list<double>> vals) {
    Matrix2D m(static_cast<int>(vals.size()), vals.size() ? static_cast<int>(vals.begin()->size()) : 0);
    int i = 0;
    for (const auto& row : vals) {
        if (static_cast<int>(row.size()) != m.cols)
            throw std::invalid_argument("Matrix2D::from_rows: ragged rows");
        int j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool Matrix2D::all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix2D::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool operator==(const Matrix2D& a, const Matrix2D& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

namespace {
void require_same_shape(const Matrix2D& a, const Matrix2D& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
}
}  // namespace

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: inner dims " + a.shape_str() + " vs " + b.shape_str());
    Matrix2D out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
        double* orow = &out.data[static_cast<size_t>(i) * b.cols];
        for (int kk = 0; kk < a.cols; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = &b.data[static_cast<size_t>(kk) * b.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Matrix2D transpose(const Matrix2D& a) {
    Matrix2D out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

Matrix2D add(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "add");
    Matrix2D out = a;
    for (int i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix2D sub(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "sub");
    Matrix2D out = a;
    for (int i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Matrix2D hadamard(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "hadamard");
    Matrix2D out = a;
    for (int i = 0; i < out.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Matrix2D scale(const Matrix2D& a, double c) {
    Matrix2D out = a;
    for (double& v : out.data) v *= c;
    return out;
}

Matrix2D relu(const Matrix2D& a) {
    Matrix2D out = a;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

Matrix2D row_bias_add(const Matrix2D& x, const Matrix2D& bias) {
    if (bias.rows != 1 || bias.cols != x.cols)
        throw std::invalid_argument("row_bias_add: bias " + bias.shape_str() + " for " + x.shape_str());
    Matrix2D out = x;
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out(i, j) += bias(0, j);
    return out;
}

Matrix2D col_slice(const Matrix2D& a, int c0, int c1) {
    if (c0 < 0 || c1 > a.cols || c0 > c1)
        throw std::invalid_argument("col_slice: range [" + std::to_string(c0) + "," +
                                    std::to_string(c1) + ") of " + a.shape_str());
    Matrix2D out(a.rows, c1 - c0);
    for (int i = 0; i < a.rows; ++i)
        for (int j = c0; j < c1; ++j) out(i, j - c0) = a(i, j);
    return out;
}

Matrix2D pad_cols(const Matrix2D& a, int cols) {
    if (cols < a.cols) throw std::invalid_argument("pad_cols: target narrower than input");
    Matrix2D out(a.rows, cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
    return out;
}

double sum_sq(const Matrix2D& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return s;
}

double frob_sq_diff(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "frob_sq_diff");
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s;
}

double max_abs_diff(const Matrix2D& a, const Matrix2D& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace pmgc
