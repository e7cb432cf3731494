#pragma once

#include "pmgc/matrix.hpp"

namespace pmgc {

// One stride-1 slice X^t of a multivariate series, N x w, with the last
// pred_len columns forming the prediction target and the rest the context.
struct WindowSample {
    Matrix2D full;
    int pred_len = 0;
    long end_tick = 0;  // absolute index of the last column in the source series

    int width() const { return full.cols; }
    int channels() const { return full.rows; }
    Matrix2D context() const { return col_slice(full, 0, full.cols - pred_len); }
    Matrix2D target() const { return col_slice(full, full.cols - pred_len, full.cols); }
};

}  // namespace pmgc
