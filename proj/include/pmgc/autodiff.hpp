#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "pmgc/matrix.hpp"

namespace pmgc {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Matrix2D& value() const;
    const Matrix2D& grad() const;
};

// Reverse-mode tape over Matrix2D values. Nodes are appended by the op
// functions below; backward() runs the recorded closures in reverse order.
// Single-threaded; one tape per loss evaluation.
class Tape {
public:
    Var leaf(Matrix2D value);

    const Matrix2D& value_of(int id) const { return nodes_[id].value; }
    Matrix2D& grad_of(int id) { return nodes_[id].grad; }
    const Matrix2D& grad_of(int id) const { return nodes_[id].grad; }

    // Seeds d(root)/d(root) = 1 and accumulates gradients into every node.
    // root must be 1x1.
    void backward(Var root);

    int size() const { return static_cast<int>(nodes_.size()); }

    // Smallest distance of any ReLU/clamp input to its kink, over every such
    // op recorded on this tape. +inf when none ran. Finite-difference checks
    // use this to drop entries whose probes straddled a kink.
    double min_kink_gap() const { return min_kink_gap_; }
    void note_kink_gap(double gap) { min_kink_gap_ = gap < min_kink_gap_ ? gap : min_kink_gap_; }

    // Rows with (near-)zero norm seen by cosine graph generation.
    std::int64_t zero_norm_rows() const { return zero_norm_rows_; }
    void count_zero_norm_rows(std::int64_t n) { zero_norm_rows_ += n; }

    using BackFn = std::function<void(Tape&, const Matrix2D& upstream)>;
    Var emit(Matrix2D value, BackFn back);

private:
    struct Node {
        Matrix2D value;
        Matrix2D grad;
        BackFn back;  // empty for leaves
    };
    std::vector<Node> nodes_;
    double min_kink_gap_ = std::numeric_limits<double>::infinity();
    std::int64_t zero_norm_rows_ = 0;
};

// --- tape ops -------------------------------------------------------------
// Shapes follow the matrix.hpp kernels; all ops throw std::invalid_argument
// on shape mismatch and require both operands to live on the same tape.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var scale(Var a, double c);
Var relu(Var a);                       // records kink gaps
Var row_bias_add(Var x, Var bias);     // bias 1 x cols, broadcast over rows
Var col_slice(Var a, int c0, int c1);
Var sum_sq(Var a);                     // 1x1: sum of squared entries
Var mean_sq(Var a);                    // 1x1: mean of squared entries
Var exp_elem(Var a);
Var log_elem(Var a);                   // throws on non-positive entries
Var add_const(Var a, double c);

// Pairwise cosine similarity of the rows of h (N x d) -> N x N, denominator
// guarded with eps; symmetric by construction. Rows whose norm is ~0 are
// counted on the tape's zero_norm_rows diagnostic.
Var cosine_similarity(Var h, double eps = 1e-12);

// D^{-1/2} A D^{-1/2} with D = diag(row sums); zero-degree rows map to zero.
Var sym_normalize(Var a);

// Entrywise clamp to [0,1] (records kink gaps) and symmetrization (A+A^T)/2.
Var clamp01(Var a);
Var symmetrize(Var a);

// Arithmetic mean of same-shaped vars (fixed left-to-right accumulation).
Var mean_of(const std::vector<Var>& vars);

}  // namespace pmgc
