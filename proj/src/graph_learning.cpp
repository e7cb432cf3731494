#include "pmgc/graph_learning.hpp"

#include <cmath>
#include <stdexcept>

namespace pmgc {

Var encode_window(Tape& tape, Var window, Var w1, Var b1, Var w2, Var b2) {
    (void)tape;
    if (window.value().cols != w1.value().rows)
        throw std::invalid_argument("encode_window: window width " +
                                    std::to_string(window.value().cols) +
                                    " does not match encoder input " +
                                    std::to_string(w1.value().rows));
    Var hidden = relu(row_bias_add(matmul(window, w1), b1));
    return row_bias_add(matmul(hidden, w2), b2);
}

std::vector<Var> split_heads(Var encoded, int k, int d) {
    if (encoded.value().cols != k * d)
        throw std::invalid_argument("split_heads: expected " + std::to_string(k * d) +
                                    " columns, got " + std::to_string(encoded.value().cols));
    std::vector<Var> heads;
    heads.reserve(k);
    for (int i = 0; i < k; ++i) heads.push_back(col_slice(encoded, i * d, (i + 1) * d));
    return heads;
}

Var generate_graph(Tape& tape, Var h) {
    (void)tape;
    return relu(cosine_similarity(h));
}

Var graph_distance(Var a, Var b) {
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument("graph_distance: shape mismatch " + a.value().shape_str() +
                                    " vs " + b.value().shape_str());
    return sum_sq(sub(a, b));
}

Var graph_similarity(Var a, Var b, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("graph_similarity: tau must be positive");
    return exp_elem(scale(graph_distance(a, b), -1.0 / tau));
}

Var cohesion_loss(Tape& tape, Var static_graph, const std::vector<Var>& dynamic, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("cohesion_loss: tau must be positive");
    if (dynamic.empty()) throw std::invalid_argument("cohesion_loss: no dynamic graphs");
    const int k = static_cast<int>(dynamic.size());

    // Log-space similarities: e = -dist/tau. Pairwise distances computed once.
    std::vector<Var> to_static(k);
    for (int i = 0; i < k; ++i)
        to_static[i] = scale(graph_distance(static_graph, dynamic[i]), -1.0 / tau);
    std::vector<std::vector<Var>> pair(k, std::vector<Var>(k));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            pair[i][j] = scale(graph_distance(dynamic[i], dynamic[j]), -1.0 / tau);

    // Per head: -log softmax = logsumexp(e_m) - e_static, with the max-shift
    // so exp never underflows to 0 even for far-apart graphs. The shift is a
    // constant w.r.t. the parameters, so gradients are exact.
    Var total = tape.leaf(Matrix2D(1, 1));
    for (int i = 0; i < k; ++i) {
        std::vector<Var> exponents{to_static[i]};
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            exponents.push_back(i < j ? pair[i][j] : pair[j][i]);
        }
        double shift = exponents[0].value()(0, 0);
        for (const Var& e : exponents) shift = std::max(shift, e.value()(0, 0));
        Var sum = tape.leaf(Matrix2D(1, 1));
        for (const Var& e : exponents) sum = add(sum, exp_elem(add_const(e, -shift)));
        total = add(total, sub(add_const(log_elem(sum), shift), to_static[i]));
    }
    return total;
}

Var cohesion_loss_simple(Tape& tape, Var static_graph, const std::vector<Var>& dynamic) {
    if (dynamic.empty()) throw std::invalid_argument("cohesion_loss_simple: no dynamic graphs");
    Var total = tape.leaf(Matrix2D(1, 1));
    for (const Var& g : dynamic) total = add(total, graph_distance(static_graph, g));
    return total;
}

// --- plain wrappers ---------------------------------------------------------

HeadRepresentations encode_window(const Matrix2D& window, const Matrix2D& w1, const Matrix2D& b1,
                                  const Matrix2D& w2, const Matrix2D& b2, int k) {
    if (w2.cols % k != 0)
        throw std::invalid_argument("encode_window: output width not divisible by k");
    Tape tape;
    Var enc = encode_window(tape, tape.leaf(window), tape.leaf(w1), tape.leaf(b1), tape.leaf(w2),
                            tape.leaf(b2));
    const int d = w2.cols / k;
    HeadRepresentations out;
    for (Var h : split_heads(enc, k, d)) out.heads.push_back(h.value());
    return out;
}

Matrix2D generate_graph(const Matrix2D& h, GraphDiagnostics* diag) {
    Tape tape;
    Var a = generate_graph(tape, tape.leaf(h));
    if (diag) diag->zero_norm_rows += tape.zero_norm_rows();
    return a.value();
}

Matrix2D static_graph(const Matrix2D& xi, GraphDiagnostics* diag) {
    return generate_graph(xi, diag);
}

double graph_distance(const Matrix2D& a, const Matrix2D& b) { return frob_sq_diff(a, b); }

double graph_similarity(const Matrix2D& a, const Matrix2D& b, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("graph_similarity: tau must be positive");
    return std::exp(-frob_sq_diff(a, b) / tau);
}

double cohesion_loss(const GraphSet& graphs, double tau) {
    Tape tape;
    std::vector<Var> dyn;
    for (const Matrix2D& m : graphs.dynamic) dyn.push_back(tape.leaf(m));
    return cohesion_loss(tape, tape.leaf(graphs.static_graph), dyn, tau).value()(0, 0);
}

double cohesion_loss_simple(const GraphSet& graphs) {
    Tape tape;
    std::vector<Var> dyn;
    for (const Matrix2D& m : graphs.dynamic) dyn.push_back(tape.leaf(m));
    return cohesion_loss_simple(tape, tape.leaf(graphs.static_graph), dyn).value()(0, 0);
}

}  // namespace pmgc
