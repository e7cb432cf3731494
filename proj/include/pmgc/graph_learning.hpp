#pragma once

#include <cstdint>
#include <vector>

#include "pmgc/autodiff.hpp"
#include "pmgc/matrix.hpp"

namespace pmgc {

// k per-window head representations, each N x d.
struct HeadRepresentations {
    std::vector<Matrix2D> heads;
};

// k dynamic adjacencies plus the static adjacency for one window. All
// matrices are N x N, symmetric, entries in [0,1], diagonal ~1 for rows
// generated from a nonzero embedding.
struct GraphSet {
    std::vector<Matrix2D> dynamic;
    Matrix2D static_graph;
};

struct GraphDiagnostics {
    std::int64_t zero_norm_rows = 0;
};

// --- tape-side builders (differentiable path) -------------------------------

// Two-layer shared-weight row-wise encoder: relu(X W1 + b1) W2 + b2.
// X is N x w, output N x (k*d).
Var encode_window(Tape& tape, Var window, Var w1, Var b1, Var w2, Var b2);

// Contiguous column blocks of width d.
std::vector<Var> split_heads(Var encoded, int k, int d);

// ReLU(pairwise cosine similarity of rows); the dynamic/static graph
// generator f_gen.
Var generate_graph(Tape& tape, Var h);

Var graph_distance(Var a, Var b);                 // ||a-b||_F^2
Var graph_similarity(Var a, Var b, double tau);   // exp(-dist/tau)

// Contrastive cohesion loss: sum_i -log h(As,Ai) / (h(As,Ai) + sum_{j!=i} h(Ai,Aj)).
// k = 1 degenerates to -log(1) = 0 by the empty-sum convention.
Var cohesion_loss(Tape& tape, Var static_graph, const std::vector<Var>& dynamic, double tau);

// Simplified variant: sum_i dist(As, Ai).
Var cohesion_loss_simple(Tape& tape, Var static_graph, const std::vector<Var>& dynamic);

// --- plain wrappers (evaluate the tape ops on constants) --------------------

HeadRepresentations encode_window(const Matrix2D& window, const Matrix2D& w1, const Matrix2D& b1,
                                  const Matrix2D& w2, const Matrix2D& b2, int k);
Matrix2D generate_graph(const Matrix2D& h, GraphDiagnostics* diag = nullptr);
Matrix2D static_graph(const Matrix2D& xi, GraphDiagnostics* diag = nullptr);
double graph_distance(const Matrix2D& a, const Matrix2D& b);
double graph_similarity(const Matrix2D& a, const Matrix2D& b, double tau);
double cohesion_loss(const GraphSet& graphs, double tau);
double cohesion_loss_simple(const GraphSet& graphs);

}  // namespace pmgc
