#include "pmgc/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pmgc {

const Matrix2D& Var::value() const { return tape->value_of(id); }
const Matrix2D& Var::grad() const { return tape->grad_of(id); }

Var Tape::leaf(Matrix2D value) { return emit(std::move(value), BackFn{}); }

Var Tape::emit(Matrix2D value, BackFn back) {
    nodes_.push_back(Node{std::move(value), Matrix2D{}, std::move(back)});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var root) {
    if (root.tape != this) throw std::invalid_argument("backward: var from another tape");
    const Matrix2D& rv = nodes_[root.id].value;
    if (rv.rows != 1 || rv.cols != 1)
        throw std::invalid_argument("backward: root must be 1x1, got " + rv.shape_str());
    for (auto& n : nodes_) n.grad = Matrix2D(n.value.rows, n.value.cols);
    nodes_[root.id].grad(0, 0) = 1.0;
    for (int i = root.id; i >= 0; --i) {
        if (nodes_[i].back) nodes_[i].back(*this, nodes_[i].grad);
    }
}

namespace {

Tape& tape_of(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw std::invalid_argument("tape op: operands on different tapes");
    return *a.tape;
}

void accumulate(Tape& t, int id, const Matrix2D& g) {
    Matrix2D& dst = t.grad_of(id);
    for (int i = 0; i < dst.size(); ++i) dst.data[i] += g.data[i];
}

}  // namespace

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.emit(add(a.value(), b.value()), [ia = a.id, ib = b.id](Tape& t, const Matrix2D& g) {
        accumulate(t, ia, g);
        accumulate(t, ib, g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.emit(sub(a.value(), b.value()), [ia = a.id, ib = b.id](Tape& t, const Matrix2D& g) {
        accumulate(t, ia, g);
        Matrix2D& db = t.grad_of(ib);
        for (int i = 0; i < db.size(); ++i) db.data[i] -= g.data[i];
    });
}

Var hadamard(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.emit(hadamard(a.value(), b.value()),
                  [ia = a.id, ib = b.id](Tape& t, const Matrix2D& g) {
                      accumulate(t, ia, hadamard(g, t.value_of(ib)));
                      accumulate(t, ib, hadamard(g, t.value_of(ia)));
                  });
}

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    return t.emit(matmul(a.value(), b.value()), [ia = a.id, ib = b.id](Tape& t, const Matrix2D& g) {
        accumulate(t, ia, matmul(g, transpose(t.value_of(ib))));
        accumulate(t, ib, matmul(transpose(t.value_of(ia)), g));
    });
}

Var transpose(Var a) {
    Tape& t = *a.tape;
    return t.emit(transpose(a.value()),
                  [ia = a.id](Tape& t, const Matrix2D& g) { accumulate(t, ia, transpose(g)); });
}

Var scale(Var a, double c) {
    Tape& t = *a.tape;
    return t.emit(scale(a.value(), c),
                  [ia = a.id, c](Tape& t, const Matrix2D& g) { accumulate(t, ia, scale(g, c)); });
}

Var relu(Var a) {
    Tape& t = *a.tape;
    double gap = std::numeric_limits<double>::infinity();
    for (double v : a.value().data) gap = std::min(gap, std::abs(v));
    t.note_kink_gap(gap);
    return t.emit(relu(a.value()), [ia = a.id](Tape& t, const Matrix2D& g) {
        const Matrix2D& x = t.value_of(ia);
        Matrix2D& dx = t.grad_of(ia);
        for (int i = 0; i < x.size(); ++i)
            if (x.data[i] > 0.0) dx.data[i] += g.data[i];
    });
}

Var row_bias_add(Var x, Var bias) {
    Tape& t = tape_of(x, bias);
    return t.emit(row_bias_add(x.value(), bias.value()),
                  [ix = x.id, ib = bias.id](Tape& t, const Matrix2D& g) {
                      accumulate(t, ix, g);
                      Matrix2D& db = t.grad_of(ib);
                      for (int i = 0; i < g.rows; ++i)
                          for (int j = 0; j < g.cols; ++j) db(0, j) += g(i, j);
                  });
}

Var col_slice(Var a, int c0, int c1) {
    Tape& t = *a.tape;
    return t.emit(col_slice(a.value(), c0, c1), [ia = a.id, c0](Tape& t, const Matrix2D& g) {
        Matrix2D& da = t.grad_of(ia);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) da(i, c0 + j) += g(i, j);
    });
}

Var sum_sq(Var a) {
    Tape& t = *a.tape;
    Matrix2D out(1, 1);
    out(0, 0) = sum_sq(a.value());
    return t.emit(std::move(out), [ia = a.id](Tape& t, const Matrix2D& g) {
        const double gs = 2.0 * g(0, 0);
        const Matrix2D& x = t.value_of(ia);
        Matrix2D& dx = t.grad_of(ia);
        for (int i = 0; i < x.size(); ++i) dx.data[i] += gs * x.data[i];
    });
}

Var mean_sq(Var a) {
    Tape& t = *a.tape;
    const int n = a.value().size();
    if (n == 0) throw std::invalid_argument("mean_sq: empty matrix");
    Matrix2D out(1, 1);
    out(0, 0) = sum_sq(a.value()) / n;
    return t.emit(std::move(out), [ia = a.id, n](Tape& t, const Matrix2D& g) {
        const double gs = 2.0 * g(0, 0) / n;
        const Matrix2D& x = t.value_of(ia);
        Matrix2D& dx = t.grad_of(ia);
        for (int i = 0; i < x.size(); ++i) dx.data[i] += gs * x.data[i];
    });
}

Var exp_elem(Var a) {
    Tape& t = *a.tape;
    Matrix2D out = a.value();
    for (double& v : out.data) v = std::exp(v);
    return t.emit(out, [ia = a.id, out](Tape& t, const Matrix2D& g) {
        accumulate(t, ia, hadamard(g, out));
    });
}

Var log_elem(Var a) {
    Tape& t = *a.tape;
    Matrix2D out = a.value();
    for (double& v : out.data) {
        if (!(v > 0.0)) throw std::invalid_argument("log_elem: non-positive input");
        v = std::log(v);
    }
    return t.emit(std::move(out), [ia = a.id](Tape& t, const Matrix2D& g) {
        const Matrix2D& x = t.value_of(ia);
        Matrix2D& dx = t.grad_of(ia);
        for (int i = 0; i < x.size(); ++i) dx.data[i] += g.data[i] / x.data[i];
    });
}

Var add_const(Var a, double c) {
    Tape& t = *a.tape;
    Matrix2D out = a.value();
    for (double& v : out.data) v += c;
    return t.emit(std::move(out),
                  [ia = a.id](Tape& t, const Matrix2D& g) { accumulate(t, ia, g); });
}

Var cosine_similarity(Var h, double eps) {
    Tape& t = *h.tape;
    const Matrix2D& hv = h.value();
    const int n = hv.rows;
    const int d = hv.cols;

    // Gram matrix and row norms; upper triangle mirrored so the output is
    // symmetric bit-for-bit.
    Matrix2D gram(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < d; ++l) s += hv(i, l) * hv(j, l);
            gram(i, j) = s;
            gram(j, i) = s;
        }
    }
    std::vector<double> norm(n);
    std::int64_t zero_rows = 0;
    for (int i = 0; i < n; ++i) {
        norm[i] = std::sqrt(gram(i, i));
        if (norm[i] < 1e-12) ++zero_rows;
    }
    if (zero_rows > 0) t.count_zero_norm_rows(zero_rows);

    Matrix2D out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = gram(i, j) / (norm[i] * norm[j] + eps);

    return t.emit(std::move(out), [ih = h.id, gram, norm, eps, n](Tape& t, const Matrix2D& g) {
        const Matrix2D& hv = t.value_of(ih);
        const int d = hv.cols;
        Matrix2D& dh = t.grad_of(ih);

        // Numerator path: ghat_ij = g_ij / D_ij, dH += (ghat + ghat^T) H.
        Matrix2D ghat(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ghat(i, j) = g(i, j) / (norm[i] * norm[j] + eps);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double c = ghat(i, j) + ghat(j, i);
                if (c == 0.0) continue;
                for (int l = 0; l < d; ++l) dh(i, l) += c * hv(j, l);
            }
        }

        // Denominator path through the row norms: dA_ij/dn_i =
        // -G_ij n_j / D_ij^2, dn_i/dH_il = H_il / n_i. Skipped for
        // (near-)zero rows, whose entries are all zero anyway.
        for (int i = 0; i < n; ++i) {
            if (norm[i] < 1e-150) continue;
            double dL_dn = 0.0;
            for (int j = 0; j < n; ++j) {
                const double dij = norm[i] * norm[j] + eps;
                dL_dn += -(g(i, j) + g(j, i)) * gram(i, j) * norm[j] / (dij * dij);
            }
            for (int l = 0; l < d; ++l) dh(i, l) += dL_dn * hv(i, l) / norm[i];
        }
    });
}

Var sym_normalize(Var a) {
    Tape& t = *a.tape;
    const Matrix2D& av = a.value();
    if (av.rows != av.cols) throw std::invalid_argument("sym_normalize: matrix not square");
    const int n = av.rows;
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += av(i, j);
        s[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    Matrix2D out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = av(i, j) * s[i] * s[j];

    return t.emit(std::move(out), [ia = a.id, s, n](Tape& t, const Matrix2D& g) {
        const Matrix2D& av = t.value_of(ia);
        Matrix2D& da = t.grad_of(ia);
        // Degrees are row sums, so every entry of row k moves both s_k
        // factors: d out_ij / dA_kl picks up the s_i path at i==k and the
        // s_j path at j==k, each independent of l.
        // r_k = sum_j g_kj A_kj s_j ; c_k = sum_i g_ik A_ik s_i
        std::vector<double> r(n, 0.0), c(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double t1 = g(i, j) * av(i, j);
                r[i] += t1 * s[j];
                c[j] += t1 * s[i];
            }
        // d/dA_kl = g_kl s_k s_l - 0.5 s_k^3 (r_k + c_k)
        for (int k = 0; k < n; ++k) {
            const double row_term = 0.5 * s[k] * s[k] * s[k] * (r[k] + c[k]);
            for (int l = 0; l < n; ++l) da(k, l) += g(k, l) * s[k] * s[l] - row_term;
        }
    });
}

Var clamp01(Var a) {
    Tape& t = *a.tape;
    double gap = std::numeric_limits<double>::infinity();
    Matrix2D out = a.value();
    for (double& v : out.data) {
        gap = std::min(gap, std::min(std::abs(v), std::abs(v - 1.0)));
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    t.note_kink_gap(gap);
    return t.emit(std::move(out), [ia = a.id](Tape& t, const Matrix2D& g) {
        const Matrix2D& x = t.value_of(ia);
        Matrix2D& dx = t.grad_of(ia);
        for (int i = 0; i < x.size(); ++i)
            if (x.data[i] > 0.0 && x.data[i] < 1.0) dx.data[i] += g.data[i];
    });
}

Var symmetrize(Var a) {
    Tape& t = *a.tape;
    const Matrix2D& av = a.value();
    if (av.rows != av.cols) throw std::invalid_argument("symmetrize: matrix not square");
    Matrix2D out(av.rows, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) out(i, j) = 0.5 * (av(i, j) + av(j, i));
    return t.emit(std::move(out), [ia = a.id](Tape& t, const Matrix2D& g) {
        Matrix2D& da = t.grad_of(ia);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) da(i, j) += 0.5 * (g(i, j) + g(j, i));
    });
}

Var mean_of(const std::vector<Var>& vars) {
    if (vars.empty()) throw std::invalid_argument("mean_of: empty list");
    Var acc = vars[0];
    for (size_t i = 1; i < vars.size(); ++i) acc = add(acc, vars[i]);
    return scale(acc, 1.0 / static_cast<double>(vars.size()));
}

}  // namespace pmgc
