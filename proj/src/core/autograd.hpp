#ifndef __AUTOGRAD_HPP__
#define __AUTOGRAD_HPP__

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "mathops.hpp"

namespace anic::ag {

using anic::TensorT;

// tape-based reverse mode. a Graph owns one forward pass worth of nodes; ops
// append nodes whose backward closures accumulate into parent grads. scalar
// type S is float for training, double for finite-difference checks. token
// tensors are [rows, D]; per-sequence modulation vectors are single-row.
template <class S>
struct Node {
    TensorT<S> owned;
    const TensorT<S>* external = nullptr;  // set for borrowing leaves
    TensorT<S> grad;
    bool requires_grad = false;
    bool grad_live = false;
    std::function<void()> backward;

    const TensorT<S>& val() const { return external ? *external : owned; }
    int64_t numel() const { return val().numel(); }
    int64_t dim(int64_t i) const { return val().dim(i); }
};

template <class S>
class Graph {
public:
    Node<S>* leaf(TensorT<S> v, bool requires_grad = false) {
        Node<S>* n = alloc();
        n->owned = std::move(v);
        n->requires_grad = requires_grad;
        return n;
    }
    // borrow an external tensor (e.g. a parameter) without copying
    Node<S>* leaf_ref(const TensorT<S>* v, bool requires_grad) {
        Node<S>* n = alloc();
        n->external = v;
        n->requires_grad = requires_grad;
        return n;
    }
    Node<S>* make(TensorT<S> v, bool requires_grad) {
        Node<S>* n = alloc();
        n->owned = std::move(v);
        n->requires_grad = requires_grad;
        return n;
    }

    TensorT<S>& grad_of(Node<S>* n) {
        if (!n->grad_live) {
            n->grad = TensorT<S>(n->val().shape);
            n->grad_live = true;
        }
        return n->grad;
    }

    void backward_from(Node<S>* loss) {
        if (loss->numel() != 1) throw invalid_arg_error("backward_from: loss must be scalar");
        grad_of(loss)[0] = S(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node<S>* n = it->get();
            if (n->grad_live && n->backward) n->backward();
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    Node<S>* alloc() {
        nodes_.push_back(std::make_unique<Node<S>>());
        return nodes_.back().get();
    }
    std::vector<std::unique_ptr<Node<S>>> nodes_;
};

// ---- elementwise ----

template <class S>
Node<S>* add(Graph<S>& g, Node<S>* a, Node<S>* b) {
    if (!a->val().same_shape(b->val())) throw invalid_arg_error("add: shape mismatch");
    TensorT<S> out(a->val().shape);
    for (int64_t i = 0; i < out.numel(); i++) out[i] = a->val()[i] + b->val()[i];
    Node<S>* n = g.make(std::move(out), a->requires_grad || b->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, a, b] {
            if (a->requires_grad) {
                auto& ga = g.grad_of(a);
                for (int64_t i = 0; i < ga.numel(); i++) ga[i] += n->grad[i];
            }
            if (b->requires_grad) {
                auto& gb = g.grad_of(b);
                for (int64_t i = 0; i < gb.numel(); i++) gb[i] += n->grad[i];
            }
        };
    return n;
}

template <class S>
Node<S>* scale(Graph<S>& g, Node<S>* a, S c) {
    TensorT<S> out(a->val().shape);
    for (int64_t i = 0; i < out.numel(); i++) out[i] = a->val()[i] * c;
    Node<S>* n = g.make(std::move(out), a->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, a, c] {
            auto& ga = g.grad_of(a);
            for (int64_t i = 0; i < ga.numel(); i++) ga[i] += n->grad[i] * c;
        };
    return n;
}

template <class S>
Node<S>* silu(Graph<S>& g, Node<S>* a) {
    TensorT<S> out(a->val().shape);
    for (int64_t i = 0; i < out.numel(); i++) {
        S x = a->val()[i];
        out[i] = x / (S(1) + std::exp(-x));
    }
    Node<S>* n = g.make(std::move(out), a->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, a] {
            auto& ga = g.grad_of(a);
            for (int64_t i = 0; i < ga.numel(); i++) {
                S x = a->val()[i];
                S sg = S(1) / (S(1) + std::exp(-x));
                ga[i] += n->grad[i] * sg * (S(1) + x * (S(1) - sg));
            }
        };
    return n;
}

// ---- linear algebra ----

// x: [..., Din] flattened to rows; W: [Din, Dout]; optional bias [Dout]
template <class S>
Node<S>* linear(Graph<S>& g, Node<S>* x, Node<S>* W, Node<S>* b = nullptr) {
    int64_t din = W->dim(0), dout = W->dim(1);
    if (x->val().ndim() < 1 || x->val().shape.back() != din)
        throw invalid_arg_error("linear: input width mismatch");
    int64_t rows = x->numel() / din;
    std::vector<int64_t> oshape = x->val().shape;
    oshape.back() = dout;
    TensorT<S> out(oshape);
    gemm<S>(false, false, rows, dout, din, S(1), x->val().ptr(), W->val().ptr(), S(0), out.ptr());
    if (b) {
        if (b->numel() != dout) throw invalid_arg_error("linear: bias width mismatch");
        for (int64_t r = 0; r < rows; r++)
            for (int64_t c = 0; c < dout; c++) out[r * dout + c] += b->val()[c];
    }
    bool req = x->requires_grad || W->requires_grad || (b && b->requires_grad);
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, x, W, b, rows, din, dout] {
            if (x->requires_grad)
                gemm<S>(false, true, rows, din, dout, S(1), n->grad.ptr(), W->val().ptr(), S(1),
                        g.grad_of(x).ptr());
            if (W->requires_grad)
                gemm<S>(true, false, din, dout, rows, S(1), x->val().ptr(), n->grad.ptr(), S(1),
                        g.grad_of(W).ptr());
            if (b && b->requires_grad) {
                auto& gb = g.grad_of(b);
                for (int64_t r = 0; r < rows; r++)
                    for (int64_t c = 0; c < dout; c++) gb[c] += n->grad[r * dout + c];
            }
        };
    return n;
}

// layer norm over the last dim, no affine
template <class S>
Node<S>* layernorm(Graph<S>& g, Node<S>* x, S eps = S(1e-6)) {
    int64_t D = x->val().shape.back();
    int64_t rows = x->numel() / D;
    TensorT<S> out(x->val().shape);
    TensorT<S> inv_std({rows}), mean({rows});
    for (int64_t r = 0; r < rows; r++) {
        const S* xp = x->val().ptr() + r * D;
        S mu = S(0);
        for (int64_t i = 0; i < D; i++) mu += xp[i];
        mu /= (S)D;
        S var = S(0);
        for (int64_t i = 0; i < D; i++) var += (xp[i] - mu) * (xp[i] - mu);
        var /= (S)D;
        S is = S(1) / std::sqrt(var + eps);
        mean[r] = mu;
        inv_std[r] = is;
        S* op = out.ptr() + r * D;
        for (int64_t i = 0; i < D; i++) op[i] = (xp[i] - mu) * is;
    }
    Node<S>* n = g.make(std::move(out), x->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, x, rows, D, mean = std::move(mean), inv_std = std::move(inv_std)] {
            auto& gx = g.grad_of(x);
            for (int64_t r = 0; r < rows; r++) {
                const S* xp = x->val().ptr() + r * D;
                const S* dy = n->grad.ptr() + r * D;
                S is = inv_std[r], mu = mean[r];
                S sum_dy = S(0), sum_dy_xhat = S(0);
                for (int64_t i = 0; i < D; i++) {
                    S xh = (xp[i] - mu) * is;
                    sum_dy += dy[i];
                    sum_dy_xhat += dy[i] * xh;
                }
                S* gp = gx.ptr() + r * D;
                for (int64_t i = 0; i < D; i++) {
                    S xh = (xp[i] - mu) * is;
                    gp[i] += is * (dy[i] - sum_dy / (S)D - xh * sum_dy_xhat / (S)D);
                }
            }
        };
    return n;
}

// ---- sequence-broadcast ops (modulation vectors are single-row [*,D]) ----

// y[r,:] = x[r,:]·(1+scale) + shift
template <class S>
Node<S>* modulate_rows(Graph<S>& g, Node<S>* x, Node<S>* sc, Node<S>* sh) {
    int64_t D = x->val().shape.back();
    if (sc->numel() != D || sh->numel() != D)
        throw invalid_arg_error("modulate_rows: bad scale/shift width");
    int64_t rows = x->numel() / D;
    TensorT<S> out(x->val().shape);
    for (int64_t r = 0; r < rows; r++)
        for (int64_t d = 0; d < D; d++)
            out[r * D + d] = x->val()[r * D + d] * (S(1) + sc->val()[d]) + sh->val()[d];
    bool req = x->requires_grad || sc->requires_grad || sh->requires_grad;
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, x, sc, sh, rows, D] {
            for (int64_t r = 0; r < rows; r++)
                for (int64_t d = 0; d < D; d++) {
                    S dy = n->grad[r * D + d];
                    if (x->requires_grad)
                        g.grad_of(x)[r * D + d] += dy * (S(1) + sc->val()[d]);
                    if (sc->requires_grad) g.grad_of(sc)[d] += dy * x->val()[r * D + d];
                    if (sh->requires_grad) g.grad_of(sh)[d] += dy;
                }
        };
    return n;
}

// y = h + gate·branch (gate single-row)
template <class S>
Node<S>* gate_add(Graph<S>& g, Node<S>* h, Node<S>* branch, Node<S>* gate) {
    int64_t D = h->val().shape.back();
    if (!h->val().same_shape(branch->val()) || gate->numel() != D)
        throw invalid_arg_error("gate_add: shape mismatch");
    int64_t rows = h->numel() / D;
    TensorT<S> out(h->val().shape);
    for (int64_t r = 0; r < rows; r++)
        for (int64_t d = 0; d < D; d++)
            out[r * D + d] = h->val()[r * D + d] + gate->val()[d] * branch->val()[r * D + d];
    bool req = h->requires_grad || branch->requires_grad || gate->requires_grad;
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, h, branch, gate, rows, D] {
            if (h->requires_grad) {
                auto& gh = g.grad_of(h);
                for (int64_t i = 0; i < gh.numel(); i++) gh[i] += n->grad[i];
            }
            for (int64_t r = 0; r < rows; r++)
                for (int64_t d = 0; d < D; d++) {
                    S dy = n->grad[r * D + d];
                    if (branch->requires_grad)
                        g.grad_of(branch)[r * D + d] += dy * gate->val()[d];
                    if (gate->requires_grad)
                        g.grad_of(gate)[d] += dy * branch->val()[r * D + d];
                }
        };
    return n;
}

// y[r,:] = x[r,:] + gate·vec (vec and gate single-row; the one-token
// cross-attention read broadcast over all tokens)
template <class S>
Node<S>* gate_add_vec(Graph<S>& g, Node<S>* x, Node<S>* vec, Node<S>* gate) {
    int64_t D = x->val().shape.back();
    if (vec->numel() != D || gate->numel() != D)
        throw invalid_arg_error("gate_add_vec: width mismatch");
    int64_t rows = x->numel() / D;
    TensorT<S> out(x->val().shape);
    for (int64_t r = 0; r < rows; r++)
        for (int64_t d = 0; d < D; d++)
            out[r * D + d] = x->val()[r * D + d] + gate->val()[d] * vec->val()[d];
    bool req = x->requires_grad || vec->requires_grad || gate->requires_grad;
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, x, vec, gate, rows, D] {
            if (x->requires_grad) {
                auto& gx = g.grad_of(x);
                for (int64_t i = 0; i < gx.numel(); i++) gx[i] += n->grad[i];
            }
            if (vec->requires_grad || gate->requires_grad)
                for (int64_t d = 0; d < D; d++) {
                    S col = S(0);
                    for (int64_t r = 0; r < rows; r++) col += n->grad[r * D + d];
                    if (vec->requires_grad) g.grad_of(vec)[d] += col * gate->val()[d];
                    if (gate->requires_grad) g.grad_of(gate)[d] += col * vec->val()[d];
                }
        };
    return n;
}

// x + constant table (no grad through c)
template <class S>
Node<S>* add_const(Graph<S>& g, Node<S>* x, const TensorT<S>& c) {
    if (x->numel() != c.numel()) throw invalid_arg_error("add_const: shape mismatch");
    TensorT<S> out(x->val().shape);
    for (int64_t i = 0; i < out.numel(); i++) out[i] = x->val()[i] + c[i];
    Node<S>* n = g.make(std::move(out), x->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, x] {
            auto& gx = g.grad_of(x);
            for (int64_t i = 0; i < gx.numel(); i++) gx[i] += n->grad[i];
        };
    return n;
}

// columns [off, off+len) of the last dim
template <class S>
Node<S>* slice_cols(Graph<S>& g, Node<S>* x, int64_t off, int64_t len) {
    int64_t D = x->val().shape.back();
    if (off < 0 || len < 1 || off + len > D) throw invalid_arg_error("slice_cols: out of range");
    int64_t rows = x->numel() / D;
    std::vector<int64_t> oshape = x->val().shape;
    oshape.back() = len;
    TensorT<S> out(oshape);
    for (int64_t r = 0; r < rows; r++)
        for (int64_t i = 0; i < len; i++) out[r * len + i] = x->val()[r * D + off + i];
    Node<S>* n = g.make(std::move(out), x->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, x, off, len, rows, D] {
            auto& gx = g.grad_of(x);
            for (int64_t r = 0; r < rows; r++)
                for (int64_t i = 0; i < len; i++) gx[r * D + off + i] += n->grad[r * len + i];
        };
    return n;
}

// ---- attention ----

// multi-head softmax(q·kᵀ/√dh)·v; q [N,D], k,v [M,D]; probabilities kept for
// the backward pass
template <class S>
Node<S>* attention(Graph<S>& g, Node<S>* q, Node<S>* k, Node<S>* v, int64_t heads) {
    if (q->val().ndim() != 2 || k->val().ndim() != 2 || v->val().ndim() != 2)
        throw invalid_arg_error("attention: expects rank-2 inputs");
    int64_t N = q->dim(0), D = q->val().shape.back();
    int64_t M = k->dim(0);
    if (k->val().shape.back() != D || !k->val().same_shape(v->val()))
        throw invalid_arg_error("attention: k/v shape mismatch");
    if (D % heads != 0) throw invalid_arg_error("attention: heads must divide width");
    int64_t dh = D / heads;
    S inv_sqrt = S(1) / std::sqrt((S)dh);

    auto probs = std::make_shared<TensorT<S>>(std::vector<int64_t>{heads, N, M});
    TensorT<S> out({N, D});
    TensorT<S> scores({N, M});
    for (int64_t h = 0; h < heads; h++) {
        const S* qh = q->val().ptr() + h * dh;
        const S* kh = k->val().ptr() + h * dh;
        const S* vh = v->val().ptr() + h * dh;
        gemm_ld<S>(false, true, N, M, dh, inv_sqrt, qh, D, kh, D, S(0), scores.ptr(), M);
        S* ph = probs->ptr() + h * N * M;
        for (int64_t r = 0; r < N; r++) {
            S* srow = scores.ptr() + r * M;
            S mx = srow[0];
            for (int64_t c = 1; c < M; c++) mx = std::max(mx, srow[c]);
            S sum = S(0);
            for (int64_t c = 0; c < M; c++) {
                S e = std::exp(srow[c] - mx);
                ph[r * M + c] = e;
                sum += e;
            }
            S inv = S(1) / sum;
            for (int64_t c = 0; c < M; c++) ph[r * M + c] *= inv;
        }
        gemm_ld<S>(false, false, N, dh, M, S(1), ph, M, vh, D, S(0), out.ptr() + h * dh, D);
    }
    bool req = q->requires_grad || k->requires_grad || v->requires_grad;
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, q, k, v, heads, N, M, dh, D, inv_sqrt, probs] {
            TensorT<S> dP({N, M}), dS({N, M});
            for (int64_t h = 0; h < heads; h++) {
                const S* ph = probs->ptr() + h * N * M;
                const S* dyh = n->grad.ptr() + h * dh;
                const S* qh = q->val().ptr() + h * dh;
                const S* kh = k->val().ptr() + h * dh;
                const S* vh = v->val().ptr() + h * dh;
                if (v->requires_grad)
                    gemm_ld<S>(true, false, M, dh, N, S(1), ph, M, dyh, D, S(1),
                               g.grad_of(v).ptr() + h * dh, D);
                if (!q->requires_grad && !k->requires_grad) continue;
                gemm_ld<S>(false, true, N, M, dh, S(1), dyh, D, vh, D, S(0), dP.ptr(), M);
                for (int64_t r = 0; r < N; r++) {
                    S dot = S(0);
                    for (int64_t c = 0; c < M; c++) dot += dP[r * M + c] * ph[r * M + c];
                    for (int64_t c = 0; c < M; c++)
                        dS[r * M + c] = ph[r * M + c] * (dP[r * M + c] - dot);
                }
                if (q->requires_grad)
                    gemm_ld<S>(false, false, N, dh, M, inv_sqrt, dS.ptr(), M, kh, D, S(1),
                               g.grad_of(q).ptr() + h * dh, D);
                if (k->requires_grad)
                    gemm_ld<S>(true, false, M, dh, N, inv_sqrt, dS.ptr(), M, qh, D, S(1),
                               g.grad_of(k).ptr() + h * dh, D);
            }
        };
    return n;
}

// ---- 3D convolution (towers) ----

// x [Cin,T,H,W], W [Cout,Cin,kt,kh,kw], bias [Cout] optional. temporal padding
// replicates frame 0 (kt−1 front, causal); spatial padding is zero, (k−1)/2
// per side (odd kernels). output dims: floor((in−1)/stride)+1.
template <class S>
Node<S>* conv3d(Graph<S>& g, Node<S>* x, Node<S>* W, Node<S>* b, int64_t st, int64_t sh,
                int64_t sw) {
    if (x->val().ndim() != 4 || W->val().ndim() != 5)
        throw invalid_arg_error("conv3d: bad ranks");
    int64_t Cin = x->dim(0), T = x->dim(1), H = x->dim(2), Wd = x->dim(3);
    int64_t Cout = W->dim(0), kt = W->dim(2), kh = W->dim(3), kw = W->dim(4);
    if (W->dim(1) != Cin) throw invalid_arg_error("conv3d: channel mismatch");
    if (kh % 2 == 0 || kw % 2 == 0) throw invalid_arg_error("conv3d: spatial kernels must be odd");
    if (st < 1 || sh < 1 || sw < 1) throw invalid_arg_error("conv3d: bad stride");
    int64_t To = (T - 1) / st + 1, Ho = (H - 1) / sh + 1, Wo = (Wd - 1) / sw + 1;
    int64_t ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    int64_t K = Cin * kt * kh * kw, Np = To * Ho * Wo;

    auto col = std::make_shared<TensorT<S>>(std::vector<int64_t>{Np, K});
    {
        S* cp = col->ptr();
        for (int64_t to = 0; to < To; to++)
            for (int64_t yo = 0; yo < Ho; yo++)
                for (int64_t xo = 0; xo < Wo; xo++) {
                    S* row = cp + ((to * Ho + yo) * Wo + xo) * K;
                    for (int64_t ci = 0; ci < Cin; ci++)
                        for (int64_t dt = 0; dt < kt; dt++) {
                            int64_t ti = to * st + dt - (kt - 1);
                            if (ti < 0) ti = 0;  // replicate front
                            for (int64_t dy = 0; dy < kh; dy++) {
                                int64_t yi = yo * sh + dy - ph;
                                for (int64_t dx = 0; dx < kw; dx++) {
                                    int64_t xi = xo * sw + dx - pw;
                                    S val = S(0);
                                    if (yi >= 0 && yi < H && xi >= 0 && xi < Wd)
                                        val = x->val()[((ci * T + ti) * H + yi) * Wd + xi];
                                    *row++ = val;
                                }
                            }
                        }
                }
    }
    TensorT<S> out({Cout, To, Ho, Wo});
    gemm<S>(false, true, Cout, Np, K, S(1), W->val().ptr(), col->ptr(), S(0), out.ptr());
    if (b) {
        if (b->numel() != Cout) throw invalid_arg_error("conv3d: bias width mismatch");
        for (int64_t co = 0; co < Cout; co++) {
            S* op = out.ptr() + co * Np;
            for (int64_t i = 0; i < Np; i++) op[i] += b->val()[co];
        }
    }
    bool req = x->requires_grad || W->requires_grad || (b && b->requires_grad);
    Node<S>* n = g.make(std::move(out), req);
    if (req)
        n->backward = [&g, n, x, W, b, col, st, sh, sw, Cin, T, H, Wd, Cout, kt, kh, kw, To, Ho,
                       Wo, ph, pw, K, Np] {
            if (W->requires_grad)
                gemm<S>(false, false, Cout, K, Np, S(1), n->grad.ptr(), col->ptr(), S(1),
                        g.grad_of(W).ptr());
            if (b && b->requires_grad) {
                auto& gb = g.grad_of(b);
                for (int64_t co = 0; co < Cout; co++) {
                    const S* dp = n->grad.ptr() + co * Np;
                    S acc = S(0);
                    for (int64_t i = 0; i < Np; i++) acc += dp[i];
                    gb[co] += acc;
                }
            }
            if (x->requires_grad) {
                TensorT<S> dcol({Np, K});
                gemm<S>(true, false, Np, K, Cout, S(1), n->grad.ptr(), W->val().ptr(), S(0),
                        dcol.ptr());
                auto& gx = g.grad_of(x);
                const S* cp = dcol.ptr();
                for (int64_t to = 0; to < To; to++)
                    for (int64_t yo = 0; yo < Ho; yo++)
                        for (int64_t xo = 0; xo < Wo; xo++) {
                            const S* row = cp + ((to * Ho + yo) * Wo + xo) * K;
                            for (int64_t ci = 0; ci < Cin; ci++)
                                for (int64_t dt = 0; dt < kt; dt++) {
                                    int64_t ti = to * st + dt - (kt - 1);
                                    if (ti < 0) ti = 0;
                                    for (int64_t dy = 0; dy < kh; dy++) {
                                        int64_t yi = yo * sh + dy - ph;
                                        for (int64_t dx = 0; dx < kw; dx++) {
                                            int64_t xi = xo * sw + dx - pw;
                                            S d = *row++;
                                            if (yi >= 0 && yi < H && xi >= 0 && xi < Wd)
                                                gx[((ci * T + ti) * H + yi) * Wd + xi] += d;
                                        }
                                    }
                                }
                        }
            }
        };
    return n;
}

// ---- token grid <-> latent grid ----

// [C,T,h,w] -> [T·(h/p)·(w/p), C·p·p], t-major then row then column
template <class S>
TensorT<S> patchify_tensor(const TensorT<S>& x, int64_t p) {
    if (x.ndim() != 4) throw invalid_arg_error("patchify: expects [C,T,h,w]");
    int64_t C = x.dim(0), T = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (p < 1 || h % p != 0 || w % p != 0)
        throw invalid_arg_error("patchify: grid not divisible by patch");
    int64_t hp = h / p, wp = w / p, Dk = C * p * p;
    TensorT<S> out({T * hp * wp, Dk});
    for (int64_t c = 0; c < C; c++)
        for (int64_t t = 0; t < T; t++)
            for (int64_t y = 0; y < h; y++)
                for (int64_t xq = 0; xq < w; xq++) {
                    int64_t tok = (t * hp + y / p) * wp + xq / p;
                    int64_t d = (c * p + y % p) * p + xq % p;
                    out[tok * Dk + d] = x[((c * T + t) * h + y) * w + xq];
                }
    return out;
}

template <class S>
TensorT<S> unpatchify_tensor(const TensorT<S>& tok, int64_t C, int64_t T, int64_t h, int64_t w,
                             int64_t p) {
    if (tok.ndim() != 2 || tok.dim(0) != T * (h / p) * (w / p) || tok.dim(1) != C * p * p)
        throw invalid_arg_error("unpatchify: token grid mismatch");
    int64_t hp = h / p, wp = w / p, Dk = C * p * p;
    TensorT<S> out({C, T, h, w});
    for (int64_t c = 0; c < C; c++)
        for (int64_t t = 0; t < T; t++)
            for (int64_t y = 0; y < h; y++)
                for (int64_t xq = 0; xq < w; xq++) {
                    int64_t toki = (t * hp + y / p) * wp + xq / p;
                    int64_t d = (c * p + y % p) * p + xq % p;
                    out[((c * T + t) * h + y) * w + xq] = tok[toki * Dk + d];
                }
    return out;
}

template <class S>
Node<S>* patchify(Graph<S>& g, Node<S>* x, int64_t p) {
    TensorT<S> out = patchify_tensor(x->val(), p);
    int64_t C = x->dim(0), T = x->dim(1), h = x->dim(2), w = x->dim(3);
    Node<S>* n = g.make(std::move(out), x->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, x, C, T, h, w, p] {
            TensorT<S> dgrid = unpatchify_tensor(n->grad, C, T, h, w, p);
            auto& gx = g.grad_of(x);
            for (int64_t i = 0; i < gx.numel(); i++) gx[i] += dgrid[i];
        };
    return n;
}

template <class S>
Node<S>* unpatchify(Graph<S>& g, Node<S>* tok, int64_t C, int64_t T, int64_t h, int64_t w,
                    int64_t p) {
    TensorT<S> out = unpatchify_tensor(tok->val(), C, T, h, w, p);
    Node<S>* n = g.make(std::move(out), tok->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, tok, p] {
            TensorT<S> dtok = patchify_tensor(n->grad, p);
            auto& gt = g.grad_of(tok);
            for (int64_t i = 0; i < gt.numel(); i++) gt[i] += dtok[i];
        };
    return n;
}

// ---- losses ----

// mean of w·(pred−target)² / mean(w); uniform when no weight given. target
// and weight are plain tensors and must outlive the graph.
template <class S>
Node<S>* weighted_mse(Graph<S>& g, Node<S>* pred, const TensorT<S>& target,
                      const TensorT<S>* weight = nullptr) {
    if (!pred->val().same_shape(target)) throw invalid_arg_error("weighted_mse: shape mismatch");
    int64_t n_el = pred->numel();
    double wsum = 0.0;
    if (weight) {
        if (weight->numel() != n_el) throw invalid_arg_error("weighted_mse: weight shape mismatch");
        for (int64_t i = 0; i < n_el; i++) wsum += (double)(*weight)[i];
        if (wsum <= 0.0) throw invalid_arg_error("weighted_mse: weights sum to zero");
    } else {
        wsum = (double)n_el;
    }
    double acc = 0.0;
    for (int64_t i = 0; i < n_el; i++) {
        double d = (double)pred->val()[i] - (double)target[i];
        double w = weight ? (double)(*weight)[i] : 1.0;
        acc += w * d * d;
    }
    TensorT<S> out({1});
    out[0] = (S)(acc / wsum);
    Node<S>* n = g.make(std::move(out), pred->requires_grad);
    if (n->requires_grad)
        n->backward = [&g, n, pred, &target, weight, wsum, n_el] {
            auto& gp = g.grad_of(pred);
            S dy = n->grad[0];
            for (int64_t i = 0; i < n_el; i++) {
                S w = weight ? (*weight)[i] : S(1);
                gp[i] += dy * S(2) * w * (pred->val()[i] - target[i]) / (S)wsum;
            }
        };
    return n;
}

}  // namespace anic::ag

#endif  // __AUTOGRAD_HPP__
