#include "relievo/tape.hpp"

#include <cmath>

#include "relievo/kernels.hpp"

namespace relievo {

namespace {

inline real softplus_fwd(real z, real beta) {
    const real bz = beta * z;
    if (bz > real(30)) return z;
    return std::log1p(std::exp(bz)) / beta;
}

inline real sigmoid_fwd(real z) {
    if (z >= 0) {
        const real e = std::exp(-z);
        return 1 / (1 + e);
    }
    const real e = std::exp(z);
    return e / (1 + e);
}

}  // namespace

int Tape::push(Op op, Mat val) {
    ops_.push_back(op);
    vals_.push_back(std::move(val));
    return static_cast<int>(ops_.size()) - 1;
}

Mat& Tape::grad_buf(int id) {
    Mat& g = grads_[id];
    if (g.rows != vals_[id].rows || g.cols != vals_[id].cols)
        g = Mat(vals_[id].rows, vals_[id].cols);
    return g;
}

const Mat& Tape::grad(int id) const {
    static const Mat empty;
    const Mat& g = grads_.at(id);
    if (g.rows == 0 && vals_[id].rows != 0) return empty;
    return g;
}

real Tape::scalar(int id) const {
    const Mat& m = vals_.at(id);
    if (m.rows != 1 || m.cols != 1) throw std::runtime_error("node is not scalar");
    return m.a[0];
}

int Tape::constant(Mat m) { return push({Kind::Const}, std::move(m)); }

int Tape::linear(int x, int w, int bias) {
    const Mat& X = in(x);
    const auto& W = (*params_)[w];
    if (X.cols != W.cols)
        throw std::runtime_error("linear: input dim " + std::to_string(X.cols) +
                                 " != weight in-dim " + std::to_string(W.cols));
    const real* bptr = nullptr;
    if (bias >= 0) {
        const auto& B = (*params_)[bias];
        if (static_cast<int>(B.size()) != W.rows)
            throw std::runtime_error("linear: bias size mismatch");
        bptr = B.v.data();
    }
    Mat Y(X.rows, W.rows);
    kern::active().gemm_nt(X.data(), X.rows, X.cols, W.v.data(), W.rows, Y.data(), bptr);
    Op op{Kind::Linear};
    op.a = x;
    op.w = w;
    op.bias = bias;
    return push(op, std::move(Y));
}

int Tape::softplus(int x, real beta) {
    const Mat& X = in(x);
    Mat Y(X.rows, X.cols);
    for (size_t i = 0; i < X.size(); ++i) Y.a[i] = softplus_fwd(X.a[i], beta);
    Op op{Kind::Softplus};
    op.a = x;
    op.c0 = beta;
    return push(op, std::move(Y));
}

int Tape::softplus_deriv(int x, real beta) {
    const Mat& X = in(x);
    Mat Y(X.rows, X.cols);
    for (size_t i = 0; i < X.size(); ++i) Y.a[i] = sigmoid_fwd(beta * X.a[i]);
    Op op{Kind::SoftplusDeriv};
    op.a = x;
    op.c0 = beta;
    return push(op, std::move(Y));
}

int Tape::relu(int x) {
    const Mat& X = in(x);
    Mat Y(X.rows, X.cols);
    for (size_t i = 0; i < X.size(); ++i) Y.a[i] = X.a[i] > 0 ? X.a[i] : 0;
    Op op{Kind::Relu};
    op.a = x;
    return push(op, std::move(Y));
}

int Tape::tanh_(int x) {
    const Mat& X = in(x);
    Mat Y(X.rows, X.cols);
    for (size_t i = 0; i < X.size(); ++i) Y.a[i] = std::tanh(X.a[i]);
    Op op{Kind::Tanh};
    op.a = x;
    return push(op, std::move(Y));
}

int Tape::sigmoid(int x) {
    const Mat& X = in(x);
    Mat Y(X.rows, X.cols);
    for (size_t i = 0; i < X.size(); ++i) Y.a[i] = sigmoid_fwd(X.a[i]);
    Op op{Kind::Sigmoid};
    op.a = x;
    return push(op, std::move(Y));
}

int Tape::mul(int a, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (!A.same_shape(B)) throw std::runtime_error("mul: shape mismatch");
    Mat Y(A.rows, A.cols);
    kern::active().mul_ew(static_cast<int>(A.size()), A.data(), B.data(), Y.data());
    Op op{Kind::Mul};
    op.a = a;
    op.b = b;
    return push(op, std::move(Y));
}

int Tape::add(int a, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (!A.same_shape(B)) throw std::runtime_error("add: shape mismatch");
    Mat Y = A;
    kern::active().axpy(static_cast<int>(A.size()), 1, B.data(), Y.data());
    Op op{Kind::Add};
    op.a = a;
    op.b = b;
    return push(op, std::move(Y));
}

int Tape::sub(int a, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (!A.same_shape(B)) throw std::runtime_error("sub: shape mismatch");
    Mat Y = A;
    kern::active().axpy(static_cast<int>(A.size()), -1, B.data(), Y.data());
    Op op{Kind::Sub};
    op.a = a;
    op.b = b;
    return push(op, std::move(Y));
}

int Tape::affine(int a, real scale, real shift) {
    const Mat& A = in(a);
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = scale * A.a[i] + shift;
    Op op{Kind::Affine};
    op.a = a;
    op.c0 = scale;
    op.c1 = shift;
    return push(op, std::move(Y));
}

int Tape::axpby(real ca, int a, real cb, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (!A.same_shape(B)) throw std::runtime_error("axpby: shape mismatch");
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = ca * A.a[i] + cb * B.a[i];
    Op op{Kind::Axpby};
    op.a = a;
    op.b = b;
    op.c0 = ca;
    op.c1 = cb;
    return push(op, std::move(Y));
}

int Tape::concat(int a, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (A.rows != B.rows) throw std::runtime_error("concat: row mismatch");
    Mat Y(A.rows, A.cols + B.cols);
    for (int r = 0; r < A.rows; ++r) {
        std::copy(A.row(r), A.row(r) + A.cols, Y.row(r));
        std::copy(B.row(r), B.row(r) + B.cols, Y.row(r) + A.cols);
    }
    Op op{Kind::Concat};
    op.a = a;
    op.b = b;
    return push(op, std::move(Y));
}

int Tape::slice_cols(int a, int begin, int len) {
    const Mat& A = in(a);
    if (begin < 0 || begin + len > A.cols) throw std::runtime_error("slice_cols: out of range");
    Mat Y(A.rows, len);
    for (int r = 0; r < A.rows; ++r)
        std::copy(A.row(r) + begin, A.row(r) + begin + len, Y.row(r));
    Op op{Kind::SliceCols};
    op.a = a;
    op.i0 = begin;
    op.i1 = len;
    return push(op, std::move(Y));
}

int Tape::row_norm(int a) {
    const Mat& A = in(a);
    Mat Y(A.rows, 1);
    for (int r = 0; r < A.rows; ++r)
        Y.a[r] = std::sqrt(kern::active().dot(A.cols, A.row(r), A.row(r)));
    Op op{Kind::RowNorm};
    op.a = a;
    return push(op, std::move(Y));
}

int Tape::row_dot(int a, int b) {
    const Mat& A = in(a);
    const Mat& B = in(b);
    if (!A.same_shape(B)) throw std::runtime_error("row_dot: shape mismatch");
    Mat Y(A.rows, 1);
    for (int r = 0; r < A.rows; ++r) Y.a[r] = kern::active().dot(A.cols, A.row(r), B.row(r));
    Op op{Kind::RowDot};
    op.a = a;
    op.b = b;
    return push(op, std::move(Y));
}

int Tape::row_scale(int a, int s) {
    const Mat& A = in(a);
    const Mat& S = in(s);
    if (S.rows != A.rows || S.cols != 1) throw std::runtime_error("row_scale: scale not B x 1");
    Mat Y(A.rows, A.cols);
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) Y.at(r, c) = A.at(r, c) * S.a[r];
    Op op{Kind::RowScale};
    op.a = a;
    op.b = s;
    return push(op, std::move(Y));
}

int Tape::recip(int a) {
    const Mat& A = in(a);
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = 1 / A.a[i];
    Op op{Kind::Recip};
    op.a = a;
    return push(op, std::move(Y));
}

int Tape::abs_(int a) {
    const Mat& A = in(a);
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = std::abs(A.a[i]);
    Op op{Kind::Abs};
    op.a = a;
    return push(op, std::move(Y));
}

int Tape::square(int a) {
    const Mat& A = in(a);
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = A.a[i] * A.a[i];
    Op op{Kind::Square};
    op.a = a;
    return push(op, std::move(Y));
}

int Tape::clamp_min(int a, real lo) {
    const Mat& A = in(a);
    Mat Y(A.rows, A.cols);
    for (size_t i = 0; i < A.size(); ++i) Y.a[i] = A.a[i] > lo ? A.a[i] : lo;
    Op op{Kind::ClampMin};
    op.a = a;
    op.c0 = lo;
    return push(op, std::move(Y));
}

int Tape::sum_all(int a, real scale) {
    const Mat& A = in(a);
    Mat Y(1, 1);
    real acc = 0;
    for (size_t i = 0; i < A.size(); ++i) acc += A.a[i];
    Y.a[0] = scale * acc;
    Op op{Kind::SumAll};
    op.a = a;
    op.c0 = scale;
    return push(op, std::move(Y));
}

void Tape::backward(int loss, bool check_nan) {
    const Mat& L = vals_.at(loss);
    if (L.rows != 1 || L.cols != 1) throw std::runtime_error("backward: loss is not scalar");
    grads_.assign(ops_.size(), Mat());
    grad_buf(loss).a[0] = 1;

    const auto& k = kern::active();
    for (int id = loss; id >= 0; --id) {
        const Op& op = ops_[id];
        Mat& G = grads_[id];
        if (G.rows == 0) continue;  // no gradient reached this node
        if (check_nan) {
            for (real g : G.a)
                if (!std::isfinite(g))
                    throw GradientNanError("non-finite gradient at node " + std::to_string(id));
        }
        if (op.kind == Kind::Const) continue;
        switch (op.kind) {
            case Kind::Const:
                break;
            case Kind::Linear: {
                const Mat& X = vals_[op.a];
                auto& W = (*params_)[op.w];
                // gX += G * W
                {
                    Mat& gX = grad_buf(op.a);
                    k.gemm_nn(G.data(), G.rows, G.cols, W.v.data(), W.cols, gX.data(), true);
                }
                // gW += G^T * X
                k.gemm_tn(G.data(), G.rows, G.cols, X.data(), X.cols, W.g.data());
                if (op.bias >= 0)
                    k.colsum_acc(G.data(), G.rows, G.cols, (*params_)[op.bias].g.data());
                break;
            }
            case Kind::Softplus: {
                const Mat& X = vals_[op.a];
                Mat& gX = grad_buf(op.a);
                for (size_t i = 0; i < X.size(); ++i)
                    gX.a[i] += G.a[i] * sigmoid_fwd(op.c0 * X.a[i]);
                break;
            }
            case Kind::SoftplusDeriv: {
                const Mat& Y = vals_[id];
                Mat& gX = grad_buf(op.a);
                for (size_t i = 0; i < Y.size(); ++i)
                    gX.a[i] += G.a[i] * op.c0 * Y.a[i] * (1 - Y.a[i]);
                break;
            }
            case Kind::Relu: {
                const Mat& X = vals_[op.a];
                Mat& gX = grad_buf(op.a);
                for (size_t i = 0; i < X.size(); ++i)
                    if (X.a[i] > 0) gX.a[i] += G.a[i];
                break;
            }
            case Kind::Tanh: {
                const Mat& Y = vals_[id];
                Mat& gX = grad_buf(op.a);
                for (size_t i = 0; i < Y.size(); ++i) gX.a[i] += G.a[i] * (1 - Y.a[i] * Y.a[i]);
                break;
            }
            case Kind::Sigmoid: {
                const Mat& Y = vals_[id];
                Mat& gX = grad_buf(op.a);
                for (size_t i = 0; i < Y.size(); ++i) gX.a[i] += G.a[i] * Y.a[i] * (1 - Y.a[i]);
                break;
            }
            case Kind::Mul: {
                k.mul_ew_acc(static_cast<int>(G.size()), G.data(), vals_[op.b].data(),
                             grad_buf(op.a).data());
                k.mul_ew_acc(static_cast<int>(G.size()), G.data(), vals_[op.a].data(),
                             grad_buf(op.b).data());
                break;
            }
            case Kind::Add: {
                k.axpy(static_cast<int>(G.size()), 1, G.data(), grad_buf(op.a).data());
                k.axpy(static_cast<int>(G.size()), 1, G.data(), grad_buf(op.b).data());
                break;
            }
            case Kind::Sub: {
                k.axpy(static_cast<int>(G.size()), 1, G.data(), grad_buf(op.a).data());
                k.axpy(static_cast<int>(G.size()), -1, G.data(), grad_buf(op.b).data());
                break;
            }
            case Kind::Affine: {
                k.axpy(static_cast<int>(G.size()), op.c0, G.data(), grad_buf(op.a).data());
                break;
            }
            case Kind::Axpby: {
                k.axpy(static_cast<int>(G.size()), op.c0, G.data(), grad_buf(op.a).data());
                k.axpy(static_cast<int>(G.size()), op.c1, G.data(), grad_buf(op.b).data());
                break;
            }
            case Kind::Concat: {
                const Mat& A = vals_[op.a];
                const Mat& B = vals_[op.b];
                Mat& gA = grad_buf(op.a);
                Mat& gB = grad_buf(op.b);
                for (int r = 0; r < G.rows; ++r) {
                    k.axpy(A.cols, 1, G.row(r), gA.row(r));
                    k.axpy(B.cols, 1, G.row(r) + A.cols, gB.row(r));
                }
                break;
            }
            case Kind::SliceCols: {
                Mat& gA = grad_buf(op.a);
                for (int r = 0; r < G.rows; ++r) k.axpy(op.i1, 1, G.row(r), gA.row(r) + op.i0);
                break;
            }
            case Kind::RowNorm: {
                const Mat& A = vals_[op.a];
                const Mat& Y = vals_[id];
                Mat& gA = grad_buf(op.a);
                for (int r = 0; r < A.rows; ++r) {
                    const real n = std::max(Y.a[r], real(1e-12));
                    k.axpy(A.cols, G.a[r] / n, A.row(r), gA.row(r));
                }
                break;
            }
            case Kind::RowDot: {
                const Mat& A = vals_[op.a];
                const Mat& B = vals_[op.b];
                Mat& gA = grad_buf(op.a);
                Mat& gB = grad_buf(op.b);
                for (int r = 0; r < A.rows; ++r) {
                    k.axpy(A.cols, G.a[r], B.row(r), gA.row(r));
                    k.axpy(A.cols, G.a[r], A.row(r), gB.row(r));
                }
                break;
            }
            case Kind::RowScale: {
                const Mat& A = vals_[op.a];
                const Mat& S = vals_[op.b];
                Mat& gA = grad_buf(op.a);
                for (int r = 0; r < A.rows; ++r) k.axpy(A.cols, S.a[r], G.row(r), gA.row(r));
                Mat& gS = grad_buf(op.b);
                for (int r = 0; r < A.rows; ++r) gS.a[r] += k.dot(A.cols, G.row(r), A.row(r));
                break;
            }
            case Kind::Recip: {
                const Mat& Y = vals_[id];
                Mat& gA = grad_buf(op.a);
                for (size_t i = 0; i < Y.size(); ++i) gA.a[i] -= G.a[i] * Y.a[i] * Y.a[i];
                break;
            }
            case Kind::Abs: {
                const Mat& X = vals_[op.a];
                Mat& gA = grad_buf(op.a);
                for (size_t i = 0; i < X.size(); ++i) {
                    if (X.a[i] > 0)
                        gA.a[i] += G.a[i];
                    else if (X.a[i] < 0)
                        gA.a[i] -= G.a[i];
                }
                break;
            }
            case Kind::Square: {
                const Mat& X = vals_[op.a];
                Mat& gA = grad_buf(op.a);
                for (size_t i = 0; i < X.size(); ++i) gA.a[i] += 2 * G.a[i] * X.a[i];
                break;
            }
            case Kind::ClampMin: {
                const Mat& X = vals_[op.a];
                Mat& gA = grad_buf(op.a);
                for (size_t i = 0; i < X.size(); ++i)
                    if (X.a[i] > op.c0) gA.a[i] += G.a[i];
                break;
            }
            case Kind::SumAll: {
                Mat& gA = grad_buf(op.a);
                const real g = G.a[0] * op.c0;
                for (size_t i = 0; i < gA.size(); ++i) gA.a[i] += g;
                break;
            }
        }
    }
}

}  // namespace relievo
