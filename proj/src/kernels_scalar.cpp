#include "relievo/kernels.hpp"

namespace relievo::kern {
namespace {

void s_gemm_nt(const real* A, int ar, int ac, const real* B, int br, real* C,
               const real* bias) {
    for (int i = 0; i < ar; ++i) {
        const real* arow = A + static_cast<size_t>(i) * ac;
        real* crow = C + static_cast<size_t>(i) * br;
        for (int j = 0; j < br; ++j) {
            const real* brow = B + static_cast<size_t>(j) * ac;
            real acc = bias ? bias[j] : real(0);
            for (int k = 0; k < ac; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
}

void s_gemm_nn(const real* A, int ar, int ac, const real* B, int bc, real* C,
               bool accumulate) {
    for (int i = 0; i < ar; ++i) {
        real* crow = C + static_cast<size_t>(i) * bc;
        if (!accumulate)
            for (int j = 0; j < bc; ++j) crow[j] = real(0);
        const real* arow = A + static_cast<size_t>(i) * ac;
        for (int k = 0; k < ac; ++k) {
            const real aik = arow[k];
            if (aik == real(0)) continue;
            const real* brow = B + static_cast<size_t>(k) * bc;
            for (int j = 0; j < bc; ++j) crow[j] += aik * brow[j];
        }
    }
}

void s_gemm_tn(const real* A, int ar, int ac, const real* B, int bc, real* C) {
    for (int i = 0; i < ar; ++i) {
        const real* arow = A + static_cast<size_t>(i) * ac;
        const real* brow = B + static_cast<size_t>(i) * bc;
        for (int k = 0; k < ac; ++k) {
            const real aik = arow[k];
            if (aik == real(0)) continue;
            real* crow = C + static_cast<size_t>(k) * bc;
            for (int j = 0; j < bc; ++j) crow[j] += aik * brow[j];
        }
    }
}

void s_axpy(int n, real a, const real* x, real* y) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

real s_dot(int n, const real* x, const real* y) {
    real acc = 0;
    for (int i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void s_mul_ew(int n, const real* a, const real* b, real* c) {
    for (int i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void s_mul_ew_acc(int n, const real* a, const real* b, real* c) {
    for (int i = 0; i < n; ++i) c[i] += a[i] * b[i];
}

void s_scale(int n, real a, real* x) {
    for (int i = 0; i < n; ++i) x[i] *= a;
}

void s_colsum_acc(const real* A, int r, int c, real* out) {
    for (int i = 0; i < r; ++i) {
        const real* arow = A + static_cast<size_t>(i) * c;
        for (int j = 0; j < c; ++j) out[j] += arow[j];
    }
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar",  s_gemm_nt, s_gemm_nn,    s_gemm_tn, s_axpy,
                           s_dot,     s_mul_ew,  s_mul_ew_acc, s_scale,   s_colsum_acc};
    return b;
}

}  // namespace relievo::kern
