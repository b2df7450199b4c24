// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; callers reach it through the dispatch table after a
// CPUID check.
#include "relievo/kernels.hpp"

#if defined(__x86_64__) && !defined(RELIEVO_SINGLE)

#include <immintrin.h>

namespace relievo::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double dot_avx(int n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    int k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4), acc1);
    }
    for (; k + 4 <= n; k += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) acc += x[k] * y[k];
    return acc;
}

inline void axpy_avx(int n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d vy = _mm256_loadu_pd(y + k);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), vy);
        _mm256_storeu_pd(y + k, vy);
    }
    for (; k < n; ++k) y[k] += a * x[k];
}

void v_gemm_nt(const double* A, int ar, int ac, const double* B, int br, double* C,
               const double* bias) {
    for (int i = 0; i < ar; ++i) {
        const double* arow = A + static_cast<size_t>(i) * ac;
        double* crow = C + static_cast<size_t>(i) * br;
        for (int j = 0; j < br; ++j) {
            double acc = dot_avx(ac, arow, B + static_cast<size_t>(j) * ac);
            crow[j] = bias ? acc + bias[j] : acc;
        }
    }
}

void v_gemm_nn(const double* A, int ar, int ac, const double* B, int bc, double* C,
               bool accumulate) {
    for (int i = 0; i < ar; ++i) {
        double* crow = C + static_cast<size_t>(i) * bc;
        if (!accumulate)
            for (int j = 0; j < bc; ++j) crow[j] = 0.0;
        const double* arow = A + static_cast<size_t>(i) * ac;
        for (int k = 0; k < ac; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            axpy_avx(bc, aik, B + static_cast<size_t>(k) * bc, crow);
        }
    }
}

void v_gemm_tn(const double* A, int ar, int ac, const double* B, int bc, double* C) {
    for (int i = 0; i < ar; ++i) {
        const double* arow = A + static_cast<size_t>(i) * ac;
        const double* brow = B + static_cast<size_t>(i) * bc;
        for (int k = 0; k < ac; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            axpy_avx(bc, aik, brow, C + static_cast<size_t>(k) * bc);
        }
    }
}

void v_axpy(int n, double a, const double* x, double* y) { axpy_avx(n, a, x, y); }

double v_dot(int n, const double* x, const double* y) { return dot_avx(n, x, y); }

void v_mul_ew(int n, const double* a, const double* b, double* c) {
    int k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(c + k, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
    for (; k < n; ++k) c[k] = a[k] * b[k];
}

void v_mul_ew_acc(int n, const double* a, const double* b, double* c) {
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d vc = _mm256_loadu_pd(c + k);
        vc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), vc);
        _mm256_storeu_pd(c + k, vc);
    }
    for (; k < n; ++k) c[k] += a[k] * b[k];
}

void v_scale(int n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    int k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(x + k, _mm256_mul_pd(va, _mm256_loadu_pd(x + k)));
    for (; k < n; ++k) x[k] *= a;
}

void v_colsum_acc(const double* A, int r, int c, double* out) {
    for (int i = 0; i < r; ++i) axpy_avx(c, 1.0, A + static_cast<size_t>(i) * c, out);
}

}  // namespace

const Backend* avx2_backend() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    static const Backend b{"avx2",  v_gemm_nt, v_gemm_nn,    v_gemm_tn, v_axpy,
                           v_dot,   v_mul_ew,  v_mul_ew_acc, v_scale,   v_colsum_acc};
    return &b;
}

}  // namespace relievo::kern

#else

namespace relievo::kern {
const Backend* avx2_backend() { return nullptr; }
}  // namespace relievo::kern

#endif
