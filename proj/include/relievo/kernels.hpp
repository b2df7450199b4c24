#pragma once

#include <string>

#include "relievo/mat.hpp"

// Inner-loop arithmetic kernels. Every kernel has a scalar reference
// implementation and, where the hardware supports it, an AVX2+FMA variant.
// The active backend is chosen at startup from CPUID and can be forced for
// equivalence testing.
namespace relievo::kern {

struct Backend {
    const char* name;

    // C[ar x br] = A[ar x ac] * B[br x ac]^T, plus optional bias[br] per row of C.
    void (*gemm_nt)(const real* A, int ar, int ac, const real* B, int br, real* C,
                    const real* bias);
    // C[ar x bc] (+)= A[ar x ac] * B[ac x bc]
    void (*gemm_nn)(const real* A, int ar, int ac, const real* B, int bc, real* C,
                    bool accumulate);
    // C[ac x bc] += A^T * B   with A: ar x ac, B: ar x bc
    void (*gemm_tn)(const real* A, int ar, int ac, const real* B, int bc, real* C);

    void (*axpy)(int n, real a, const real* x, real* y);
    real (*dot)(int n, const real* x, const real* y);
    void (*mul_ew)(int n, const real* a, const real* b, real* c);
    void (*mul_ew_acc)(int n, const real* a, const real* b, real* c);  // c += a*b
    void (*scale)(int n, real a, real* x);
    // out[j] += sum_i A[i][j]
    void (*colsum_acc)(const real* A, int r, int c, real* out);
};

const Backend& scalar_backend();
const Backend* avx2_backend();  // nullptr when unsupported or single-precision build

// Active backend; "auto" (default) picks the widest supported one.
const Backend& active();
// name: "auto" | "scalar" | "avx2". Throws on an unsupported request.
void force_backend(const std::string& name);

}  // namespace relievo::kern
