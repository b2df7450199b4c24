#include <doctest.h>

#include <random>
#include <vector>

#include "relievo/kernels.hpp"

using namespace relievo;
using kern::Backend;

namespace {

Mat random_mat(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<real> d(0, 1);
    Mat m(r, c);
    for (real& v : m.a) v = d(rng);
    return m;
}

void naive_gemm_nt(const Mat& A, const Mat& B, Mat& C, const real* bias) {
    C = Mat(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.rows; ++j) {
            real s = bias ? bias[j] : 0;
            for (int k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(j, k);
            C.at(i, j) = s;
        }
}

}  // namespace

TEST_CASE("gemm_nt matches a naive loop") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> dim(1, 33);
        const int m = dim(rng), k = dim(rng), n = dim(rng);
        Mat A = random_mat(m, k, rng), B = random_mat(n, k, rng);
        Mat bias = random_mat(1, n, rng);
        Mat C(m, n), ref;
        kern::active().gemm_nt(A.a.data(), m, k, B.a.data(), n, C.a.data(), bias.a.data());
        naive_gemm_nt(A, B, ref, bias.a.data());
        for (size_t i = 0; i < C.a.size(); ++i) CHECK(C.a[i] == doctest::Approx(ref.a[i]).epsilon(1e-12));
    }
}

TEST_CASE("scalar and AVX2 backends agree") {
    const Backend* avx = kern::avx2_backend();
    if (!avx) {
        MESSAGE("AVX2 unavailable; skipping");
        return;
    }
    const Backend& sc = kern::scalar_backend();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 40);

    for (int trial = 0; trial < 30; ++trial) {
        const int m = dim(rng), k = dim(rng), n = dim(rng);
        Mat A = random_mat(m, k, rng), B = random_mat(n, k, rng), bias = random_mat(1, n, rng);

        Mat C1(m, n), C2(m, n);
        sc.gemm_nt(A.a.data(), m, k, B.a.data(), n, C1.a.data(), bias.a.data());
        avx->gemm_nt(A.a.data(), m, k, B.a.data(), n, C2.a.data(), bias.a.data());
        for (size_t i = 0; i < C1.a.size(); ++i)
            CHECK(C1.a[i] == doctest::Approx(C2.a[i]).epsilon(1e-12));

        Mat Bn = random_mat(k, n, rng);
        Mat D1(m, n), D2(m, n);
        std::fill(D1.a.begin(), D1.a.end(), real(0.5));
        D2.a = D1.a;
        sc.gemm_nn(A.a.data(), m, k, Bn.a.data(), n, D1.a.data(), true);
        avx->gemm_nn(A.a.data(), m, k, Bn.a.data(), n, D2.a.data(), true);
        for (size_t i = 0; i < D1.a.size(); ++i)
            CHECK(D1.a[i] == doctest::Approx(D2.a[i]).epsilon(1e-12));

        Mat G = random_mat(m, n, rng);
        Mat T1(k, n), T2(k, n);
        sc.gemm_tn(A.a.data(), m, k, G.a.data(), n, T1.a.data());
        avx->gemm_tn(A.a.data(), m, k, G.a.data(), n, T2.a.data());
        for (size_t i = 0; i < T1.a.size(); ++i)
            CHECK(T1.a[i] == doctest::Approx(T2.a[i]).epsilon(1e-12));

        const int len = m * k;
        std::vector<real> x(A.a.begin(), A.a.begin() + len), y(len, 1), y2(len, 1);
        sc.axpy(len, real(0.3), x.data(), y.data());
        avx->axpy(len, real(0.3), x.data(), y2.data());
        for (int i = 0; i < len; ++i) CHECK(y[i] == doctest::Approx(y2[i]).epsilon(1e-14));

        CHECK(sc.dot(len, x.data(), y.data()) ==
              doctest::Approx(avx->dot(len, x.data(), y2.data())).epsilon(1e-12));

        std::vector<real> c1(len), c2(len);
        sc.mul_ew(len, x.data(), y.data(), c1.data());
        avx->mul_ew(len, x.data(), y.data(), c2.data());
        for (int i = 0; i < len; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-14));
        sc.mul_ew_acc(len, x.data(), y.data(), c1.data());
        avx->mul_ew_acc(len, x.data(), y.data(), c2.data());
        for (int i = 0; i < len; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-14));

        sc.scale(len, real(1.7), c1.data());
        avx->scale(len, real(1.7), c2.data());
        for (int i = 0; i < len; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-14));

        std::vector<real> s1(k, 0), s2(k, 0);
        sc.colsum_acc(A.a.data(), m, k, s1.data());
        avx->colsum_acc(A.a.data(), m, k, s2.data());
        for (int i = 0; i < k; ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
    }
}

TEST_CASE("force_backend rejects nonsense and honors scalar") {
    CHECK_THROWS(kern::force_backend("neon"));
    kern::force_backend("scalar");
    CHECK(std::string(kern::active().name) == "scalar");
    kern::force_backend("auto");
}
