#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace relievo {

#ifdef RELIEVO_SINGLE
using real = float;
#else
using real = double;
#endif

// Dense row-major matrix. Rows are batch entries, columns are channels.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<real> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, real(0)) {}

    static Mat zeros(int r, int c) { return Mat(r, c); }

    real* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const real* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

    real& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    real at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return a.size(); }
    real* data() { return a.data(); }
    const real* data() const { return a.data(); }

    void fill(real v) { std::fill(a.begin(), a.end(), v); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace relievo
