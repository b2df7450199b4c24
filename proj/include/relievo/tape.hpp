#pragma once

#include <stdexcept>
#include <vector>

#include "relievo/params.hpp"

namespace relievo {

// Thrown when backward finds a non-finite gradient.
struct GradientNanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Define-by-run computation tape over row-major matrices (rows = batch).
// Forward values are computed eagerly as ops are recorded; backward replays
// the tape in reverse and accumulates parameter gradients into the
// ParamStore. Spatial input-gradients are built as forward-mode tangent
// chains out of these same primitives, so differentiating a loss that
// contains them (Eikonal, normal, specular paths) is plain reverse mode
// over a longer tape. By construction an op can only consume earlier nodes,
// so the graph is acyclic.
class Tape {
public:
    explicit Tape(ParamStore& params) : params_(&params) {}

    // --- node constructors (return node ids) ---
    int constant(Mat m);

    int linear(int x, int w, int bias = -1);  // X * W^T (+ bias)
    int linear_nobias(int x, int w) { return linear(x, w, -1); }

    int softplus(int x, real beta = 1);
    int softplus_deriv(int x, real beta = 1);  // sigmoid(beta * x)
    int relu(int x);
    int tanh_(int x);
    int sigmoid(int x);

    int mul(int a, int b);  // elementwise, same shape
    int add(int a, int b);
    int sub(int a, int b);
    int affine(int a, real scale, real shift);  // scale*a + shift
    int axpby(real ca, int a, real cb, int b);

    int concat(int a, int b);  // along columns
    int slice_cols(int a, int begin, int len);

    int row_norm(int a);          // B x D -> B x 1, Euclidean
    int row_dot(int a, int b);    // B x D pair -> B x 1
    int row_scale(int a, int s);  // rows of a scaled by s (B x 1)

    int recip(int a);
    int abs_(int a);
    int square(int a);
    int clamp_min(int a, real lo);

    int sum_all(int a, real scale = 1);  // 1 x 1 node: scale * sum of entries

    // --- access ---
    const Mat& val(int id) const { return vals_.at(id); }
    real scalar(int id) const;
    // Gradient of the last backward() w.r.t. node id (zero Mat if untouched).
    const Mat& grad(int id) const;

    // Reverse pass from a scalar node; accumulates into ParamStore grads.
    void backward(int loss, bool check_nan = true);

    int node_count() const { return static_cast<int>(ops_.size()); }

private:
    enum class Kind {
        Const, Linear, Softplus, SoftplusDeriv, Relu, Tanh, Sigmoid,
        Mul, Add, Sub, Affine, Axpby, Concat, SliceCols,
        RowNorm, RowDot, RowScale, Recip, Abs, Square, ClampMin, SumAll
    };
    struct Op {
        Kind kind;
        int a = -1, b = -1;   // input nodes
        int w = -1, bias = -1;  // parameter ids (Linear)
        real c0 = 0, c1 = 0;
        int i0 = 0, i1 = 0;   // slice begin/len
    };

    ParamStore* params_;
    std::vector<Op> ops_;
    std::vector<Mat> vals_;
    std::vector<Mat> grads_;

    int push(Op op, Mat val);
    Mat& grad_buf(int id);
    const Mat& in(int id) const { return vals_.at(id); }
};

}  // namespace relievo
