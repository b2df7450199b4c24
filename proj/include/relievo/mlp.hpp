#pragma once

#include <random>
#include <string>
#include <vector>

#include "relievo/tape.hpp"

namespace relievo {

enum class Activation { Softplus, Relu };
enum class OutputActivation { None, Tanh };

// Layer widths exclude the input dim; widths.back() is the output dim.
// skip_at >= 0 makes that hidden layer consume concat(h, encoded_input)/sqrt(2).
// pe_freqs L > 0 expands a 3-d input to 3 + 6L sinusoidal channels.
struct MlpSpec {
    int input_dim = 3;
    std::vector<int> widths;
    Activation hidden = Activation::Softplus;
    real softplus_beta = 100;
    OutputActivation output = OutputActivation::None;
    int skip_at = -1;
    int pe_freqs = 0;

    int encoded_dim() const { return pe_freqs > 0 ? input_dim + 2 * input_dim * pe_freqs : input_dim; }
    int output_dim() const { return widths.back(); }
    int layer_count() const { return static_cast<int>(widths.size()); }
    // input dim of layer l
    int layer_in(int l) const {
        int base = l == 0 ? encoded_dim() : widths[l - 1];
        return l == skip_at ? base + encoded_dim() : base;
    }
    void validate() const;
};

// gamma(x) = (x, sin(2^k pi x), cos(2^k pi x)) for k = 0..L-1, per coordinate,
// grouped as [x | sin_k=0 (3) | cos_k=0 (3) | sin_k=1 ...].
void positional_encode(const real* x, int dim, int freqs, real* out);
// d(encoding)/dx_k for one coordinate axis k: same layout as the encoding.
void positional_encode_jac(const real* x, int dim, int freqs, int axis, real* out);

// Multi-layer perceptron over a ParamStore. Parameters are registered once
// under "<prefix>.w<l>" / "<prefix>.b<l>".
class Mlp {
public:
    Mlp() = default;
    Mlp(MlpSpec spec, ParamStore& params, const std::string& prefix);
    // Attach to parameters already present in the store (checkpoint restore).
    static Mlp attach(MlpSpec spec, ParamStore& params, const std::string& prefix);

    const MlpSpec& spec() const { return spec_; }
    const std::vector<int>& weight_ids() const { return w_; }
    const std::vector<int>& bias_ids() const { return b_; }

    void init_random(ParamStore& params, std::mt19937_64& rng, real weight_scale = -1);
    // Geometric initialization: the net starts out approximating |x| - radius.
    // Positional-encoding channels beyond the raw coordinates start at zero.
    void init_sphere(ParamStore& params, std::mt19937_64& rng, real radius = 1);

    // --- inference (no tape) ---
    // X: B x input_dim, returns B x output_dim.
    void forward(const ParamStore& params, const Mat& X, Mat& out) const;
    // Forward plus d(out[:,0])/dx via forward-mode tangents: grad is B x input_dim.
    void forward_with_input_grad(const ParamStore& params, const Mat& X, Mat& out,
                                 Mat& grad0) const;

    // --- tape ---
    // x_node: on-tape input (B x input_dim). pe_freqs must be 0 on this path
    // (the encoding is only differentiable w.r.t. parameters when the input
    // is a constant of the step).
    int tape_forward(Tape& tape, int x_node) const;
    // Constant input; encoding applied internally.
    int tape_forward_const(Tape& tape, const Mat& X) const;
    // Constant input; returns both the output node and the on-tape spatial
    // gradient of output channel 0 (B x input_dim). The tangent chain is made
    // of tape primitives, so reverse mode through it yields correct
    // second-order parameter gradients.
    void tape_forward_with_spatial_grad(Tape& tape, const Mat& X, int& out_node,
                                        int& grad0_node) const;

private:
    MlpSpec spec_;
    std::vector<int> w_, b_;

    Mat encode_batch(const Mat& X) const;
    int tape_forward_impl(Tape& tape, int enc_node, bool input_is_encoded) const;
};

}  // namespace relievo
