#include "relievo/mlp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "relievo/kernels.hpp"

namespace relievo {

void MlpSpec::validate() const {
    if (widths.empty()) throw std::runtime_error("MlpSpec: no layers");
    for (int w : widths)
        if (w <= 0) throw std::runtime_error("MlpSpec: non-positive width");
    if (skip_at == 0 || skip_at >= layer_count())
        if (skip_at != -1) throw std::runtime_error("MlpSpec: skip target out of range");
    if (pe_freqs < 0) throw std::runtime_error("MlpSpec: negative frequency count");
}

void positional_encode(const real* x, int dim, int freqs, real* out) {
    for (int i = 0; i < dim; ++i) out[i] = x[i];
    real* p = out + dim;
    for (int k = 0; k < freqs; ++k) {
        const real f = std::ldexp(std::numbers::pi_v<real>, k);  // 2^k * pi
        for (int i = 0; i < dim; ++i) p[i] = std::sin(f * x[i]);
        p += dim;
        for (int i = 0; i < dim; ++i) p[i] = std::cos(f * x[i]);
        p += dim;
    }
}

void positional_encode_jac(const real* x, int dim, int freqs, int axis, real* out) {
    const int enc = freqs > 0 ? dim + 2 * dim * freqs : dim;
    std::fill(out, out + enc, real(0));
    out[axis] = 1;
    real* p = out + dim;
    for (int k = 0; k < freqs; ++k) {
        const real f = std::ldexp(std::numbers::pi_v<real>, k);
        p[axis] = f * std::cos(f * x[axis]);
        p += dim;
        p[axis] = -f * std::sin(f * x[axis]);
        p += dim;
    }
}

Mlp::Mlp(MlpSpec spec, ParamStore& params, const std::string& prefix) : spec_(std::move(spec)) {
    spec_.validate();
    for (int l = 0; l < spec_.layer_count(); ++l) {
        w_.push_back(params.add(prefix + ".w" + std::to_string(l), spec_.widths[l],
                                spec_.layer_in(l)));
        b_.push_back(params.add(prefix + ".b" + std::to_string(l), 1, spec_.widths[l]));
    }
}

Mlp Mlp::attach(MlpSpec spec, ParamStore& params, const std::string& prefix) {
    spec.validate();
    Mlp m;
    m.spec_ = std::move(spec);
    for (int l = 0; l < m.spec_.layer_count(); ++l) {
        int wid = params.find(prefix + ".w" + std::to_string(l));
        int bid = params.find(prefix + ".b" + std::to_string(l));
        if (wid < 0 || bid < 0)
            throw std::runtime_error("Mlp::attach: missing parameters for " + prefix);
        m.w_.push_back(wid);
        m.b_.push_back(bid);
    }
    return m;
}

void Mlp::init_random(ParamStore& params, std::mt19937_64& rng, real weight_scale) {
    for (int l = 0; l < spec_.layer_count(); ++l) {
        auto& W = params[w_[l]];
        auto& B = params[b_[l]];
        const real scale =
            weight_scale > 0 ? weight_scale : std::sqrt(real(2) / spec_.layer_in(l));
        std::normal_distribution<real> dist(0, scale);
        for (auto& v : W.v) v = dist(rng);
        std::fill(B.v.begin(), B.v.end(), real(0));
    }
}

void Mlp::init_sphere(ParamStore& params, std::mt19937_64& rng, real radius) {
    const int n = spec_.layer_count();
    const int enc = spec_.encoded_dim();
    for (int l = 0; l < n; ++l) {
        auto& W = params[w_[l]];
        auto& B = params[b_[l]];
        if (l == n - 1) {
            const real mean = std::sqrt(std::numbers::pi_v<real>) / std::sqrt(real(spec_.layer_in(l)));
            std::normal_distribution<real> dist(mean, real(1e-4));
            for (auto& v : W.v) v = dist(rng);
            std::fill(B.v.begin(), B.v.end(), -radius);
        } else {
            std::normal_distribution<real> dist(0, std::sqrt(real(2)) /
                                                       std::sqrt(real(spec_.widths[l])));
            for (auto& v : W.v) v = dist(rng);
            std::fill(B.v.begin(), B.v.end(), real(0));
        }
        // encoded channels start silent so the init behaves as if L = 0
        if (spec_.pe_freqs > 0) {
            if (l == 0) {
                for (int r = 0; r < W.rows; ++r)
                    for (int c = spec_.input_dim; c < enc; ++c)
                        W.v[static_cast<size_t>(r) * W.cols + c] = 0;
            } else if (l == spec_.skip_at) {
                const int offset = spec_.widths[l - 1] + spec_.input_dim;
                for (int r = 0; r < W.rows; ++r)
                    for (int c = offset; c < W.cols; ++c)
                        W.v[static_cast<size_t>(r) * W.cols + c] = 0;
            }
        }
    }
}

Mat Mlp::encode_batch(const Mat& X) const {
    if (X.cols != spec_.input_dim) throw std::runtime_error("Mlp: input dim mismatch");
    if (spec_.pe_freqs == 0) return X;
    Mat E(X.rows, spec_.encoded_dim());
    for (int r = 0; r < X.rows; ++r)
        positional_encode(X.row(r), spec_.input_dim, spec_.pe_freqs, E.row(r));
    return E;
}

namespace {

inline real softplus_s(real z, real beta) {
    const real bz = beta * z;
    return bz > real(30) ? z : std::log1p(std::exp(bz)) / beta;
}
inline real sigmoid_s(real z) {
    return z >= 0 ? 1 / (1 + std::exp(-z)) : std::exp(z) / (1 + std::exp(z));
}

void apply_linear(const ParamStore& params, int wid, int bid, const Mat& X, Mat& Y) {
    const auto& W = params[wid];
    Y = Mat(X.rows, W.rows);
    kern::active().gemm_nt(X.data(), X.rows, X.cols, W.v.data(), W.rows, Y.data(),
                           bid >= 0 ? params[bid].v.data() : nullptr);
}

Mat concat_scaled(const Mat& A, const Mat& B, real s) {
    Mat Y(A.rows, A.cols + B.cols);
    for (int r = 0; r < A.rows; ++r) {
        for (int c = 0; c < A.cols; ++c) Y.at(r, c) = A.at(r, c) * s;
        for (int c = 0; c < B.cols; ++c) Y.at(r, A.cols + c) = B.at(r, c) * s;
    }
    return Y;
}

}  // namespace

void Mlp::forward(const ParamStore& params, const Mat& X, Mat& out) const {
    const real inv_sqrt2 = real(1) / std::sqrt(real(2));
    Mat enc = encode_batch(X);
    Mat h = enc, z;
    const int n = spec_.layer_count();
    for (int l = 0; l < n; ++l) {
        const Mat& input = (l == spec_.skip_at) ? (h = concat_scaled(h, enc, inv_sqrt2)) : h;
        apply_linear(params, w_[l], b_[l], input, z);
        if (l < n - 1) {
            if (spec_.hidden == Activation::Softplus)
                for (auto& v : z.a) v = softplus_s(v, spec_.softplus_beta);
            else
                for (auto& v : z.a) v = v > 0 ? v : 0;
        } else if (spec_.output == OutputActivation::Tanh) {
            for (auto& v : z.a) v = std::tanh(v);
        }
        h = std::move(z);
    }
    out = std::move(h);
}

void Mlp::forward_with_input_grad(const ParamStore& params, const Mat& X, Mat& out,
                                  Mat& grad0) const {
    if (spec_.hidden == Activation::Relu)
        throw std::runtime_error("spatial gradients through relu layers are unsupported");
    const real inv_sqrt2 = real(1) / std::sqrt(real(2));
    const int dim = spec_.input_dim;
    Mat enc = encode_batch(X);
    std::vector<Mat> seed(dim);
    for (int k = 0; k < dim; ++k) {
        seed[k] = Mat(X.rows, spec_.encoded_dim());
        for (int r = 0; r < X.rows; ++r)
            positional_encode_jac(X.row(r), dim, spec_.pe_freqs, k, seed[k].row(r));
    }
    Mat h = enc;
    std::vector<Mat> t(seed);
    const int n = spec_.layer_count();
    Mat z, tz;
    for (int l = 0; l < n; ++l) {
        if (l == spec_.skip_at) {
            h = concat_scaled(h, enc, inv_sqrt2);
            for (int k = 0; k < dim; ++k) t[k] = concat_scaled(t[k], seed[k], inv_sqrt2);
        }
        apply_linear(params, w_[l], b_[l], h, z);
        std::vector<Mat> tz_all(dim);
        for (int k = 0; k < dim; ++k) apply_linear(params, w_[l], -1, t[k], tz_all[k]);
        if (l < n - 1) {
            for (size_t i = 0; i < z.size(); ++i) {
                const real d = sigmoid_s(spec_.softplus_beta * z.a[i]);
                for (int k = 0; k < dim; ++k) tz_all[k].a[i] *= d;
                z.a[i] = softplus_s(z.a[i], spec_.softplus_beta);
            }
        } else if (spec_.output == OutputActivation::Tanh) {
            for (size_t i = 0; i < z.size(); ++i) {
                const real y = std::tanh(z.a[i]);
                for (int k = 0; k < dim; ++k) tz_all[k].a[i] *= 1 - y * y;
                z.a[i] = y;
            }
        }
        h = std::move(z);
        t = std::move(tz_all);
    }
    out = std::move(h);
    grad0 = Mat(X.rows, dim);
    for (int r = 0; r < X.rows; ++r)
        for (int k = 0; k < dim; ++k) grad0.at(r, k) = t[k].at(r, 0);
}

int Mlp::tape_forward_impl(Tape& tape, int enc_node, bool) const {
    const real inv_sqrt2 = real(1) / std::sqrt(real(2));
    const int n = spec_.layer_count();
    int h = enc_node;
    for (int l = 0; l < n; ++l) {
        if (l == spec_.skip_at) h = tape.affine(tape.concat(h, enc_node), inv_sqrt2, 0);
        int z = tape.linear(h, w_[l], b_[l]);
        if (l < n - 1)
            h = spec_.hidden == Activation::Softplus ? tape.softplus(z, spec_.softplus_beta)
                                                     : tape.relu(z);
        else
            h = spec_.output == OutputActivation::Tanh ? tape.tanh_(z) : z;
    }
    return h;
}

int Mlp::tape_forward(Tape& tape, int x_node) const {
    if (spec_.pe_freqs != 0)
        throw std::runtime_error("tape_forward: encoding requires a constant input");
    return tape_forward_impl(tape, x_node, false);
}

int Mlp::tape_forward_const(Tape& tape, const Mat& X) const {
    return tape_forward_impl(tape, tape.constant(encode_batch(X)), true);
}

void Mlp::tape_forward_with_spatial_grad(Tape& tape, const Mat& X, int& out_node,
                                         int& grad0_node) const {
    if (spec_.hidden == Activation::Relu)
        throw std::runtime_error("spatial gradients through relu layers are unsupported");
    if (spec_.output == OutputActivation::Tanh)
        throw std::runtime_error("spatial gradient of a tanh-output net is not needed/supported");
    const real inv_sqrt2 = real(1) / std::sqrt(real(2));
    const int dim = spec_.input_dim;
    const int n = spec_.layer_count();

    int enc0 = tape.constant(encode_batch(X));
    std::vector<int> seed0(dim);
    for (int k = 0; k < dim; ++k) {
        Mat S(X.rows, spec_.encoded_dim());
        for (int r = 0; r < X.rows; ++r)
            positional_encode_jac(X.row(r), dim, spec_.pe_freqs, k, S.row(r));
        seed0[k] = tape.constant(std::move(S));
    }

    int h = enc0;
    std::vector<int> t = seed0;
    for (int l = 0; l < n; ++l) {
        if (l == spec_.skip_at) {
            h = tape.affine(tape.concat(h, enc0), inv_sqrt2, 0);
            for (int k = 0; k < dim; ++k)
                t[k] = tape.affine(tape.concat(t[k], seed0[k]), inv_sqrt2, 0);
        }
        int z = tape.linear(h, w_[l], b_[l]);
        std::vector<int> tz(dim);
        for (int k = 0; k < dim; ++k) tz[k] = tape.linear_nobias(t[k], w_[l]);
        if (l < n - 1) {
            int d = tape.softplus_deriv(z, spec_.softplus_beta);
            h = tape.softplus(z, spec_.softplus_beta);
            for (int k = 0; k < dim; ++k) t[k] = tape.mul(d, tz[k]);
        } else {
            h = z;
            t = tz;
        }
    }
    out_node = h;
    int g = tape.slice_cols(t[0], 0, 1);
    for (int k = 1; k < dim; ++k) g = tape.concat(g, tape.slice_cols(t[k], 0, 1));
    grad0_node = g;
}

}  // namespace relievo
