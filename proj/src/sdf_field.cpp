#include "relievo/sdf_field.hpp"

#include <cmath>

namespace relievo {

MlpSpec SdfFieldSpec::to_mlp_spec() const {
    MlpSpec m;
    m.input_dim = 3;
    m.widths.assign(depth - 1, width);
    m.widths.push_back(1 + feature_dim);
    m.hidden = Activation::Softplus;
    m.softplus_beta = softplus_beta;
    m.output = OutputActivation::None;
    m.skip_at = skip_at;
    m.pe_freqs = pe_freqs;
    return m;
}

SdfField::SdfField(SdfFieldSpec spec, ParamStore& params, const std::string& prefix)
    : spec_(spec), mlp_(spec.to_mlp_spec(), params, prefix), params_(&params) {}

SdfField SdfField::attach(SdfFieldSpec spec, ParamStore& params, const std::string& prefix) {
    SdfField f;
    f.spec_ = spec;
    f.mlp_ = Mlp::attach(spec.to_mlp_spec(), params, prefix);
    f.params_ = &params;
    return f;
}

void SdfField::init_sphere(std::mt19937_64& rng, real radius) {
    mlp_.init_sphere(*params_, rng, radius);
}

void SdfField::eval(const Mat& X, Mat& s, Mat& z) const {
    Mat out;
    mlp_.forward(*params_, X, out);
    s = Mat(X.rows, 1);
    z = Mat(X.rows, spec_.feature_dim);
    for (int r = 0; r < X.rows; ++r) {
        s.a[r] = out.at(r, 0);
        std::copy(out.row(r) + 1, out.row(r) + 1 + spec_.feature_dim, z.row(r));
    }
}

void SdfField::eval_with_gradient(const Mat& X, Mat& s, Mat& grad) const {
    Mat out;
    mlp_.forward_with_input_grad(*params_, X, out, grad);
    s = Mat(X.rows, 1);
    for (int r = 0; r < X.rows; ++r) s.a[r] = out.at(r, 0);
}

real SdfField::value(const Vec3& x) const {
    Mat X(1, 3);
    X.a = {x.x, x.y, x.z};
    Mat out;
    mlp_.forward(*params_, X, out);
    return out.a[0];
}

Vec3 SdfField::gradient(const Vec3& x) const {
    Mat X(1, 3);
    X.a = {x.x, x.y, x.z};
    Mat s, g;
    eval_with_gradient(X, s, g);
    return {g.a[0], g.a[1], g.a[2]};
}

std::optional<Vec3> SdfField::normal(const Vec3& x) const {
    Vec3 g = gradient(x);
    real n = length(g);
    if (n <= real(1e-8)) return std::nullopt;
    return g / n;
}

std::optional<Vec3> SdfField::pull_to_surface(const Vec3& x) const {
    Mat X(1, 3);
    X.a = {x.x, x.y, x.z};
    Mat s, g;
    eval_with_gradient(X, s, g);
    Vec3 grad{g.a[0], g.a[1], g.a[2]};
    real n2 = length2(grad);
    if (n2 <= real(1e-16)) return std::nullopt;
    return x - grad * (s.a[0] / n2);  // signed Newton step
}

}  // namespace relievo
