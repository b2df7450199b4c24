#include "relievo/shading.hpp"

#include <algorithm>

namespace relievo {

MlpSpec ShadingModel::a_spec(const ShadingSpec& s) {
    MlpSpec m;
    m.input_dim = 3 + s.feature_dim;
    m.widths = {s.hidden_width, s.hidden_width, s.hidden_width, 3};
    m.hidden = Activation::Relu;
    m.output = OutputActivation::Tanh;
    return m;
}

MlpSpec ShadingModel::ds_spec(const ShadingSpec& s, int input_dim) {
    MlpSpec m;
    m.input_dim = input_dim;
    m.widths = {s.hidden_width, 1};
    m.hidden = Activation::Relu;
    m.output = OutputActivation::Tanh;
    return m;
}

MlpSpec ShadingModel::r_spec(const ShadingSpec& s) {
    MlpSpec m;
    m.input_dim = 9 + s.feature_dim;  // x, n, v, z
    m.widths = {s.hidden_width, s.hidden_width, s.hidden_width, 3};
    m.hidden = Activation::Relu;
    m.output = OutputActivation::Tanh;
    return m;
}

ShadingModel::ShadingModel(ShadingSpec spec, ParamStore& params, const std::string& prefix)
    : spec_(spec), params_(&params) {
    if (spec_.unified) {
        r_ = Mlp(r_spec(spec_), params, prefix + ".r");
    } else {
        a_ = Mlp(a_spec(spec_), params, prefix + ".a");
        d_ = Mlp(ds_spec(spec_, 3), params, prefix + ".d");
        s_ = Mlp(ds_spec(spec_, 6), params, prefix + ".s");
    }
}

ShadingModel ShadingModel::attach(ShadingSpec spec, ParamStore& params,
                                  const std::string& prefix) {
    ShadingModel m;
    m.spec_ = spec;
    m.params_ = &params;
    if (spec.unified) {
        m.r_ = Mlp::attach(r_spec(spec), params, prefix + ".r");
    } else {
        m.a_ = Mlp::attach(a_spec(spec), params, prefix + ".a");
        m.d_ = Mlp::attach(ds_spec(spec, 3), params, prefix + ".d");
        m.s_ = Mlp::attach(ds_spec(spec, 6), params, prefix + ".s");
    }
    return m;
}

void ShadingModel::init(std::mt19937_64& rng) {
    if (spec_.unified) {
        r_.init_random(*params_, rng);
        return;
    }
    a_.init_random(*params_, rng);
    d_.init_random(*params_, rng);
    s_.init_random(*params_, rng);
    // keep the specular term closed at start: shrink the output weights so
    // the -1.5 bias dominates and tanh(-1.5) maps to ~0.05 everywhere
    auto& sw = (*params_)[s_.weight_ids().back()];
    for (auto& w : sw.v) w *= real(0.01);
    auto& sbias = (*params_)[s_.bias_ids().back()];
    std::fill(sbias.v.begin(), sbias.v.end(), real(-1.5));
}

namespace {

// (tanh_out + 1)/2
int to_unit(Tape& tape, int y) { return tape.affine(y, real(0.5), real(0.5)); }

Mat ones(int rows, int cols) {
    Mat m(rows, cols);
    std::fill(m.a.begin(), m.a.end(), real(1));
    return m;
}

}  // namespace

ShadingNodes ShadingModel::tape_color(Tape& tape, int x_node, int z_node, const Mat& n_star,
                                      int n_node, const Mat& v) const {
    const int B = tape.val(x_node).rows;
    ShadingNodes out;
    if (spec_.unified) {
        int vc = tape.constant(v);
        int in = tape.concat(tape.concat(x_node, n_node), tape.concat(vc, z_node));
        out.color = to_unit(tape, r_.tape_forward(tape, in));
        return out;
    }
    int a_in = tape.concat(x_node, z_node);
    out.albedo = to_unit(tape, a_.tape_forward(tape, a_in));
    out.diffuse = to_unit(tape, d_.tape_forward_const(tape, n_star));
    int vc = tape.constant(v);
    out.specular = to_unit(tape, s_.tape_forward(tape, tape.concat(n_node, vc)));
    int diff_term = tape.row_scale(out.albedo, out.diffuse);
    int spec_rgb = tape.row_scale(tape.constant(ones(B, 3)), out.specular);
    out.color = tape.axpby(real(1), diff_term, spec_.a_s, spec_rgb);
    return out;
}

void ShadingModel::render(const Mat& x, const Mat& z, const Mat& n_star, const Mat& n,
                          const Mat& v, Mat& albedo, Mat& diffuse, Mat& specular,
                          Mat& color) const {
    const ParamStore& params = *params_;
    const int B = x.rows;
    auto map_unit = [](Mat& m) {
        for (real& u : m.a) u = (u + 1) / 2;
    };
    if (spec_.unified) {
        Mat in(B, 9 + spec_.feature_dim);
        for (int r = 0; r < B; ++r) {
            real* o = in.row(r);
            std::copy(x.row(r), x.row(r) + 3, o);
            std::copy(n.row(r), n.row(r) + 3, o + 3);
            std::copy(v.row(r), v.row(r) + 3, o + 6);
            std::copy(z.row(r), z.row(r) + z.cols, o + 9);
        }
        r_.forward(params, in, color);
        map_unit(color);
        albedo = Mat(B, 3);
        diffuse = Mat(B, 1);
        specular = Mat(B, 1);
        return;
    }
    Mat a_in(B, 3 + spec_.feature_dim);
    for (int r = 0; r < B; ++r) {
        std::copy(x.row(r), x.row(r) + 3, a_in.row(r));
        std::copy(z.row(r), z.row(r) + z.cols, a_in.row(r) + 3);
    }
    a_.forward(params, a_in, albedo);
    map_unit(albedo);
    d_.forward(params, n_star, diffuse);
    map_unit(diffuse);
    Mat s_in(B, 6);
    for (int r = 0; r < B; ++r) {
        std::copy(n.row(r), n.row(r) + 3, s_in.row(r));
        std::copy(v.row(r), v.row(r) + 3, s_in.row(r) + 3);
    }
    s_.forward(params, s_in, specular);
    map_unit(specular);
    color = Mat(B, 3);
    for (int r = 0; r < B; ++r)
        for (int c = 0; c < 3; ++c)
            color.at(r, c) = albedo.at(r, c) * diffuse.a[r] + spec_.a_s * specular.a[r];
}

}  // namespace relievo
