#pragma once

#include "relievo/mlp.hpp"

namespace relievo {

struct ShadingSpec {
    int hidden_width = 512;
    int feature_dim = 256;  // dim of z fed to A
    real a_s = 0.15;        // constant specular albedo, never optimized
    bool unified = false;   // ablation: one net replaces A, D, S
};

// On-tape node bundle for one batch of surface points.
struct ShadingNodes {
    int albedo = -1;    // B x 3
    int diffuse = -1;   // B x 1
    int specular = -1;  // B x 1
    int color = -1;     // B x 3, A*D + a_s*S (or the unified net's output)
};

// The appearance model: c = A(x, z) * D(n_star) + a_s * S(n, v), every
// network output tanh-mapped to [0,1] via (y+1)/2. D sees only the smooth
// coarse-mesh normal, S only the detailed SDF normal and view direction, so
// high-frequency, view-dependent residuals are pushed into the specular term.
class ShadingModel {
public:
    ShadingModel(ShadingSpec spec, ParamStore& params, const std::string& prefix = "shade");
    static ShadingModel attach(ShadingSpec spec, ParamStore& params,
                               const std::string& prefix = "shade");

    const ShadingSpec& spec() const { return spec_; }

    // Random init; S's output bias starts at -1.5 so the specular term opens
    // near zero and only grows where view-dependent residuals demand it.
    void init(std::mt19937_64& rng);

    // Tape path for training. n_star and v are step constants (B x 3);
    // x_node (differentiable intersection point), z_node (SDF feature) and
    // n_node (unit SDF normal) live on the tape, so photometric gradients
    // flow back into the field through A's and S's inputs.
    ShadingNodes tape_color(Tape& tape, int x_node, int z_node, const Mat& n_star,
                            int n_node, const Mat& v) const;

    // Inference path (decomposition, tests). Outputs per row of the inputs.
    // For the unified ablation only `color` is meaningful; the factor
    // outputs come back zero-sized or zero-filled.
    void render(const Mat& x, const Mat& z, const Mat& n_star, const Mat& n, const Mat& v,
                Mat& albedo, Mat& diffuse, Mat& specular, Mat& color) const;

private:
    ShadingSpec spec_;
    Mlp a_, d_, s_;      // unused when unified
    Mlp r_;              // unified net, unused otherwise
    ParamStore* params_;

    ShadingModel() = default;
    static MlpSpec a_spec(const ShadingSpec& s);
    static MlpSpec ds_spec(const ShadingSpec& s, int input_dim);
    static MlpSpec r_spec(const ShadingSpec& s);
};

}  // namespace relievo
