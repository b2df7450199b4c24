#pragma once

#include <optional>

#include "relievo/mlp.hpp"
#include "relievo/trace.hpp"

namespace relievo {

struct SdfFieldSpec {
    int depth = 8;        // weight layers
    int width = 512;      // hidden width
    int skip_at = 4;      // input re-fed to this layer
    int pe_freqs = 6;     // positional-encoding L
    int feature_dim = 256;  // dim(z)
    real softplus_beta = 100;

    MlpSpec to_mlp_spec() const;
};

// Learnable signed-distance field F: R^3 -> (s, z) with positive-outside
// convention after sphere initialization.
class SdfField : public ScalarField {
public:
    SdfField(SdfFieldSpec spec, ParamStore& params, const std::string& prefix = "sdf");
    static SdfField attach(SdfFieldSpec spec, ParamStore& params,
                           const std::string& prefix = "sdf");

    const SdfFieldSpec& field_spec() const { return spec_; }
    const Mlp& mlp() const { return mlp_; }

    // Initialize so the zero level set approximates a sphere of `radius`.
    void init_sphere(std::mt19937_64& rng, real radius = 1);

    // --- batched inference ---
    // X: B x 3. s: B x 1 signed distances; z: B x feature_dim.
    void eval(const Mat& X, Mat& s, Mat& z) const;
    // s plus raw spatial gradients (B x 3).
    void eval_with_gradient(const Mat& X, Mat& s, Mat& grad) const;

    // --- single-point (ScalarField) ---
    real value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;

    // Unit normal; nullopt when the gradient degenerates (norm <= 1e-8).
    std::optional<Vec3> normal(const Vec3& x) const;
    // Newton pull toward the zero level set: x - F(x) grad/|grad|^2.
    std::optional<Vec3> pull_to_surface(const Vec3& x) const;

private:
    SdfFieldSpec spec_;
    Mlp mlp_;
    ParamStore* params_;

    SdfField() = default;
};

}  // namespace relievo
