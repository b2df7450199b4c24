#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "relievo/adam.hpp"
#include "relievo/bvh.hpp"
#include "relievo/losses.hpp"
#include "relievo/scene.hpp"
#include "relievo/sdf_field.hpp"
#include "relievo/shading.hpp"

namespace relievo {

struct TrainConfig {
    int epochs = 400;
    real lr = 1e-4;
    // lr decays geometrically per epoch, reaching lr * lr_final_fraction at
    // the last epoch; 1 = constant
    real lr_final_fraction = 1;
    int batch_pixels = 2048;
    LossWeights weights;            // weights.alpha is the epoch-0 value
    int alpha_double_every = 100;   // epochs; 0 disables the schedule
    std::uint64_t seed = 1;
    int checkpoint_interval = 50;   // epochs; 0 = only at the end
    int eikonal_samples = 256;
    real boundary_fraction = 0.3;   // share of pixels from the silhouette band
    int boundary_band = 5;          // pixels
    SdfFieldSpec field;
    ShadingSpec shading;
    std::string out_dir;            // loss.csv + checkpoint.bin; empty = no disk output
};

// Per-ray result of tracing a whole pixel batch against the field at once.
// min_point is the along-ray minimizer of F seen during the march (silhouette
// supervision); for rays that never cross, the caller refines it with
// stratified samples.
struct BatchTrace {
    std::vector<char> hit;
    std::vector<Vec3> point;
    std::vector<real> t;
    std::vector<real> min_value;
    std::vector<Vec3> min_point;
};

BatchTrace batched_sphere_trace(const SdfField& field, const std::vector<Ray>& rays,
                                const std::vector<real>& t_min, const std::vector<real>& t_max,
                                const TraceOptions& opts = {});

struct StepStats {
    bool skipped = false;
    int n_rgb = 0;       // |P^rgb|
    real photo = 0, mask = 0, eikonal = 0, registration = 0, normal = 0, total = 0;
    real alpha = 0;
};

// Joint optimization of the SDF and shading parameters over a multi-view
// dataset (Eq. 6). One step consumes one view; one epoch visits every view
// once in shuffled order. Deterministic given the seed; checkpoints resume
// bit-identically (the RNG state rides along in the checkpoint).
class Trainer {
public:
    // resume_path empty: fresh sphere-initialized model.
    Trainer(Dataset dataset, TrainConfig config, const std::string& resume_path = "");

    // Train the remaining epochs (no-op if the checkpoint already reached
    // config.epochs). Throws after 50 consecutive zero-hit steps.
    void run();
    StepStats step(int view);  // exposed for tests
    void save(const std::string& path) const;

    int epoch() const { return epoch_; }
    long global_step() const { return global_step_; }
    real current_alpha() const;
    ParamStore& params() { return params_; }
    const SdfField& field() const { return *field_; }
    const ShadingModel& shading() const { return *shade_; }
    const Dataset& dataset() const { return dataset_; }

private:
    Dataset dataset_;
    TrainConfig cfg_;
    ParamStore params_;
    std::optional<SdfField> field_;
    std::optional<ShadingModel> shade_;
    std::optional<Adam> opt_;
    std::optional<Bvh> bvh_;
    std::mt19937_64 rng_;
    int epoch_ = 0;
    long global_step_ = 0;
    int consecutive_skips_ = 0;
    real bound_radius_ = 0;

    struct PixelPools {
        std::vector<int> interior, band;
    };
    std::vector<PixelPools> pools_;  // lazily built per view
    std::ofstream csv_;

    const PixelPools& pools_for(int view);
    void log_step(const StepStats& s);
};

// Field/shading specs serialized into checkpoint extras so extract/decompose
// can rebuild the model from the checkpoint alone.
std::map<std::string, std::string> spec_extras(const SdfFieldSpec& f, const ShadingSpec& s);
void parse_spec_extras(const std::map<std::string, std::string>& extra, SdfFieldSpec& f,
                       ShadingSpec& s);

}  // namespace relievo
