// relievo: recover surface details from multi-view images + a coarse mesh
// via a neural SDF and an implicit differentiable renderer, then emboss them
// back onto the mesh.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "relievo/checkpoint.hpp"
#include "relievo/evalkit.hpp"
#include "relievo/kernels.hpp"
#include "relievo/render.hpp"
#include "relievo/scene.hpp"
#include "relievo/trainer.hpp"
#include "relievo/transfer.hpp"

namespace fs = std::filesystem;
using namespace relievo;

namespace {

struct GenArgs {
    std::string scene = "sphere";
    std::string out;
    int views = 17;
    int res = 128;
    double max_yaw = 45;
    double max_pitch = 0;
    double distance = 3;
    double radius = 1;
    double coarse_radius = 0;
    double bump_amplitude = 0.05;
    double bump_freq = 8;
    double ks = 0;
    double shininess = 32;
    int subdiv = 4;
    std::uint64_t seed = 1;
};

void run_gen(const GenArgs& a) {
    SceneParams p;
    p.kind = scene_kind_from_string(a.scene);
    p.radius = a.radius;
    p.coarse_radius = a.coarse_radius;
    p.bump_amplitude = a.bump_amplitude;
    p.bump_freq = a.bump_freq;
    p.k_s = a.ks;
    p.shininess = a.shininess;
    AnalyticScene scene(p);
    RigOptions rig;
    rig.n_views = a.views;
    rig.max_yaw_deg = a.max_yaw;
    rig.max_pitch_deg = a.max_pitch;
    rig.distance = a.distance;
    rig.width = rig.height = a.res;
    export_dataset(scene, rig, a.out, a.subdiv);
    std::printf("wrote %d views to %s\n", a.views, a.out.c_str());
}

struct TrainArgs {
    std::string data, out, resume;
    int res = 0;
    TrainConfig cfg;
};

void dump_train_config(const CLI::App& app, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "config.ini");
    f << app.config_to_str(true, false);
}

void run_train(const TrainArgs& a) {
    Dataset ds = load_dataset(a.data);
    downscale(ds, a.res);
    TrainConfig cfg = a.cfg;
    cfg.out_dir = a.out;
    Trainer trainer(std::move(ds), cfg, a.resume);
    trainer.run();
    std::printf("trained to epoch %d (%ld steps)\n", trainer.epoch(), trainer.global_step());
}

// rebuild field (+ shading) from a checkpoint
struct LoadedModel {
    ParamStore params;
    SdfFieldSpec fspec;
    ShadingSpec sspec;
    std::optional<SdfField> field;
    std::optional<ShadingModel> shading;
};

void load_model(const std::string& path, LoadedModel& m) {
    CheckpointInfo info = load_checkpoint(path, m.params);
    parse_spec_extras(info.extra, m.fspec, m.sspec);
    m.field = SdfField::attach(m.fspec, m.params);
    m.shading = ShadingModel::attach(m.sspec, m.params);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"implicit-surface detail recovery"};
    app.require_subcommand(1);
    std::string backend = "auto";
    app.add_option("--backend", backend, "kernel backend: auto|scalar|avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    int threads = 1;
    app.add_option("--threads", threads, "worker cap (current build is single-threaded)");
    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "force single-shard execution");

    // --- gen ---
    GenArgs g;
    auto* gen = app.add_subcommand("gen", "synthesize a multi-view dataset");
    gen->add_option("--scene", g.scene, "sphere | bumpy-sphere | two-blob");
    gen->add_option("--out", g.out, "output directory")->required();
    gen->add_option("--views", g.views);
    gen->add_option("--res", g.res, "image width = height");
    gen->add_option("--max-yaw", g.max_yaw, "degrees");
    gen->add_option("--max-pitch", g.max_pitch, "degrees");
    gen->add_option("--distance", g.distance, "camera distance");
    gen->add_option("--radius", g.radius, "base shape radius");
    gen->add_option("--coarse-radius", g.coarse_radius, "coarse mesh radius (0 = base)");
    gen->add_option("--bump-amplitude", g.bump_amplitude);
    gen->add_option("--bump-freq", g.bump_freq);
    gen->add_option("--ks", g.ks, "specular coefficient");
    gen->add_option("--shininess", g.shininess);
    gen->add_option("--subdiv", g.subdiv, "coarse icosphere subdivisions");
    gen->add_option("--seed", g.seed);

    // --- train ---
    TrainArgs t;
    auto* train = app.add_subcommand("train", "optimize the SDF + shading model");
    train->set_config("--config", "", "read options from an INI file");
    train->add_option("--data", t.data, "dataset directory")->required();
    train->add_option("--out", t.out, "run directory (logs, checkpoints)")->required();
    train->add_option("--resume", t.resume, "checkpoint to resume from");
    train->add_option("--res", t.res, "downscale images to res x res before training");
    train->add_option("--epochs", t.cfg.epochs);
    train->add_option("--lr", t.cfg.lr);
    train->add_option("--lr-final-fraction", t.cfg.lr_final_fraction,
                      "geometric lr decay target as a fraction of --lr (1 = constant)");
    train->add_option("--batch", t.cfg.batch_pixels, "pixels per step");
    train->add_option("--eta1", t.cfg.weights.eta1, "mask weight");
    train->add_option("--eta2", t.cfg.weights.eta2, "eikonal weight");
    train->add_option("--eta3", t.cfg.weights.eta3, "registration weight");
    train->add_option("--eta4", t.cfg.weights.eta4, "normal weight");
    train->add_option("--alpha", t.cfg.weights.alpha, "initial silhouette sharpness");
    train->add_option("--alpha-double-every", t.cfg.alpha_double_every, "epochs (0 = never)");
    train->add_option("--seed", t.cfg.seed);
    train->add_option("--checkpoint-interval", t.cfg.checkpoint_interval, "epochs");
    train->add_option("--eikonal-samples", t.cfg.eikonal_samples);
    train->add_option("--width", t.cfg.field.width, "SDF hidden width");
    train->add_option("--depth", t.cfg.field.depth, "SDF layer count");
    train->add_option("--feature-dim", t.cfg.field.feature_dim);
    train->add_option("--pe-freqs", t.cfg.field.pe_freqs);
    train->add_option("--shading-width", t.cfg.shading.hidden_width);
    train->add_option("--a-s", t.cfg.shading.a_s, "constant specular albedo");
    train->add_flag("--ablate-pbidr", t.cfg.shading.unified,
                    "replace A,D,S by one appearance network");

    // --- extract ---
    std::string x_ckpt, x_coarse, x_out;
    TransferOptions x_opts;
    bool x_flip = false;
    auto* extract = app.add_subcommand("extract", "emboss details onto the coarse mesh");
    extract->add_option("--checkpoint", x_ckpt)->required();
    extract->add_option("--coarse", x_coarse, "coarse OBJ")->required();
    extract->add_option("--out", x_out, "output OBJ")->required();
    extract->add_option("--clamp-fraction", x_opts.clamp_fraction);
    extract->add_flag("--pull-mode", x_opts.pull_mode, "displace along grad F");
    extract->add_flag("--flip-convention", x_flip, "treat the field as positive inside");

    // --- decompose / render ---
    std::string d_ckpt, d_data, d_out;
    int d_view = 0;
    auto* decompose = app.add_subcommand("decompose", "render + appearance factor images");
    auto* render = app.add_subcommand("render", "render one view of the trained model");
    for (auto* sc : {decompose, render}) {
        sc->add_option("--checkpoint", d_ckpt)->required();
        sc->add_option("--data", d_data, "dataset directory (cameras + coarse mesh)")->required();
        sc->add_option("--view", d_view);
        sc->add_option("--out", d_out, "output directory")->required();
    }

    // --- eval ---
    std::string e_src, e_ref, e_out;
    EvalOptions e_opts;
    std::vector<double> e_crop_center;
    double e_crop_radius = 0;
    bool e_no_icp = false;
    auto* eval = app.add_subcommand("eval", "compare two meshes");
    eval->add_option("--source", e_src)->required();
    eval->add_option("--reference", e_ref)->required();
    eval->add_option("--out", e_out, "report JSON path");
    eval->add_flag("--no-icp", e_no_icp);
    eval->add_option("--icp-iterations", e_opts.icp_iterations);
    eval->add_option("--samples", e_opts.samples);
    eval->add_option("--seed", e_opts.seed);
    eval->add_option("--crop-center", e_crop_center, "x y z")->expected(3);
    eval->add_option("--crop-radius", e_crop_radius);

    CLI11_PARSE(app, argc, argv);

    try {
        kern::force_backend(backend);
        if (gen->parsed()) run_gen(g);
        if (train->parsed()) {
            run_train(t);
            dump_train_config(app, t.out);
        }
        if (extract->parsed()) {
            LoadedModel m;
            load_model(x_ckpt, m);
            TriMesh coarse = load_obj(x_coarse);
            x_opts.positive_outside = !x_flip;
            DisplacementReport rep;
            TriMesh fine = transfer_details(*m.field, coarse, x_opts, rep);
            save_obj(fine, x_out);
            std::ofstream(fs::path(x_out).replace_extension(".displacement.json"))
                << rep.to_json();
            std::printf("displaced %zu vertices (mean |d| = %g, %d clamped)\n",
                        rep.displacement.size(), double(rep.mean_abs), rep.clamped);
        }
        if (decompose->parsed() || render->parsed()) {
            LoadedModel m;
            load_model(d_ckpt, m);
            Dataset ds = load_dataset(d_data);
            if (d_view < 0 || d_view >= int(ds.cameras.size()))
                throw CLI::ValidationError("--view", "view index out of range");
            Bvh bvh(ds.coarse);
            Vec3 c;
            real r;
            ds.coarse.bounding_sphere(c, r);
            Decomposition dec =
                decompose_view(*m.field, *m.shading, bvh, ds.cameras[d_view], length(c) + r);
            fs::create_directories(d_out);
            save_png(dec.rendered, (fs::path(d_out) / "rendered.png").string());
            if (decompose->parsed()) {
                save_png(dec.albedo, (fs::path(d_out) / "albedo.png").string());
                save_png(dec.diffuse, (fs::path(d_out) / "diffuse.png").string());
                save_png(dec.specular, (fs::path(d_out) / "specular.png").string());
                save_png(dec.mask, (fs::path(d_out) / "mask.png").string());
            }
            std::printf("wrote view %d to %s\n", d_view, d_out.c_str());
        }
        if (eval->parsed()) {
            e_opts.run_icp = !e_no_icp;
            if (e_crop_radius > 0) {
                e_opts.crop = true;
                e_opts.crop_radius = e_crop_radius;
                if (e_crop_center.size() == 3)
                    e_opts.crop_center = {real(e_crop_center[0]), real(e_crop_center[1]),
                                          real(e_crop_center[2])};
            }
            EvalReport rep = evaluate(load_obj(e_src), load_obj(e_ref), e_opts);
            std::cout << rep.to_table();
            if (!e_out.empty()) std::ofstream(e_out) << rep.to_json();
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
