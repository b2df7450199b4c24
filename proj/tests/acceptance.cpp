// Acceptance gate: eight end-to-end criteria, one per invocation
// (`acceptance N`), each printing a single `[criterion N] PASS|FAIL` line
// plus the measured numbers behind the verdict. Training runs cache their
// datasets and checkpoints under ./acceptance_cache (override with
// RELIEVO_ACCEPT_CACHE), so re-runs only re-measure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "relievo/checkpoint.hpp"
#include "relievo/evalkit.hpp"
#include "relievo/losses.hpp"
#include "relievo/render.hpp"
#include "relievo/trainer.hpp"
#include "relievo/transfer.hpp"

using namespace relievo;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- utilities

fs::path cache_root() {
    if (const char* env = std::getenv("RELIEVO_ACCEPT_CACHE")) return env;
    return "acceptance_cache";
}

struct Check {
    bool ok = true;
    void require(bool cond, const std::string& what) {
        std::printf("  %-58s %s\n", what.c_str(), cond ? "ok" : "FAILED");
        ok = ok && cond;
    }
};

int verdict(int crit, const Check& c) {
    std::printf("[criterion %d] %s\n", crit, c.ok ? "PASS" : "FAIL");
    return c.ok ? 0 : 1;
}

Dataset ensure_dataset(const std::string& name, const SceneParams& scene, const RigOptions& rig,
                       int coarse_subdiv = 4) {
    const fs::path dir = cache_root() / name;
    if (!fs::exists(dir / "cameras.json")) {
        std::printf("  exporting dataset %s (%d views, %dx%d)\n", name.c_str(), rig.n_views,
                    rig.width, rig.height);
        export_dataset(AnalyticScene(scene), rig, dir.string(), coarse_subdiv);
    }
    return load_dataset(dir.string());
}

// Train to cfg.epochs, resuming from the cached checkpoint when present.
std::unique_ptr<Trainer> ensure_trained(const std::string& name, const Dataset& ds,
                                        TrainConfig cfg) {
    const fs::path out = cache_root() / ("run_" + name);
    cfg.out_dir = out.string();
    const fs::path ckpt = out / "checkpoint.bin";
    std::unique_ptr<Trainer> t;
    if (fs::exists(ckpt))
        t = std::make_unique<Trainer>(ds, cfg, ckpt.string());
    else
        t = std::make_unique<Trainer>(ds, cfg);
    if (t->epoch() < cfg.epochs)
        std::printf("  training %s: epoch %d -> %d\n", name.c_str(), t->epoch(), cfg.epochs);
    t->run();
    return t;
}

// Shared network sizing for the trained criteria. The criteria pin views,
// resolution, and epochs; widths are chosen for single-core CPU budgets.
TrainConfig accept_config(int epochs, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    // few-thousand-step budget: a higher rate than the long-haul default,
    // plus a faster silhouette-sharpness ramp
    cfg.lr = 1e-3;
    cfg.lr_final_fraction = 0.05;  // settle the Adam noise floor by the end
    cfg.alpha_double_every = 20;
    cfg.weights.eta2 = 1;  // metric field in few epochs; traces and pulls rely on it
    // the synthetic template is deliberately offset from the true surface,
    // so the along-ray registration term carries an irreducible residual;
    // keep it as a soft anchor rather than a hard constraint
    cfg.weights.eta3 = 0.1;
    cfg.batch_pixels = 512;
    cfg.eikonal_samples = 256;
    cfg.field.width = 128;
    cfg.field.feature_dim = 64;
    cfg.field.pe_freqs = 6;
    cfg.shading.hidden_width = 128;
    cfg.shading.feature_dim = 64;
    cfg.seed = seed;
    return cfg;
}

// Full-orbit rig: the default narrow yaw fan leaves the object's far side
// unsupervised, which no amount of training can fix.
RigOptions accept_rig(int views, int res) {
    RigOptions rig;
    rig.n_views = views;
    rig.width = rig.height = res;
    rig.max_yaw_deg = 170;
    rig.max_pitch_deg = 15;
    return rig;
}

// Detail transfer with a Newton-style second pass (the transfer is
// idempotent, so the second pass only polishes residual SDF error).
TriMesh extract_fine(const SdfField& field, const TriMesh& coarse, int passes = 2) {
    TransferOptions opts;
    opts.clamp_fraction = 0.1;
    TriMesh m = coarse;
    for (int i = 0; i < passes; ++i) {
        DisplacementReport rep;
        m = transfer_details(field, m, opts, rep);
    }
    return m;
}

real mean_abs_radius_err(const TriMesh& m, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    real sum = 0;
    auto pts = sample_surface(m, samples, rng);
    for (const auto& s : pts) sum += std::abs(length(s.position) - 1);
    return sum / std::max<size_t>(1, pts.size());
}

real mean_p2s(const TriMesh& src, const TriMesh& ref, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Bvh bvh(ref);
    real sum = 0;
    auto pts = sample_surface(src, samples, rng);
    for (const auto& s : pts) sum += bvh.closest_point(s.position).dist;
    return sum / std::max<size_t>(1, pts.size());
}

real mean_eikonal_residual(const SdfField& field, real radius, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<real> u(-radius, radius);
    Mat X(n, 3);
    for (int i = 0; i < n;) {
        Vec3 p{u(rng), u(rng), u(rng)};
        if (length(p) > radius) continue;
        X.at(i, 0) = p.x;
        X.at(i, 1) = p.y;
        X.at(i, 2) = p.z;
        ++i;
    }
    Mat s, g;
    field.eval_with_gradient(X, s, g);
    real sum = 0;
    for (int i = 0; i < n; ++i) {
        const real norm = std::sqrt(g.at(i, 0) * g.at(i, 0) + g.at(i, 1) * g.at(i, 1) +
                                    g.at(i, 2) * g.at(i, 2));
        sum += std::abs(norm - 1);
    }
    return sum / n;
}

Mat random_mat(int r, int c, std::mt19937_64& rng, real s = 1) {
    std::normal_distribution<real> d(0, s);
    Mat m(r, c);
    for (real& v : m.a) v = d(rng);
    return m;
}

// ------------------------------------------------------------- criterion 1

// Parameter gradients of each loss term on a small random model vs central
// finite differences, through the full training graph (differentiable
// intersection, pull, on-tape normals => second-order paths through grad F).
int criterion1() {
    Check c;
    std::mt19937_64 rng(101);
    ParamStore ps;
    SdfFieldSpec fspec;
    fspec.depth = 4;
    fspec.width = 14;
    fspec.skip_at = 2;
    fspec.pe_freqs = 1;
    fspec.feature_dim = 4;
    fspec.softplus_beta = 10;
    SdfField field(fspec, ps, "sdf");
    field.init_sphere(rng, 1);
    ShadingSpec sspec;
    sspec.hidden_width = 10;
    sspec.feature_dim = 4;
    sspec.a_s = 0.2;
    ShadingModel shade(sspec, ps, "shade");
    shade.init(rng);

    const int B = 4, P = 6;
    std::normal_distribution<real> d(0, 1);
    Mat X0(B, 3), V(B, 3), Xstar(B, 3), Nstar(B, 3), I(B, 3), M(B, 1);
    for (int i = 0; i < B; ++i) {
        Vec3 dir = normalized({d(rng), d(rng), d(rng)});
        Vec3 p = dir * real(1.0 + 0.05 * d(rng));
        X0.at(i, 0) = p.x; X0.at(i, 1) = p.y; X0.at(i, 2) = p.z;
        Vec3 v = normalized(dir * real(-1) + Vec3{d(rng), d(rng), d(rng)} * real(0.2));
        V.at(i, 0) = v.x; V.at(i, 1) = v.y; V.at(i, 2) = v.z;
        Vec3 q = dir * real(1.07);
        Xstar.at(i, 0) = q.x; Xstar.at(i, 1) = q.y; Xstar.at(i, 2) = q.z;
        Nstar.at(i, 0) = dir.x; Nstar.at(i, 1) = dir.y; Nstar.at(i, 2) = dir.z;
        I.at(i, 0) = 0.6; I.at(i, 1) = 0.4; I.at(i, 2) = 0.2;
        M.a[i] = 1;
    }
    Mat Xmin = random_mat(3, 3, rng, real(0.4));
    Mat Wm(3, 1);
    Wm.a = {1, 1, 1};
    Mat Xe = random_mat(5, 3, rng, real(0.8));

    // frozen denominator of the differentiable intersection, by definition
    // evaluated once at theta_0
    Mat denom(B, 1);
    {
        Mat s_, g_;
        field.eval_with_gradient(X0, s_, g_);
        for (int i = 0; i < B; ++i)
            denom.a[i] = g_.at(i, 0) * V.at(i, 0) + g_.at(i, 1) * V.at(i, 1) +
                         g_.at(i, 2) * V.at(i, 2);
    }

    // builds the requested loss term on a fresh tape
    auto build = [&](Tape& t, int term) {
        int out0, g0;
        field.mlp().tape_forward_with_spatial_grad(t, X0, out0, g0);
        switch (term) {
            case 0: {  // photometric (includes x_p and unit-normal paths)
                int s0 = t.slice_cols(out0, 0, 1);
                int z0 = t.slice_cols(out0, 1, fspec.feature_dim);
                int xp = intersection_node(t, s0, X0, V, denom);
                int n_unit =
                    t.row_scale(g0, t.recip(t.clamp_min(t.row_norm(g0), real(1e-12))));
                ShadingNodes sh = shade.tape_color(t, xp, z0, Nstar, n_unit, V);
                return photometric_loss(t, sh.color, I, M, P);
            }
            case 1: {  // mask
                int outm = field.mlp().tape_forward_const(t, Xmin);
                return mask_loss(t, t.slice_cols(outm, 0, 1), Wm, 50, P);
            }
            case 2: {  // eikonal (pure second-order path)
                int oute, ge;
                field.mlp().tape_forward_with_spatial_grad(t, Xe, oute, ge);
                (void)oute;
                return eikonal_loss(t, ge);
            }
            case 3: {  // registration (intersection + pull, both second order)
                int s0 = t.slice_cols(out0, 0, 1);
                int xp = intersection_node(t, s0, X0, V, denom);
                int outs, gs;
                field.mlp().tape_forward_with_spatial_grad(t, Xstar, outs, gs);
                int pulled = pull_node(t, t.slice_cols(outs, 0, 1), gs, Xstar);
                return registration_loss(t, xp, pulled, P);
            }
            default:  // normal (raw grad F vs coarse normal)
                return normal_loss(t, g0, Nstar, P);
        }
    };

    const char* names[] = {"photometric", "mask", "eikonal", "registration", "normal"};
    const real h = 1e-6;
    for (int term = 0; term < 5; ++term) {
        ps.zero_grads();
        {
            Tape t(ps);
            t.backward(build(t, term));
        }
        auto eval = [&]() {
            Tape t(ps);
            return t.scalar(build(t, term));
        };
        std::mt19937_64 pick(7 + term);
        int checked = 0;
        real worst = 0;
        bool all_ok = true;
        for (int id = 0; id < ps.count(); ++id) {
            std::uniform_int_distribution<size_t> sel(0, ps[id].size() - 1);
            for (int k = 0; k < 3; ++k) {
                const size_t i = sel(pick);
                const real save = ps[id].v[i];
                ps[id].v[i] = save + h;
                const real fp = eval();
                ps[id].v[i] = save - h;
                const real fm = eval();
                ps[id].v[i] = save;
                const real fd = (fp - fm) / (2 * h);
                // relative to the gradient magnitude, guarded against FD
                // noise on near-zero entries
                const real rel = std::abs(ps[id].g[i] - fd) / std::max(std::abs(fd), real(1e-4));
                worst = std::max(worst, rel);
                all_ok = all_ok && rel < real(1e-4);
                ++checked;
            }
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s: %d params, worst rel err %.2e < 1e-4",
                      names[term], checked, double(worst));
        c.require(all_ok && checked > 30, buf);
    }
    return verdict(1, c);
}

// ------------------------------------------------------------- criterion 2

int criterion2() {
    Check c;
    SceneParams sp;
    sp.kind = SceneKind::Sphere;
    AnalyticScene sphere(sp);
    std::mt19937_64 rng(202);
    std::normal_distribution<real> d(0, 1);
    std::uniform_real_distribution<real> u01(0, 1);

    // sphere tracing vs analytic ray-sphere intersection
    {
        TraceOptions opts;
        opts.hit_eps = 1e-7;
        real worst = 0;
        int hits = 0;
        for (int i = 0; i < 300; ++i) {
            Vec3 origin = normalized(Vec3{d(rng), d(rng), d(rng)}) * real(3);
            std::uniform_real_distribution<real> tgt(-0.3, 0.3);
            Vec3 target{tgt(rng), tgt(rng), tgt(rng)};
            Ray ray{origin, normalized(target - origin)};
            // analytic first root of |o + t d|^2 = 1
            const real b = dot(ray.origin, ray.dir);
            const real cc = dot(ray.origin, ray.origin) - 1;
            const real disc = b * b - cc;
            if (disc <= 0) continue;
            const real t_true = -b - std::sqrt(disc);
            TraceResult tr = sphere_trace(sphere, ray, 0.5, 6, opts);
            if (!tr.hit) continue;
            ++hits;
            worst = std::max(worst, std::abs(tr.t - t_true));
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "sphere trace: %d hits, worst |dt| %.2e < 1e-5", hits,
                      double(worst));
        c.require(hits >= 295 && worst < 1e-5, buf);
    }

    // BVH vs brute force, 10^4 rays, exact face id, t within 1e-9
    {
        TriMesh blob = make_icosphere(3);
        for (auto& v : blob.vertices) {
            v.y *= real(0.8);
            v.z *= real(0.6);
        }
        blob.recompute_vertex_normals();
        Bvh bvh(blob);
        int mism = 0, hits = 0;
        real worst_t = 0;
        for (int i = 0; i < 10000; ++i) {
            Vec3 origin = normalized(Vec3{d(rng), d(rng), d(rng)}) * real(3);
            Vec3 target{real(2 * u01(rng) - 1), real(2 * u01(rng) - 1), real(2 * u01(rng) - 1)};
            Ray ray{origin, normalized(target - origin)};
            MeshHit a = bvh.intersect(ray);
            MeshHit b = brute_force_intersect(blob, ray);
            if (a.hit != b.hit) { ++mism; continue; }
            if (!a.hit) continue;
            ++hits;
            if (a.face != b.face) ++mism;
            worst_t = std::max(worst_t, std::abs(a.t - b.t));
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "bvh: 10000 rays (%d hits), %d mismatches, worst |dt| %.2e < 1e-9", hits,
                      mism, double(worst_t));
        c.require(mism == 0 && hits > 3000 && worst_t < 1e-9, buf);
    }

    // pull_to_surface vs Euclidean projection on the analytic sphere
    {
        real worst = 0;
        for (int i = 0; i < 500; ++i) {
            Vec3 dir = normalized(Vec3{d(rng), d(rng), d(rng)});
            Vec3 x = dir * real(0.3 + 1.7 * u01(rng));
            auto pulled = pull_to_surface(sphere, x);
            if (!pulled) { worst = 1; break; }
            worst = std::max(worst, length(*pulled - dir));
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "pull vs projection: worst err %.2e < 1e-6",
                      double(worst));
        c.require(worst < 1e-6, buf);
    }

    // ICP recovery of a synthetic rigid perturbation
    {
        TriMesh blob = make_icosphere(3);
        for (auto& v : blob.vertices) {
            v.y *= real(0.7);
            v.z *= real(0.5);
        }
        blob.recompute_vertex_normals();
        Mat3 R = Mat3::axis_angle(normalized({1, -2, 1.5}), real(8 * M_PI / 180));
        Vec3 t{0.05, -0.03, 0.02};
        TriMesh moved = blob;
        for (auto& v : moved.vertices) v = R * v + t;
        moved.recompute_vertex_normals();
        IcpResult r = rigid_icp(moved, blob, 50, 3000, 1);
        Mat3 RR = r.transform.R * R;
        Vec3 tt = r.transform.R * t + r.transform.t;
        real dev = 0;
        for (int i = 0; i < 9; ++i)
            dev = std::max(dev, std::abs(RR.m[i] - (i % 4 == 0 ? 1 : 0)));
        dev = std::max(dev, length(tt));
        char buf[128];
        std::snprintf(buf, sizeof(buf), "icp rigid recovery: residual %.2e < 1e-3", double(dev));
        c.require(dev < 1e-3, buf);
    }
    return verdict(2, c);
}

// ------------------------------------------------------------- criterion 3

int criterion3() {
    Check c;
    SceneParams sp;
    sp.kind = SceneKind::Sphere;
    sp.coarse_radius = 1.05;
    Dataset ds = ensure_dataset("c3_sphere", sp, accept_rig(17, 128));
    auto t = ensure_trained("c3", ds, accept_config(100, 11));

    TriMesh fine = extract_fine(t->field(), ds.coarse);
    const real p2s = mean_abs_radius_err(fine, 40000, 31);
    // ball covering the surface and interior, inside the trained domain
    const real eik = mean_eikonal_residual(t->field(), real(1.1), 20000, 32);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "G_f mean point-to-surface %.2e < 5e-3", double(p2s));
    c.require(p2s < 5e-3, buf);
    std::snprintf(buf, sizeof(buf), "mean eikonal residual %.3f < 0.05", double(eik));
    c.require(eik < 0.05, buf);
    return verdict(3, c);
}

// ------------------------------------------------------------- criterion 4

SceneParams bumpy_params() {
    SceneParams sp;
    sp.kind = SceneKind::BumpySphere;
    sp.bump_amplitude = 0.05;
    sp.bump_freq = 8;
    return sp;
}

int criterion4() {
    Check c;
    Dataset ds = ensure_dataset("c4_bumpy", bumpy_params(), accept_rig(17, 256));
    auto t = ensure_trained("c4", ds, accept_config(400, 12));

    TriMesh gt = load_obj((cache_root() / "c4_bumpy" / "gt.obj").string());
    TriMesh fine = extract_fine(t->field(), ds.coarse);
    const real nc_fine = normal_cosine_distance(fine, gt, 20000, 41);
    const real nc_coarse = normal_cosine_distance(ds.coarse, gt, 20000, 41);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "normal cosine: G_f %.4f vs coarse %.4f (need >= 20%% lower)",
                  double(nc_fine), double(nc_coarse));
    c.require(nc_fine <= real(0.8) * nc_coarse, buf);
    return verdict(4, c);
}

// ------------------------------------------------------------- criterion 5

int criterion5() {
    Check c;
    SceneParams sp;
    sp.kind = SceneKind::Sphere;
    sp.coarse_radius = 1.05;
    const int counts[] = {1, 3, 9, 17};
    std::vector<real> errs;
    for (int n : counts) {
        const std::string name = "c5_v" + std::to_string(n);
        Dataset ds = ensure_dataset(name, sp, accept_rig(n, 64));
        auto t = ensure_trained(name, ds, accept_config(100, 13));
        TriMesh fine = extract_fine(t->field(), ds.coarse);
        errs.push_back(mean_abs_radius_err(fine, 40000, 51));
        std::printf("  %2d views: p2s %.3e\n", n, double(errs.back()));
    }
    bool mono = true;
    for (size_t i = 1; i < errs.size(); ++i) mono = mono && errs[i] <= errs[i - 1];
    c.require(mono, "point-to-surface error non-increasing in view count");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "1-view %.3e >= 2x 17-view %.3e", double(errs.front()),
                  double(errs.back()));
    c.require(errs.front() >= 2 * errs.back(), buf);
    return verdict(5, c);
}

// ------------------------------------------------------------- criterion 6

int criterion6() {
    Check c;
    // Specular bumpy sphere: view-dependent highlights are where the
    // decomposition (constant a_s, no view input to A) constrains geometry
    // and the unified appearance network can cheat through its v input.
    SceneParams sp = bumpy_params();
    sp.k_s = 0.3;
    sp.shininess = 8;
    Dataset ds = ensure_dataset("c6_bumpy", sp, accept_rig(9, 96));
    TriMesh gt = load_obj((cache_root() / "c6_bumpy" / "gt.obj").string());

    TrainConfig base = accept_config(100, 14);
    base.shading.a_s = 0.3;
    // Soft normal anchor: the synthetic coarse template's normals are wrong
    // at the bump scale, so a full-strength normal loss suppresses the very
    // detail under test (same reasoning as eta3 = 0.1).
    base.weights.eta4 = 0.1;
    auto full = ensure_trained("c6_full", ds, base);
    // The "plain implicit function" baseline: one unified appearance network
    // and no coarse-mesh supervision (registration and normal losses off).
    TrainConfig uni = base;
    uni.shading.unified = true;
    uni.weights.eta3 = 0;
    uni.weights.eta4 = 0;
    auto unified = ensure_trained("c6_unified", ds, uni);
    TrainConfig noreg = base;
    noreg.weights.eta3 = 0;
    auto ablated = ensure_trained("c6_noreg", ds, noreg);

    auto nc = [&](const Trainer& t) {
        return normal_cosine_distance(extract_fine(t.field(), ds.coarse), gt, 20000, 61);
    };
    auto p2s = [&](const Trainer& t) {
        return mean_p2s(extract_fine(t.field(), ds.coarse), gt, 20000, 62);
    };
    const real nc_full = nc(*full), nc_uni = nc(*unified);
    const real p_full = p2s(*full), p_noreg = p2s(*ablated);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "unified ablation normal cosine %.4f >= 1.15 x full %.4f", double(nc_uni),
                  double(nc_full));
    c.require(nc_uni >= real(1.15) * nc_full, buf);
    std::snprintf(buf, sizeof(buf), "eta3=0 point-to-surface %.3e > default %.3e",
                  double(p_noreg), double(p_full));
    c.require(p_noreg > p_full, buf);
    return verdict(6, c);
}

// ------------------------------------------------------------- criterion 7

int criterion7() {
    Check c;
    auto scene = [](real ks) {
        SceneParams sp;
        sp.kind = SceneKind::Sphere;
        sp.albedo = {0.5, 0.5, 0.5};
        sp.k_s = ks;
        sp.shininess = 8;  // broad highlight so the specular share is visible
        return sp;
    };
    const RigOptions rig = accept_rig(17, 128);

    auto eval_run = [&](const std::string& name, real ks, real a_s, real& share,
                        int& worst_level) {
        Dataset ds = ensure_dataset(name, scene(ks), rig);
        TrainConfig cfg = accept_config(100, 15);
        cfg.shading.a_s = a_s;
        auto t = ensure_trained(name, ds, cfg);
        Vec3 cc;
        real br;
        ds.coarse.bounding_sphere(cc, br);
        Bvh bvh(ds.coarse);
        Decomposition dec = decompose_view(t->field(), t->shading(), bvh,
                                           ds.cameras[ds.cameras.size() / 2], br);
        real spec = 0, total = 0;
        worst_level = 0;
        const int W = dec.rendered.width, H = dec.rendered.height;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                if (dec.mask.at(x, y)[0] < real(0.5)) continue;
                const real S = dec.specular.at(x, y)[0];
                const real D = dec.diffuse.at(x, y)[0];
                spec += 3 * a_s * S;
                for (int ch = 0; ch < 3; ++ch) {
                    const real C = dec.rendered.at(x, y)[ch];
                    total += C;
                    // recomposition from the quantized factor maps
                    const real qA = quantize8(dec.albedo.at(x, y)[ch]) / real(255);
                    const real qD = quantize8(D) / real(255);
                    const real qS = quantize8(S) / real(255);
                    const int rq = quantize8(qA * qD + a_s * qS);
                    const int cq = quantize8(C);
                    worst_level = std::max(worst_level, std::abs(rq - cq));
                }
            }
        share = total > 0 ? spec / total : 0;
    };

    real share0 = 0, share3 = 0;
    int lvl0 = 0, lvl3 = 0;
    eval_run("c7_ks0", 0, real(0.15), share0, lvl0);
    eval_run("c7_ks3", real(0.3), real(0.3), share3, lvl3);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "k_s=0:   specular energy share %.3f < 0.05",
                  double(share0));
    c.require(share0 < 0.05, buf);
    std::snprintf(buf, sizeof(buf), "k_s=0.3: specular energy share %.3f > 0.05",
                  double(share3));
    c.require(share3 > 0.05, buf);
    std::snprintf(buf, sizeof(buf),
                  "recomposition A*D + a_s*S within 1/255 (worst %d, %d levels)", lvl0, lvl3);
    c.require(lvl0 <= 1 && lvl3 <= 1, buf);
    return verdict(7, c);
}

// ------------------------------------------------------------- criterion 8

bool same_file_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::vector<char> ba((std::istreambuf_iterator<char>(fa)), {});
    std::vector<char> bb((std::istreambuf_iterator<char>(fb)), {});
    return ba == bb;
}

bool same_tree_bytes(const fs::path& a, const fs::path& b, int& files) {
    files = 0;
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
    for (const auto& r : rel) {
        if (!same_file_bytes(a / r, b / r)) return false;
        ++files;
    }
    return !rel.empty();
}

int criterion8() {
    Check c;
    const fs::path root = cache_root() / "c8";
    fs::remove_all(root);
    fs::create_directories(root);

    SceneParams sp;
    sp.kind = SceneKind::Sphere;
    sp.coarse_radius = 1.05;
    RigOptions rig;
    rig.n_views = 3;
    rig.width = rig.height = 32;
    AnalyticScene scene(sp);

    // dataset re-export byte-identical
    export_dataset(scene, rig, (root / "ds_a").string(), 2);
    export_dataset(scene, rig, (root / "ds_b").string(), 2);
    int files = 0;
    const bool tree_ok = same_tree_bytes(root / "ds_a", root / "ds_b", files);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "dataset re-export byte-identical (%d files)", files);
    c.require(tree_ok, buf);

    // identical fresh runs write byte-identical checkpoints
    Dataset ds = load_dataset((root / "ds_a").string());
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_pixels = 64;
    cfg.eikonal_samples = 32;
    cfg.field.width = 16;
    cfg.field.feature_dim = 8;
    cfg.field.pe_freqs = 2;
    cfg.shading.hidden_width = 8;
    cfg.shading.feature_dim = 8;
    cfg.seed = 5;
    {
        Trainer a(ds, cfg), b(ds, cfg);
        a.run();
        b.run();
        a.save((root / "ck_a.bin").string());
        b.save((root / "ck_b.bin").string());
    }
    c.require(same_file_bytes(root / "ck_a.bin", root / "ck_b.bin"),
              "same-seed training reproduces checkpoint bytes");

    // checkpoint/restore resume is bit-identical to an uninterrupted run
    {
        TrainConfig four = cfg;
        four.epochs = 4;
        Trainer resumed(ds, four, (root / "ck_a.bin").string());
        resumed.run();
        Trainer straight(ds, four);
        straight.run();
        ParamStore& pa = resumed.params();
        ParamStore& pb = straight.params();
        bool same = pa.count() == pb.count() &&
                    resumed.global_step() == straight.global_step();
        for (int i = 0; same && i < pa.count(); ++i)
            same = pa[i].name == pb[i].name && pa[i].v == pb[i].v;
        c.require(same, "resumed run bit-identical to uninterrupted run");
    }

    // OBJ round trip lossless to 1e-12
    {
        TriMesh blob = make_icosphere(3);
        for (auto& v : blob.vertices) {
            v.y *= real(0.7);
            v.z *= real(0.55);
        }
        blob.recompute_vertex_normals();
        save_obj(blob, (root / "blob.obj").string());
        TriMesh back = load_obj((root / "blob.obj").string());
        bool same = back.faces == blob.faces &&
                    back.vertices.size() == blob.vertices.size();
        real worst = 0;
        for (size_t i = 0; same && i < blob.vertices.size(); ++i) {
            worst = std::max(worst, length(back.vertices[i] - blob.vertices[i]));
            worst = std::max(worst, length(back.normals[i] - blob.normals[i]));
        }
        c.require(same && worst < 1e-12, "OBJ round trip lossless to 1e-12");
    }

    // camera JSON round trip lossless to 1e-12
    {
        auto cams = make_rig(rig);
        save_cameras_json(cams, (root / "cams.json").string());
        auto back = load_cameras_json((root / "cams.json").string());
        bool same = back.size() == cams.size();
        real worst = 0;
        for (size_t i = 0; same && i < cams.size(); ++i) {
            const Camera &a = cams[i], &b = back[i];
            same = a.width == b.width && a.height == b.height;
            worst = std::max({worst, std::abs(a.fx - b.fx), std::abs(a.fy - b.fy),
                              std::abs(a.cx - b.cx), std::abs(a.cy - b.cy),
                              length(a.translation - b.translation)});
            for (int k = 0; k < 9; ++k)
                worst = std::max(worst, std::abs(a.rotation.m[k] - b.rotation.m[k]));
        }
        c.require(same && worst < 1e-12, "camera JSON round trip lossless to 1e-12");
    }
    return verdict(8, c);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1-8>\n");
        return 2;
    }
    const int crit = std::atoi(argv[1]);
    switch (crit) {
        case 1: return criterion1();
        case 2: return criterion2();
        case 3: return criterion3();
        case 4: return criterion4();
        case 5: return criterion5();
        case 6: return criterion6();
        case 7: return criterion7();
        case 8: return criterion8();
        default:
            std::fprintf(stderr, "usage: acceptance <criterion 1-8>\n");
            return 2;
    }
}
