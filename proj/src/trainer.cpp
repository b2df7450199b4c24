#include "relievo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "relievo/checkpoint.hpp"

namespace relievo {

namespace fs = std::filesystem;
using nlohmann::json;

// --- batched sphere tracing ----------------------------------------------

BatchTrace batched_sphere_trace(const SdfField& field, const std::vector<Ray>& rays,
                                const std::vector<real>& t_min, const std::vector<real>& t_max,
                                const TraceOptions& opts) {
    const int n = static_cast<int>(rays.size());
    BatchTrace res;
    res.hit.assign(n, 0);
    res.point.resize(n);
    res.t = t_min;
    res.min_value.assign(n, std::numeric_limits<real>::infinity());
    res.min_point.resize(n);

    enum { Marching, Bracketed, Done };
    std::vector<int> state(n, Marching);
    std::vector<real> lo(n), hi(n);
    std::vector<real> prev_t = t_min;

    auto eval_at = [&](const std::vector<int>& idx, const std::vector<real>& ts, Mat& s) {
        Mat X(static_cast<int>(idx.size()), 3);
        for (size_t k = 0; k < idx.size(); ++k) {
            Vec3 p = rays[idx[k]].at(ts[k]);
            X.at(int(k), 0) = p.x;
            X.at(int(k), 1) = p.y;
            X.at(int(k), 2) = p.z;
        }
        Mat z;
        field.eval(X, s, z);
    };
    auto note_min = [&](int i, real f, real t) {
        if (f < res.min_value[i]) {
            res.min_value[i] = f;
            res.min_point[i] = rays[i].at(t);
        }
    };

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        std::vector<int> idx;
        std::vector<real> ts;
        for (int i = 0; i < n; ++i)
            if (state[i] == Marching) {
                idx.push_back(i);
                ts.push_back(res.t[i]);
            }
        if (idx.empty()) break;
        Mat s;
        eval_at(idx, ts, s);
        for (size_t k = 0; k < idx.size(); ++k) {
            const int i = idx[k];
            const real f = s.a[k];
            note_min(i, f, res.t[i]);
            if (std::abs(f) < opts.hit_eps) {
                res.hit[i] = 1;
                res.point[i] = rays[i].at(res.t[i]);
                state[i] = Done;
            } else if (f < 0) {
                lo[i] = prev_t[i];
                hi[i] = res.t[i];
                state[i] = Bracketed;
            } else {
                prev_t[i] = res.t[i];
                res.t[i] += opts.relaxation * f;
                if (res.t[i] > t_max[i]) state[i] = Done;  // marched out: miss
            }
        }
    }

    // bisection refinement of bracketed rays, until |F| < eps (cap 64)
    for (int iter = 0; iter < 64; ++iter) {
        std::vector<int> idx;
        std::vector<real> ts;
        for (int i = 0; i < n; ++i)
            if (state[i] == Bracketed) {
                idx.push_back(i);
                ts.push_back((lo[i] + hi[i]) / 2);
            }
        if (idx.empty()) break;
        Mat s;
        eval_at(idx, ts, s);
        for (size_t k = 0; k < idx.size(); ++k) {
            const int i = idx[k];
            const real f = s.a[k];
            note_min(i, f, ts[k]);
            if (std::abs(f) < opts.hit_eps) {
                res.t[i] = ts[k];
                res.point[i] = rays[i].at(ts[k]);
                res.hit[i] = 1;
                state[i] = Done;
            } else {
                (f < 0 ? hi[i] : lo[i]) = ts[k];
            }
        }
    }
    return res;
}

// --- spec (de)serialization ----------------------------------------------

std::map<std::string, std::string> spec_extras(const SdfFieldSpec& f, const ShadingSpec& s) {
    json jf{{"depth", f.depth},       {"width", f.width},
            {"skip_at", f.skip_at},   {"pe_freqs", f.pe_freqs},
            {"feature_dim", f.feature_dim}, {"softplus_beta", f.softplus_beta}};
    json js{{"hidden_width", s.hidden_width},
            {"feature_dim", s.feature_dim},
            {"a_s", s.a_s},
            {"unified", s.unified}};
    return {{"field_spec", jf.dump()}, {"shading_spec", js.dump()}};
}

void parse_spec_extras(const std::map<std::string, std::string>& extra, SdfFieldSpec& f,
                       ShadingSpec& s) {
    json jf = json::parse(extra.at("field_spec"));
    f.depth = jf.at("depth");
    f.width = jf.at("width");
    f.skip_at = jf.at("skip_at");
    f.pe_freqs = jf.at("pe_freqs");
    f.feature_dim = jf.at("feature_dim");
    f.softplus_beta = jf.at("softplus_beta");
    json js = json::parse(extra.at("shading_spec"));
    s.hidden_width = js.at("hidden_width");
    s.feature_dim = js.at("feature_dim");
    s.a_s = js.at("a_s");
    s.unified = js.at("unified");
}

// --- trainer -------------------------------------------------------------

Trainer::Trainer(Dataset dataset, TrainConfig config, const std::string& resume_path)
    : dataset_(std::move(dataset)), cfg_(std::move(config)), rng_(cfg_.seed) {
    if (dataset_.cameras.empty()) throw std::runtime_error("trainer: dataset has no views");
    Vec3 center;
    real radius;
    dataset_.coarse.bounding_sphere(center, radius);
    bound_radius_ = length(center) + radius;
    cfg_.shading.feature_dim = cfg_.field.feature_dim;

    if (resume_path.empty()) {
        field_.emplace(cfg_.field, params_);
        shade_ = ShadingModel(cfg_.shading, params_);
        field_->init_sphere(rng_, radius);
        shade_->init(rng_);
        opt_.emplace(params_, Adam::Hyper{cfg_.lr});
    } else {
        CheckpointInfo info = load_checkpoint(resume_path, params_);
        parse_spec_extras(info.extra, cfg_.field, cfg_.shading);
        field_ = SdfField::attach(cfg_.field, params_);
        shade_ = ShadingModel::attach(cfg_.shading, params_);
        opt_.emplace(params_, Adam::Hyper{cfg_.lr});
        if (info.has_moments) restore_optimizer(resume_path, *opt_);
        epoch_ = std::stoi(info.extra.at("epoch"));
        global_step_ = std::stol(info.extra.at("global_step"));
        std::istringstream rs(info.extra.at("rng"));
        rs >> rng_;
    }
    bvh_.emplace(dataset_.coarse);
    pools_.resize(dataset_.cameras.size());
}

real Trainer::current_alpha() const {
    if (cfg_.alpha_double_every <= 0) return cfg_.weights.alpha;
    return cfg_.weights.alpha * std::pow(real(2), epoch_ / cfg_.alpha_double_every);
}

const Trainer::PixelPools& Trainer::pools_for(int view) {
    PixelPools& pp = pools_.at(view);
    if (!pp.interior.empty() || !pp.band.empty()) return pp;
    const Image& mask = dataset_.masks.at(view);
    const int W = mask.width, H = mask.height, b = cfg_.boundary_band;
    auto inside = [&](int x, int y) { return mask.at(x, y)[0] > real(0.5); };
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (inside(x, y)) pp.interior.push_back(y * W + x);
            bool near_edge = false;
            const bool me = inside(x, y);
            for (int dy = -b; dy <= b && !near_edge; ++dy)
                for (int dx = -b; dx <= b && !near_edge; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                    if (inside(nx, ny) != me) near_edge = true;
                }
            if (near_edge) pp.band.push_back(y * W + x);
        }
    return pp;
}

StepStats Trainer::step(int view) {
    StepStats stats;
    stats.alpha = current_alpha();
    const Camera& cam = dataset_.cameras.at(view);
    const Image& img = dataset_.images.at(view);
    const Image& mask = dataset_.masks.at(view);
    const PixelPools& pp = pools_for(view);
    const int W = img.width;
    const int B = cfg_.batch_pixels;

    // stratified pixel sampling: interior + silhouette band
    std::vector<int> pixels;
    pixels.reserve(B);
    const int nb = pp.band.empty() ? 0 : int(std::lround(cfg_.boundary_fraction * B));
    auto pick = [&](const std::vector<int>& pool, int count) {
        std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
        for (int i = 0; i < count; ++i) pixels.push_back(pool[d(rng_)]);
    };
    if (pp.interior.empty()) {
        std::uniform_int_distribution<int> d(0, W * img.height - 1);
        for (int i = 0; i < B; ++i) pixels.push_back(d(rng_));
    } else {
        pick(pp.band, nb);
        pick(pp.interior, B - nb);
    }

    const real dist = length(cam.center());
    const real margin = bound_radius_ * real(1.2) + real(0.1);
    const real t0 = std::max(real(1e-3), dist - margin);
    const real t1 = dist + margin;

    std::vector<Ray> rays(B);
    std::vector<real> tmin(B, t0), tmax(B, t1);
    for (int i = 0; i < B; ++i)
        rays[i] = cam.pixel_to_ray(pixels[i] % W, pixels[i] / W);

    BatchTrace tr = batched_sphere_trace(*field_, rays, tmin, tmax);

    int sdf_hits = 0;
    std::vector<int> rgb_rows;     // rays in P^rgb
    std::vector<MeshHit> mesh_hits(B);
    std::vector<real> mvals(B);
    for (int i = 0; i < B; ++i) {
        if (tr.hit[i]) ++sdf_hits;
        mesh_hits[i] = bvh_->intersect(rays[i], t0, t1);
        mvals[i] = mask.at(pixels[i] % W, pixels[i] / W)[0];
        // only foreground-labeled pixels supervise color/registration;
        // background-labeled rays the model hits belong to the mask term,
        // otherwise nothing ever shrinks the surface back inside the
        // silhouette (the photometric term is masked to zero there)
        if (tr.hit[i] && mesh_hits[i].hit && mvals[i] >= real(0.5)) rgb_rows.push_back(i);
    }
    if (sdf_hits == 0) {
        std::fprintf(stderr, "[trainer] step %ld: zero SDF hits, skipping\n", global_step_);
        stats.skipped = true;
        if (++consecutive_skips_ >= 50)
            throw std::runtime_error("trainer: 50 consecutive steps without SDF hits; "
                                     "field and cameras appear disjoint");
        ++global_step_;
        return stats;
    }

    // silhouette cross-entropy rows, both directions of disagreement:
    //  - background-labeled rays (any trace outcome): penalize min F <= 0
    //  - foreground-labeled rays the model misses: penalize min F > 0
    std::vector<int> bg_rows, grow_rows;
    for (int i = 0; i < B; ++i) {
        if (mvals[i] < real(0.5)) bg_rows.push_back(i);
        else if (!tr.hit[i]) grow_rows.push_back(i);
    }
    // refine the along-ray minimum with stratified samples for rays that
    // never crossed the surface
    {
        std::vector<int> refine;
        for (int i : bg_rows)
            if (!tr.hit[i]) refine.push_back(i);
        for (int i : grow_rows) refine.push_back(i);
        const int S = 64;
        if (!refine.empty()) {
            Mat X(int(refine.size()) * S, 3);
            std::vector<real> ts(refine.size() * S);
            std::uniform_real_distribution<real> u01(0, 1);
            int r = 0;
            for (int i : refine)
                for (int k = 0; k < S; ++k, ++r) {
                    real t = t0 + (t1 - t0) * (k + u01(rng_)) / S;
                    ts[r] = t;
                    Vec3 p = rays[i].at(t);
                    X.at(r, 0) = p.x;
                    X.at(r, 1) = p.y;
                    X.at(r, 2) = p.z;
                }
            Mat s, z;
            field_->eval(X, s, z);
            r = 0;
            for (int i : refine)
                for (int k = 0; k < S; ++k, ++r)
                    if (s.a[r] < tr.min_value[i]) {
                        tr.min_value[i] = s.a[r];
                        tr.min_point[i] = rays[i].at(ts[r]);
                    }
        }
    }

    // --- tape assembly ---
    params_.zero_grads();
    Tape tape(params_);
    LossNodes terms;
    const int n_rgb = int(rgb_rows.size());
    stats.n_rgb = n_rgb;
    const int feat = cfg_.field.feature_dim;

    if (n_rgb > 0) {
        Mat X0(n_rgb, 3), V(n_rgb, 3), Xstar(n_rgb, 3), Nstar(n_rgb, 3), I(n_rgb, 3),
            Mw(n_rgb, 1);
        for (int k = 0; k < n_rgb; ++k) {
            const int i = rgb_rows[k];
            const Vec3& p = tr.point[i];
            X0.at(k, 0) = p.x; X0.at(k, 1) = p.y; X0.at(k, 2) = p.z;
            V.at(k, 0) = rays[i].dir.x; V.at(k, 1) = rays[i].dir.y; V.at(k, 2) = rays[i].dir.z;
            const MeshHit& mh = mesh_hits[i];
            // pre-pull the coarse hit with frozen Newton steps: one on-tape
            // pull from a point far off the level set undershoots when the
            // field is not yet metric, and that residual would act as a
            // spurious attraction toward the coarse mesh
            Vec3 xs = mh.point;
            for (int it = 0; it < 3; ++it) {
                auto next = field_->pull_to_surface(xs);
                if (!next) break;
                xs = *next;
            }
            Xstar.at(k, 0) = xs.x; Xstar.at(k, 1) = xs.y; Xstar.at(k, 2) = xs.z;
            Vec3 nn = dataset_.coarse.interp_normal(mh.face, mh.b0, mh.b1, mh.b2);
            Nstar.at(k, 0) = nn.x; Nstar.at(k, 1) = nn.y; Nstar.at(k, 2) = nn.z;
            const real* px = img.at(pixels[i] % W, pixels[i] / W);
            I.at(k, 0) = px[0]; I.at(k, 1) = px[1]; I.at(k, 2) = px[2];
            Mw.a[k] = mask.at(pixels[i] % W, pixels[i] / W)[0];
        }
        int out0, g0;
        field_->mlp().tape_forward_with_spatial_grad(tape, X0, out0, g0);
        int s0 = tape.slice_cols(out0, 0, 1);
        int z0 = tape.slice_cols(out0, 1, feat);

        // frozen denominator grad F(x0; theta0) . v for the differentiable hit
        Mat denom(n_rgb, 1);
        for (int k = 0; k < n_rgb; ++k) {
            const Mat& gv = tape.val(g0);
            real d = gv.at(k, 0) * V.at(k, 0) + gv.at(k, 1) * V.at(k, 1) +
                     gv.at(k, 2) * V.at(k, 2);
            if (std::abs(d) < real(1e-6)) d = d < 0 ? real(-1e-6) : real(1e-6);
            denom.a[k] = d;
        }
        int xp = intersection_node(tape, s0, X0, V, denom);
        int inv_norm = tape.recip(tape.clamp_min(tape.row_norm(g0), real(1e-12)));
        int n_unit = tape.row_scale(g0, inv_norm);

        // pull the coarse-mesh hits onto the zero level set
        int outs, gs;
        field_->mlp().tape_forward_with_spatial_grad(tape, Xstar, outs, gs);
        int pulled = pull_node(tape, tape.slice_cols(outs, 0, 1), gs, Xstar);

        terms.registration = registration_loss(tape, xp, pulled, B);
        terms.normal = normal_loss(tape, g0, Nstar, B);
        ShadingNodes sh = shade_->tape_color(tape, xp, z0, Nstar, n_unit, V);
        terms.photo = photometric_loss(tape, sh.color, I, Mw, B);
    }

    auto min_sdf_node = [&](const std::vector<int>& rows) {
        Mat Xm(int(rows.size()), 3);
        for (size_t k = 0; k < rows.size(); ++k) {
            const Vec3& p = tr.min_point[rows[k]];
            Xm.at(int(k), 0) = p.x; Xm.at(int(k), 1) = p.y; Xm.at(int(k), 2) = p.z;
        }
        int outm = field_->mlp().tape_forward_const(tape, Xm);
        return tape.slice_cols(outm, 0, 1);
    };
    if (!bg_rows.empty()) {
        Mat Wt(int(bg_rows.size()), 1);
        std::fill(Wt.a.begin(), Wt.a.end(), real(1));  // 1 - M with M = 0
        terms.mask = mask_loss(tape, min_sdf_node(bg_rows), Wt, stats.alpha, B);
    }
    if (!grow_rows.empty()) {
        Mat Wt(int(grow_rows.size()), 1);
        std::fill(Wt.a.begin(), Wt.a.end(), real(1));  // M with M = 1
        // mirrored cross-entropy: softplus(+alpha u) pushes min F negative
        int grow = mask_loss(tape, tape.affine(min_sdf_node(grow_rows), -1, 0), Wt,
                             stats.alpha, B);
        terms.mask = terms.mask < 0 ? grow : tape.add(terms.mask, grow);
    }

    // eikonal samples: half uniform in the bounding box, half hugging the
    // current surface hits
    {
        const int N = std::max(2, cfg_.eikonal_samples);
        Mat Xe(N, 3);
        const real b = bound_radius_ * real(1.1);
        std::uniform_real_distribution<real> ub(-b, b);
        std::normal_distribution<real> gauss(0, real(0.01) * bound_radius_);
        const int n_uniform = n_rgb > 0 ? N / 2 : N;
        for (int k = 0; k < n_uniform; ++k)
            for (int c = 0; c < 3; ++c) Xe.at(k, c) = ub(rng_);
        if (n_rgb > 0) {
            std::uniform_int_distribution<int> pickhit(0, n_rgb - 1);
            for (int k = n_uniform; k < N; ++k) {
                const Vec3& p = tr.point[rgb_rows[pickhit(rng_)]];
                Xe.at(k, 0) = p.x + gauss(rng_);
                Xe.at(k, 1) = p.y + gauss(rng_);
                Xe.at(k, 2) = p.z + gauss(rng_);
            }
        }
        int oute, ge;
        field_->mlp().tape_forward_with_spatial_grad(tape, Xe, oute, ge);
        terms.eikonal = eikonal_loss(tape, ge);
    }

    LossWeights w = cfg_.weights;
    w.alpha = stats.alpha;
    terms = total_loss(tape, terms, w);

    try {
        tape.backward(terms.total);
    } catch (const GradientNanError& e) {
        std::fprintf(stderr, "[trainer] step %ld: %s; step aborted\n", global_step_, e.what());
        params_.zero_grads();
        stats.skipped = true;
        ++global_step_;
        return stats;
    }
    real lr = cfg_.lr;
    if (cfg_.lr_final_fraction > 0 && cfg_.lr_final_fraction != 1 && cfg_.epochs > 1)
        lr *= std::pow(cfg_.lr_final_fraction,
                       real(std::min(epoch_, cfg_.epochs - 1)) / (cfg_.epochs - 1));
    opt_->hyper().lr = lr;
    opt_->step(params_);
    params_.zero_grads();

    auto term_val = [&](int node) { return node >= 0 ? tape.scalar(node) : real(0); };
    stats.photo = term_val(terms.photo);
    stats.mask = term_val(terms.mask);
    stats.eikonal = term_val(terms.eikonal);
    stats.registration = term_val(terms.registration);
    stats.normal = term_val(terms.normal);
    stats.total = term_val(terms.total);
    consecutive_skips_ = 0;
    ++global_step_;
    return stats;
}

void Trainer::log_step(const StepStats& s) {
    if (!csv_.is_open()) return;
    csv_ << global_step_ - 1 << ',' << epoch_ << ',' << s.photo << ',' << s.mask << ','
         << s.eikonal << ',' << s.registration << ',' << s.normal << ',' << s.total << ','
         << s.alpha << '\n';
    csv_.flush();
}

void Trainer::run() {
    if (!cfg_.out_dir.empty()) {
        fs::create_directories(cfg_.out_dir);
        const std::string path = (fs::path(cfg_.out_dir) / "loss.csv").string();
        const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
        csv_.open(path, std::ios::app);
        if (fresh) csv_ << "step,epoch,photo,mask,eikonal,registration,normal,total,alpha\n";
    }
    std::vector<int> order(dataset_.cameras.size());

    while (epoch_ < cfg_.epochs) {
        // restart from the identity so the permutation is a function of the
        // RNG state alone; in-place reshuffling would make an epoch depend on
        // the whole visit history and break bit-identical resume
        for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        std::shuffle(order.begin(), order.end(), rng_);
        for (int v : order) log_step(step(v));
        ++epoch_;
        if (!cfg_.out_dir.empty() && cfg_.checkpoint_interval > 0 &&
            epoch_ % cfg_.checkpoint_interval == 0)
            save((fs::path(cfg_.out_dir) / "checkpoint.bin").string());
    }
    if (!cfg_.out_dir.empty()) save((fs::path(cfg_.out_dir) / "checkpoint.bin").string());
}

void Trainer::save(const std::string& path) const {
    auto extra = spec_extras(cfg_.field, cfg_.shading);
    extra["epoch"] = std::to_string(epoch_);
    extra["global_step"] = std::to_string(global_step_);
    std::ostringstream rs;
    rs << rng_;
    extra["rng"] = rs.str();
    save_checkpoint(path, params_, &*opt_, extra);
}

}  // namespace relievo
