#include "relievo/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relievo {

namespace {

// Solve the symmetric 6x6 system A x = b by Gaussian elimination with
// partial pivoting. Returns false when singular.
bool solve6(real A[6][6], real b[6], real x[6]) {
    int perm[6] = {0, 1, 2, 3, 4, 5};
    for (int c = 0; c < 6; ++c) {
        int piv = c;
        for (int r = c + 1; r < 6; ++r)
            if (std::abs(A[perm[r]][c]) > std::abs(A[perm[piv]][c])) piv = r;
        std::swap(perm[c], perm[piv]);
        const real d = A[perm[c]][c];
        if (std::abs(d) < real(1e-12)) return false;
        for (int r = c + 1; r < 6; ++r) {
            const real f = A[perm[r]][c] / d;
            for (int k = c; k < 6; ++k) A[perm[r]][k] -= f * A[perm[c]][k];
            b[perm[r]] -= f * b[perm[c]];
        }
    }
    for (int c = 5; c >= 0; --c) {
        real s = b[perm[c]];
        for (int k = c + 1; k < 6; ++k) s -= A[perm[c]][k] * x[k];
        x[c] = s / A[perm[c]][c];
    }
    return true;
}

Mat3 rotation_from_omega(const Vec3& w) {
    const real angle = length(w);
    if (angle < real(1e-12)) return Mat3::identity();
    return Mat3::axis_angle(w / angle, angle);
}

}  // namespace

IcpResult rigid_icp(const TriMesh& source, const TriMesh& target, int iterations, int samples,
                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pts = sample_surface(source, samples, rng);
    Bvh bvh(target);

    IcpResult res;
    res.transform = {Mat3::identity(), {0, 0, 0}};
    RigidTransform best = res.transform;
    real best_rms = std::numeric_limits<real>::infinity();
    int growth_streak = 0;

    for (int it = 0; it < iterations; ++it) {
        struct Pair {
            Vec3 p, q, n;
            real dist;
        };
        std::vector<Pair> pairs;
        pairs.reserve(pts.size());
        std::vector<real> dists;
        for (const auto& sp : pts) {
            Vec3 p = res.transform.apply(sp.position);
            ClosestPoint cp = bvh.closest_point(p);
            Vec3 n = target.face_normal(cp.face);
            pairs.push_back({p, cp.point, n, cp.dist});
            dists.push_back(cp.dist);
        }
        std::vector<real> sorted = dists;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const real cutoff = 3 * std::max(sorted[sorted.size() / 2], real(1e-12));

        real A[6][6] = {};
        real b[6] = {};
        real sq = 0;
        int used = 0;
        for (const auto& pr : pairs) {
            if (pr.dist > cutoff) continue;
            const real r = dot(pr.n, pr.p - pr.q);
            const Vec3 c = cross(pr.p, pr.n);
            const real J[6] = {c.x, c.y, c.z, pr.n.x, pr.n.y, pr.n.z};
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < 6; ++j) A[i][j] += J[i] * J[j];
                b[i] -= J[i] * r;
            }
            sq += r * r;
            ++used;
        }
        if (used < 6) break;
        const real rms = std::sqrt(sq / used);
        if (rms < best_rms) {
            best_rms = rms;
            best = res.transform;
        }
        // meaningful growth only: ignore jitter at numerical-noise level
        const bool grew = !res.rms_history.empty() &&
                          rms > res.rms_history.back() * (1 + real(1e-9)) + real(1e-12);
        growth_streak = grew ? growth_streak + 1 : 0;
        res.rms_history.push_back(rms);
        if (growth_streak >= 3) {
            res.diverged = true;
            break;
        }
        real x[6];
        if (!solve6(A, b, x)) break;
        RigidTransform delta{rotation_from_omega({x[0], x[1], x[2]}), {x[3], x[4], x[5]}};
        res.transform = delta.compose(res.transform);
    }
    // report the best transform seen (matters only on divergence)
    if (res.diverged) res.transform = best;
    res.final_rms = best_rms;
    return res;
}

std::vector<Vec3> tight_crop(const TriMesh& mesh, const Vec3& center, real radius) {
    if (radius <= 0) throw std::runtime_error("tight_crop: radius must be positive");
    std::vector<Vec3> kept;
    for (const auto& v : mesh.vertices)
        if (length(v - center) <= radius) kept.push_back(v);
    if (kept.empty()) throw std::runtime_error("tight_crop: no vertices inside the crop sphere");
    return kept;
}

DistanceSummary summarize(std::vector<real> values) {
    DistanceSummary s;
    s.count = int(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.median = values[values.size() / 2];
    s.max = values.back();
    s.mean = std::accumulate(values.begin(), values.end(), real(0)) / s.count;
    real var = 0;
    for (real v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / s.count);
    return s;
}

std::vector<real> point_to_surface_distances(const std::vector<Vec3>& points, const Bvh& ref) {
    std::vector<real> d;
    d.reserve(points.size());
    for (const auto& p : points) d.push_back(ref.closest_point(p).dist);
    return d;
}

namespace {

real directed_mean(const TriMesh& from, const Bvh& to, int samples, std::mt19937_64& rng) {
    auto pts = sample_surface(from, samples, rng);
    real sum = 0;
    for (const auto& sp : pts) sum += to.closest_point(sp.position).dist;
    return sum / std::max<size_t>(1, pts.size());
}

}  // namespace

real chamfer_symmetric(const TriMesh& a, const TriMesh& b, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Bvh ba(a), bb(b);
    const real ab = directed_mean(a, bb, samples, rng);
    const real ba_ = directed_mean(b, ba, samples, rng);
    return (ab + ba_) / 2;
}

real normal_cosine_distance(const TriMesh& source, const TriMesh& reference, int samples,
                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pts = sample_surface(source, samples, rng);
    Bvh bvh(reference);
    real sum = 0;
    size_t used = 0;
    for (const auto& sp : pts) {
        ClosestPoint cp = bvh.closest_point(sp.position);
        Vec3 nr = reference.interp_normal(cp.face, cp.b0, cp.b1, cp.b2);
        const real ns = length(sp.normal), nn = length(nr);
        if (ns < real(1e-12) || nn < real(1e-12)) continue;
        sum += 1 - dot(sp.normal, nr) / (ns * nn);
        ++used;
    }
    return used ? sum / used : 0;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["point_to_surface"] = {{"mean", point_to_surface.mean},
                             {"median", point_to_surface.median},
                             {"stddev", point_to_surface.stddev},
                             {"max", point_to_surface.max},
                             {"count", point_to_surface.count}};
    j["chamfer"] = chamfer;
    j["normal_cosine"] = normal_cosine;
    j["samples"] = samples;
    j["icp_applied"] = icp_applied;
    j["icp_diverged"] = icp_diverged;
    j["alignment"] = {{"rotation", std::vector<real>(alignment.R.m, alignment.R.m + 9)},
                      {"translation", {alignment.t.x, alignment.t.y, alignment.t.z}}};
    return j.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
    std::ostringstream os;
    os << "metric                    value\n"
       << "------------------------  ----------\n";
    auto row = [&](const char* name, real v) {
        os << name;
        for (size_t i = std::string(name).size(); i < 26; ++i) os << ' ';
        os << v << '\n';
    };
    row("p2s mean", point_to_surface.mean);
    row("p2s median", point_to_surface.median);
    row("p2s stddev", point_to_surface.stddev);
    row("chamfer (symmetric)", chamfer);
    row("normal cosine distance", normal_cosine);
    os << "samples                   " << samples << '\n';
    if (icp_applied) os << "icp                       " << (icp_diverged ? "diverged" : "ok") << '\n';
    return os.str();
}

EvalReport evaluate(const TriMesh& source, const TriMesh& reference, const EvalOptions& opts) {
    EvalReport rep;
    rep.samples = opts.samples;
    rep.alignment = {Mat3::identity(), {0, 0, 0}};

    TriMesh aligned = source;
    if (opts.run_icp) {
        IcpResult icp = rigid_icp(source, reference, opts.icp_iterations,
                                  std::min(opts.samples, 5000), opts.seed);
        rep.icp_applied = true;
        rep.icp_diverged = icp.diverged;
        rep.alignment = icp.transform;
        for (auto& v : aligned.vertices) v = icp.transform.apply(v);
        aligned.recompute_vertex_normals();
    }

    std::mt19937_64 rng(opts.seed);
    Bvh ref_bvh(reference);
    std::vector<Vec3> pts;
    if (opts.crop) {
        pts = tight_crop(aligned, opts.crop_center, opts.crop_radius);
    } else {
        for (const auto& sp : sample_surface(aligned, opts.samples, rng))
            pts.push_back(sp.position);
    }
    rep.point_to_surface = summarize(point_to_surface_distances(pts, ref_bvh));
    rep.chamfer = chamfer_symmetric(aligned, reference, opts.samples, opts.seed);
    rep.normal_cosine = normal_cosine_distance(aligned, reference, opts.samples, opts.seed);
    return rep;
}

}  // namespace relievo
