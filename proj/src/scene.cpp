#include "relievo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace relievo {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(SceneKind k) {
    switch (k) {
        case SceneKind::Sphere: return "sphere";
        case SceneKind::BumpySphere: return "bumpy-sphere";
        case SceneKind::TwoBlob: return "two-blob";
    }
    return "sphere";
}

SceneKind scene_kind_from_string(const std::string& s) {
    if (s == "sphere") return SceneKind::Sphere;
    if (s == "bumpy-sphere" || s == "bumpy_sphere") return SceneKind::BumpySphere;
    if (s == "two-blob" || s == "two_blob") return SceneKind::TwoBlob;
    throw std::runtime_error("unknown scene kind: " + s);
}

namespace {

// polynomial smooth min (k > 0)
real smin(real a, real b, real k) {
    real h = std::clamp(real(0.5) + real(0.5) * (b - a) / k, real(0), real(1));
    return b * (1 - h) + a * h - k * h * (1 - h);
}

real raw_value(const SceneParams& p, const Vec3& x) {
    const real rho = length(x);
    switch (p.kind) {
        case SceneKind::Sphere:
            return rho - p.radius;
        case SceneKind::BumpySphere: {
            if (rho < real(1e-9)) return -p.radius;
            real theta = std::acos(std::clamp(x.z / rho, real(-1), real(1)));
            real phi = std::atan2(x.y, x.x);
            real bump = p.bump_amplitude * std::sin(p.bump_freq * theta) *
                        std::sin(p.bump_freq * phi);
            return rho - (p.radius + bump);
        }
        case SceneKind::TwoBlob: {
            real d1 = rho - p.radius;
            real d2 = length(x - Vec3{real(0.9) * p.radius, 0, 0}) - real(0.35) * p.radius;
            return smin(d1, d2, real(0.1) * p.radius);
        }
    }
    return rho - p.radius;
}

}  // namespace

real AnalyticScene::bound_radius() const {
    switch (params_.kind) {
        case SceneKind::Sphere: return params_.radius * real(1.05);
        case SceneKind::BumpySphere:
            return (params_.radius + params_.bump_amplitude) * real(1.05);
        case SceneKind::TwoBlob: return params_.radius * real(1.35);
    }
    return params_.radius;
}

real AnalyticScene::value(const Vec3& x) const { return raw_value(params_, x); }

Vec3 AnalyticScene::gradient(const Vec3& x) const {
    if (params_.kind == SceneKind::Sphere) {
        real rho = length(x);
        return rho > real(1e-12) ? x / rho : Vec3{1, 0, 0};
    }
    const real h = real(1e-6);
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (raw_value(params_, a) - raw_value(params_, b)) / (2 * h);
    }
    return g;
}

Vec3 AnalyticScene::surface_point(const Vec3& d) const {
    // bisection on t -> F(t d); star-shaped about the origin by construction
    real lo = real(0.2) * params_.radius, hi = bound_radius() + real(0.5) * params_.radius;
    real flo = value(d * lo);
    if (flo >= 0) return d * lo;
    for (int i = 0; i < 80; ++i) {
        real mid = (lo + hi) / 2;
        (value(d * mid) < 0 ? lo : hi) = mid;
    }
    return d * ((lo + hi) / 2);
}

Camera look_at(const Vec3& position, const Vec3& target, real fov_deg, int width, int height) {
    Vec3 fwd = normalized(target - position);
    Vec3 right = normalized(cross(fwd, Vec3{0, 1, 0}));
    if (length(right) < real(0.5))  // looking straight along y
        right = normalized(cross(fwd, Vec3{0, 0, 1}));
    Vec3 down = cross(fwd, right);
    Camera cam;
    cam.width = width;
    cam.height = height;
    cam.fx = cam.fy = real(0.5) * width / std::tan(fov_deg * real(M_PI) / 360);
    cam.cx = width / real(2);
    cam.cy = height / real(2);
    cam.rotation.m[0] = right.x; cam.rotation.m[1] = right.y; cam.rotation.m[2] = right.z;
    cam.rotation.m[3] = down.x;  cam.rotation.m[4] = down.y;  cam.rotation.m[5] = down.z;
    cam.rotation.m[6] = fwd.x;   cam.rotation.m[7] = fwd.y;   cam.rotation.m[8] = fwd.z;
    cam.translation = -(cam.rotation * position);
    return cam;
}

std::vector<Camera> make_rig(const RigOptions& opts) {
    if (opts.n_views < 1) throw std::runtime_error("make_rig: need at least one view");
    std::vector<Camera> cams;
    const real to_rad = real(M_PI) / 180;
    for (int i = 0; i < opts.n_views; ++i) {
        real f = opts.n_views == 1 ? real(0.5)
                                   : real(i) / (opts.n_views - 1);  // 0..1 inclusive
        real yaw = (2 * f - 1) * opts.max_yaw_deg * to_rad;
        real pitch = opts.max_pitch_deg == 0
                         ? 0
                         : (2 * f - 1) * opts.max_pitch_deg * to_rad;
        Vec3 pos{std::sin(yaw) * std::cos(pitch), std::sin(pitch),
                 std::cos(yaw) * std::cos(pitch)};
        cams.push_back(look_at(pos * opts.distance, {0, 0, 0}, opts.fov_deg, opts.width,
                               opts.height));
    }
    return cams;
}

void render_reference(const AnalyticScene& scene, const Camera& cam, Image& rgb, Image& mask) {
    rgb = Image(cam.width, cam.height, 3);
    mask = Image(cam.width, cam.height, 1);
    const SceneParams& p = scene.params();
    const Vec3 l = normalized(p.light_dir);
    const real bound = scene.bound_radius();
    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            Ray ray = cam.pixel_to_ray(u, v);
            real dist = length(cam.center());
            real t0 = std::max(real(1e-3), dist - bound - 1);
            TraceResult tr = sphere_trace(scene, ray, t0, dist + bound + 1);
            if (!tr.hit) continue;
            Vec3 n = normalized(scene.gradient(tr.point));
            Vec3 view = -ray.dir;
            Vec3 h = normalized(l + view);
            real diff = std::max(real(0), dot(n, l));
            real spec = p.k_s > 0 ? p.k_s * std::pow(std::max(real(0), dot(n, h)), p.shininess)
                                  : real(0);
            real* px = rgb.at(u, v);
            px[0] = p.light_intensity * (p.albedo.x * diff + spec);
            px[1] = p.light_intensity * (p.albedo.y * diff + spec);
            px[2] = p.light_intensity * (p.albedo.z * diff + spec);
            mask.at(u, v)[0] = 1;
        }
    }
}

TriMesh make_coarse_mesh(const AnalyticScene& scene, int subdivisions) {
    const SceneParams& p = scene.params();
    real r = p.coarse_radius > 0 ? p.coarse_radius : p.radius;
    return make_icosphere(subdivisions, r);
}

TriMesh make_gt_mesh(const AnalyticScene& scene, int subdivisions) {
    TriMesh m = make_icosphere(subdivisions, 1);
    for (size_t i = 0; i < m.vertices.size(); ++i) {
        Vec3 d = normalized(m.vertices[i]);
        m.vertices[i] = scene.surface_point(d);
        m.normals[i] = normalized(scene.gradient(m.vertices[i]));
    }
    return m;
}

// --- JSON ----------------------------------------------------------------

namespace {

json camera_to_json(const Camera& c) {
    json j;
    j["fx"] = c.fx;
    j["fy"] = c.fy;
    j["cx"] = c.cx;
    j["cy"] = c.cy;
    j["width"] = c.width;
    j["height"] = c.height;
    j["rotation"] = std::vector<real>(c.rotation.m, c.rotation.m + 9);
    j["translation"] = {c.translation.x, c.translation.y, c.translation.z};
    return j;
}

Camera camera_from_json(const json& j) {
    Camera c;
    c.fx = j.at("fx");
    c.fy = j.at("fy");
    c.cx = j.at("cx");
    c.cy = j.at("cy");
    c.width = j.at("width");
    c.height = j.at("height");
    auto rot = j.at("rotation").get<std::vector<real>>();
    if (rot.size() != 9) throw std::runtime_error("camera rotation must have 9 entries");
    std::copy(rot.begin(), rot.end(), c.rotation.m);
    auto t = j.at("translation").get<std::vector<real>>();
    if (t.size() != 3) throw std::runtime_error("camera translation must have 3 entries");
    c.translation = {t[0], t[1], t[2]};
    return c;
}

json scene_to_json(const SceneParams& p) {
    json j;
    j["kind"] = to_string(p.kind);
    j["radius"] = p.radius;
    j["bump_amplitude"] = p.bump_amplitude;
    j["bump_freq"] = p.bump_freq;
    j["coarse_radius"] = p.coarse_radius;
    j["albedo"] = {p.albedo.x, p.albedo.y, p.albedo.z};
    j["k_s"] = p.k_s;
    j["shininess"] = p.shininess;
    j["light_dir"] = {p.light_dir.x, p.light_dir.y, p.light_dir.z};
    j["light_intensity"] = p.light_intensity;
    return j;
}

SceneParams scene_from_json(const json& j) {
    SceneParams p;
    p.kind = scene_kind_from_string(j.at("kind"));
    p.radius = j.at("radius");
    p.bump_amplitude = j.value("bump_amplitude", real(0));
    p.bump_freq = j.value("bump_freq", real(0));
    p.coarse_radius = j.value("coarse_radius", real(0));
    auto alb = j.at("albedo").get<std::vector<real>>();
    p.albedo = {alb.at(0), alb.at(1), alb.at(2)};
    p.k_s = j.value("k_s", real(0));
    p.shininess = j.value("shininess", real(32));
    auto ld = j.at("light_dir").get<std::vector<real>>();
    p.light_dir = {ld.at(0), ld.at(1), ld.at(2)};
    p.light_intensity = j.value("light_intensity", real(1));
    return p;
}

std::string view_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "view_%03d.png", i);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

}  // namespace

void save_cameras_json(const std::vector<Camera>& cams, const std::string& path) {
    json j;
    j["cameras"] = json::array();
    for (const auto& c : cams) j["cameras"].push_back(camera_to_json(c));
    write_text(path, j.dump(2) + "\n");
}

std::vector<Camera> load_cameras_json(const std::string& path) {
    json j = read_json(path);
    std::vector<Camera> cams;
    for (const auto& cj : j.at("cameras")) cams.push_back(camera_from_json(cj));
    return cams;
}

void export_dataset(const AnalyticScene& scene, const RigOptions& rig, const std::string& outdir,
                    int coarse_subdivisions) {
    fs::create_directories(fs::path(outdir) / "images");
    fs::create_directories(fs::path(outdir) / "masks");
    auto cams = make_rig(rig);
    save_cameras_json(cams, (fs::path(outdir) / "cameras.json").string());
    write_text((fs::path(outdir) / "scene.json").string(),
               scene_to_json(scene.params()).dump(2) + "\n");
    for (size_t i = 0; i < cams.size(); ++i) {
        Image rgb, mask;
        render_reference(scene, cams[i], rgb, mask);
        save_png(rgb, (fs::path(outdir) / "images" / view_name(int(i))).string());
        save_png(mask, (fs::path(outdir) / "masks" / view_name(int(i))).string());
    }
    save_obj(make_coarse_mesh(scene, coarse_subdivisions),
             (fs::path(outdir) / "coarse.obj").string());
    save_obj(make_gt_mesh(scene), (fs::path(outdir) / "gt.obj").string());
}

void downscale(Dataset& ds, int res) {
    if (res <= 0) return;
    for (size_t i = 0; i < ds.cameras.size(); ++i) {
        Camera& cam = ds.cameras[i];
        if (cam.width == res && cam.height == res) continue;
        const real sx = real(res) / cam.width, sy = real(res) / cam.height;
        auto resample = [&](const Image& src) {
            Image out(res, res, src.channels);
            for (int y = 0; y < res; ++y)
                for (int x = 0; x < res; ++x) {
                    int su = std::min(src.width - 1, int((x + real(0.5)) / sx));
                    int sv = std::min(src.height - 1, int((y + real(0.5)) / sy));
                    for (int c = 0; c < src.channels; ++c)
                        out.at(x, y)[c] = src.at(su, sv)[c];
                }
            return out;
        };
        ds.images[i] = resample(ds.images[i]);
        ds.masks[i] = resample(ds.masks[i]);
        cam.fx *= sx;
        cam.fy *= sy;
        cam.cx *= sx;
        cam.cy *= sy;
        cam.width = cam.height = res;
    }
}

Dataset load_dataset(const std::string& dir) {
    Dataset d;
    d.scene = scene_from_json(read_json((fs::path(dir) / "scene.json").string()));
    d.cameras = load_cameras_json((fs::path(dir) / "cameras.json").string());
    for (size_t i = 0; i < d.cameras.size(); ++i) {
        d.images.push_back(load_png((fs::path(dir) / "images" / view_name(int(i))).string()));
        d.masks.push_back(load_png((fs::path(dir) / "masks" / view_name(int(i))).string()));
    }
    d.coarse = load_obj((fs::path(dir) / "coarse.obj").string());
    return d;
}

}  // namespace relievo
