#pragma once

#include <string>
#include <vector>

#include "relievo/camera.hpp"
#include "relievo/image.hpp"
#include "relievo/mesh.hpp"
#include "relievo/trace.hpp"

namespace relievo {

enum class SceneKind { Sphere, BumpySphere, TwoBlob };

std::string to_string(SceneKind k);
SceneKind scene_kind_from_string(const std::string& s);

struct SceneParams {
    SceneKind kind = SceneKind::Sphere;
    real radius = 1;            // base radius of the smooth shape
    real bump_amplitude = 0.05; // bumpy_sphere only
    real bump_freq = 8;
    real coarse_radius = 0;     // 0 = base radius
    Vec3 albedo{0.75, 0.60, 0.50};
    real k_s = 0;               // specular coefficient
    real shininess = 32;
    Vec3 light_dir{0.3, 0.5, 1.0};  // toward the light; normalized on use
    real light_intensity = 1;
};

// Ground-truth implicit surface with an exact-form SDF. The sphere's
// gradient is analytic; the bumpy and blob variants use central differences
// (h = 1e-6), which is orders of magnitude tighter than anything downstream
// needs.
class AnalyticScene : public ScalarField {
public:
    explicit AnalyticScene(SceneParams params) : params_(std::move(params)) {}

    const SceneParams& params() const { return params_; }
    // Radius of a ball around the origin containing the surface, with margin.
    real bound_radius() const;

    real value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;

    // Radial intersection of direction d (unit) with the surface; every
    // supported scene is star-shaped about the origin.
    Vec3 surface_point(const Vec3& d) const;

private:
    SceneParams params_;
};

struct RigOptions {
    int n_views = 17;
    real max_yaw_deg = 45;
    real max_pitch_deg = 0;  // extra axis, off by default
    real distance = 3;
    int width = 128, height = 128;
    real fov_deg = 50;
};

// Cameras at fixed distance, yaw evenly spaced over [-max_yaw, +max_yaw]
// (single view sits at yaw 0), all aimed at the origin.
std::vector<Camera> make_rig(const RigOptions& opts);

// Camera at `position` looking at `target`, world +y up in the image.
Camera look_at(const Vec3& position, const Vec3& target, real fov_deg, int width, int height);

// Blinn-Phong ground truth: sphere-trace the exact SDF, shade
// c = albedo * max(0, n.l) + k_s * max(0, n.h)^shininess, exact hit mask.
void render_reference(const AnalyticScene& scene, const Camera& cam, Image& rgb, Image& mask);

// Smooth proxy without the details: icosphere at coarse_radius.
TriMesh make_coarse_mesh(const AnalyticScene& scene, int subdivisions);
// Densely triangulated detailed surface for evaluation (radial projection of
// a fine icosphere onto the zero level set).
TriMesh make_gt_mesh(const AnalyticScene& scene, int subdivisions = 5);

// --- dataset directory ---------------------------------------------------
// Layout: cameras.json, scene.json, images/view_###.png, masks/view_###.png,
// coarse.obj, gt.obj.
struct Dataset {
    SceneParams scene;
    std::vector<Camera> cameras;
    std::vector<Image> images;  // RGB in [0,1]
    std::vector<Image> masks;   // single channel, {0,1}
    TriMesh coarse;
};

void export_dataset(const AnalyticScene& scene, const RigOptions& rig, const std::string& outdir,
                    int coarse_subdivisions = 4);
Dataset load_dataset(const std::string& dir);

// Nearest-pixel downscale of every view to res x res, intrinsics rescaled to
// match. No-op when res matches or is 0.
void downscale(Dataset& ds, int res);

// cameras.json helpers (shared with the CLI).
void save_cameras_json(const std::vector<Camera>& cams, const std::string& path);
std::vector<Camera> load_cameras_json(const std::string& path);

}  // namespace relievo
