#pragma once

#include <functional>
#include <optional>

#include "relievo/vec3.hpp"

namespace relievo {

// A scalar field with a gradient; the surface is its zero level set.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual real value(const Vec3& x) const = 0;
    virtual Vec3 gradient(const Vec3& x) const = 0;
};

struct TraceOptions {
    real hit_eps = 5e-5;       // |F| below this counts as a hit
    real relaxation = 0.8;     // under-relaxed step: t += relaxation * F
    int max_iters = 256;
    int bisection_steps = 8;   // refinement once a sign change brackets the hit
};

struct TraceResult {
    bool hit = false;
    real t = 0;
    Vec3 point;
    int iters = 0;
    real min_value = std::numeric_limits<real>::infinity();  // min F along the march
    real min_t = 0;                                          // where the minimum occurred
    bool diverged = false;  // iteration cap reached while still outside tolerance
};

// Sphere tracing of a (near-)metric field along [t_min, t_max].
TraceResult sphere_trace(const ScalarField& field, const Ray& ray, real t_min, real t_max,
                         const TraceOptions& opts = {});

// One Newton pull toward the zero level set: x - F(x) grad/|grad|^2.
// nullopt when the gradient degenerates (norm <= 1e-8).
std::optional<Vec3> pull_to_surface(const ScalarField& field, const Vec3& x);

// Min of F over stratified samples of [t_min, t_max]; used for silhouette
// supervision on rays that never cross the surface.
void stratified_min(const ScalarField& field, const Ray& ray, real t_min, real t_max,
                    int samples, real& min_value, real& min_t);

}  // namespace relievo
