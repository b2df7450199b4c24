#include "relievo/trace.hpp"

#include <cmath>

namespace relievo {

TraceResult sphere_trace(const ScalarField& field, const Ray& ray, real t_min, real t_max,
                         const TraceOptions& opts) {
    TraceResult res;
    if (t_min >= t_max) return res;
    real t = t_min;
    real prev_t = t;
    real prev_f = field.value(ray.at(t));
    res.min_value = prev_f;
    res.min_t = t;
    if (std::abs(prev_f) < opts.hit_eps) {
        res.hit = true;
        res.t = t;
        res.point = ray.at(t);
        return res;
    }
    for (int it = 0; it < opts.max_iters; ++it) {
        res.iters = it + 1;
        real step = opts.relaxation * prev_f;
        // inside the surface already: march forward by |F| to find the crossing
        if (step <= 0) step = std::max(std::abs(step), opts.hit_eps);
        real tn = prev_t + step;
        if (tn > t_max) {
            return res;  // left the interval: miss
        }
        real f = field.value(ray.at(tn));
        if (f < res.min_value) {
            res.min_value = f;
            res.min_t = tn;
        }
        if (std::abs(f) < opts.hit_eps) {
            res.hit = true;
            res.t = tn;
            res.point = ray.at(tn);
            return res;
        }
        if (prev_f > 0 && f < 0) {
            // overshoot: bisect between the last outside and first inside sample
            real lo = prev_t, hi = tn;
            real mid = (lo + hi) / 2, fm = 0;
            // at least bisection_steps halvings, then keep going until the
            // hit tolerance is met (the hit invariant requires |F| < eps)
            for (int b = 0; b < 64; ++b) {
                mid = (lo + hi) / 2;
                fm = field.value(ray.at(mid));
                if (b + 1 >= opts.bisection_steps && std::abs(fm) < opts.hit_eps) break;
                if (fm > 0)
                    lo = mid;
                else
                    hi = mid;
            }
            res.t = mid;
            res.point = ray.at(res.t);
            if (fm < res.min_value) {
                res.min_value = fm;
                res.min_t = res.t;
            }
            res.hit = std::abs(fm) < opts.hit_eps;
            return res;
        }
        prev_t = tn;
        prev_f = f;
    }
    res.diverged = true;
    return res;
}

std::optional<Vec3> pull_to_surface(const ScalarField& field, const Vec3& x) {
    const Vec3 g = field.gradient(x);
    const real n2 = length2(g);
    if (n2 <= real(1e-16)) return std::nullopt;
    // Newton step toward the zero level set; signed F so interior points
    // move outward and exterior points inward.
    return x - g * (field.value(x) / n2);
}

void stratified_min(const ScalarField& field, const Ray& ray, real t_min, real t_max,
                    int samples, real& min_value, real& min_t) {
    min_value = std::numeric_limits<real>::infinity();
    min_t = t_min;
    if (t_max <= t_min || samples <= 0) return;
    const real dt = (t_max - t_min) / samples;
    for (int i = 0; i < samples; ++i) {
        real t = t_min + (i + real(0.5)) * dt;
        real f = field.value(ray.at(t));
        if (f < min_value) {
            min_value = f;
            min_t = t;
        }
    }
}

}  // namespace relievo
