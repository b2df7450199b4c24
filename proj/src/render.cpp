#include "relievo/render.hpp"

#include <algorithm>

#include "relievo/trainer.hpp"

namespace relievo {

Decomposition decompose_view(const SdfField& field, const ShadingModel& shading,
                             const Bvh& coarse_bvh, const Camera& cam, real bound_radius) {
    Decomposition out;
    out.rendered = Image(cam.width, cam.height, 3);
    out.albedo = Image(cam.width, cam.height, 3);
    out.diffuse = Image(cam.width, cam.height, 1);
    out.specular = Image(cam.width, cam.height, 1);
    out.mask = Image(cam.width, cam.height, 1);

    const real dist = length(cam.center());
    const real margin = bound_radius * real(1.2) + real(0.1);
    const real t0 = std::max(real(1e-3), dist - margin);
    const real t1 = dist + margin;

    std::vector<Ray> rays;
    rays.reserve(size_t(cam.width) * cam.height);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u) rays.push_back(cam.pixel_to_ray(u, v));

    std::vector<real> tmin(rays.size(), t0), tmax(rays.size(), t1);
    BatchTrace tr = batched_sphere_trace(field, rays, tmin, tmax);

    std::vector<int> hit_rows;
    for (size_t i = 0; i < rays.size(); ++i)
        if (tr.hit[i]) hit_rows.push_back(int(i));
    if (hit_rows.empty()) return out;

    const int B = int(hit_rows.size());
    Mat X(B, 3), V(B, 3), Nstar(B, 3);
    for (int k = 0; k < B; ++k) {
        const int i = hit_rows[k];
        const Vec3& p = tr.point[i];
        X.at(k, 0) = p.x; X.at(k, 1) = p.y; X.at(k, 2) = p.z;
        V.at(k, 0) = rays[i].dir.x; V.at(k, 1) = rays[i].dir.y; V.at(k, 2) = rays[i].dir.z;
    }
    Mat s, z, grad;
    field.eval(X, s, z);
    field.eval_with_gradient(X, s, grad);
    Mat N(B, 3);
    for (int k = 0; k < B; ++k) {
        Vec3 g{grad.at(k, 0), grad.at(k, 1), grad.at(k, 2)};
        Vec3 n = length(g) > real(1e-12) ? normalized(g) : Vec3{0, 0, 1};
        N.at(k, 0) = n.x; N.at(k, 1) = n.y; N.at(k, 2) = n.z;
        MeshHit mh = coarse_bvh.intersect(rays[hit_rows[k]], t0, t1);
        Vec3 ns = mh.hit ? coarse_bvh.mesh().interp_normal(mh.face, mh.b0, mh.b1, mh.b2) : n;
        Nstar.at(k, 0) = ns.x; Nstar.at(k, 1) = ns.y; Nstar.at(k, 2) = ns.z;
    }

    Mat A, D, S, C;
    shading.render(X, z, Nstar, N, V, A, D, S, C);

    for (int k = 0; k < B; ++k) {
        const int i = hit_rows[k];
        const int px = i % cam.width, py = i / cam.width;
        real* rp = out.rendered.at(px, py);
        rp[0] = C.at(k, 0); rp[1] = C.at(k, 1); rp[2] = C.at(k, 2);
        real* ap = out.albedo.at(px, py);
        ap[0] = A.at(k, 0); ap[1] = A.at(k, 1); ap[2] = A.at(k, 2);
        out.diffuse.at(px, py)[0] = D.rows ? D.a[k] : 0;
        out.specular.at(px, py)[0] = S.rows ? S.a[k] : 0;
        out.mask.at(px, py)[0] = 1;
    }
    return out;
}

}  // namespace relievo
