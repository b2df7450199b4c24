#include "relievo/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace relievo {

bool intersect_triangle(const Ray& ray, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                        real& t, real& b1, real& b2) {
    const Vec3 e1 = v1 - v0;
    const Vec3 e2 = v2 - v0;
    const Vec3 pv = cross(ray.dir, e2);
    const real det = dot(e1, pv);
    if (std::abs(det) < real(1e-14)) return false;
    const real inv = real(1) / det;
    const Vec3 tv = ray.origin - v0;
    const real u = dot(tv, pv) * inv;
    if (u < 0 || u > 1) return false;
    const Vec3 qv = cross(tv, e1);
    const real v = dot(ray.dir, qv) * inv;
    if (v < 0 || u + v > 1) return false;
    const real tt = dot(e2, qv) * inv;
    if (tt <= 0) return false;
    t = tt;
    b1 = u;
    b2 = v;
    return true;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               real& b0, real& b1, real& b2) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const real d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) { b0 = 1; b1 = 0; b2 = 0; return a; }

    const Vec3 bp = p - b;
    const real d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) { b0 = 0; b1 = 1; b2 = 0; return b; }

    const real vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const real v = d1 / (d1 - d3);
        b0 = 1 - v; b1 = v; b2 = 0;
        return a + ab * v;
    }

    const Vec3 cp = p - c;
    const real d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) { b0 = 0; b1 = 0; b2 = 1; return c; }

    const real vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const real w = d2 / (d2 - d6);
        b0 = 1 - w; b1 = 0; b2 = w;
        return a + ac * w;
    }

    const real va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const real w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        b0 = 0; b1 = 1 - w; b2 = w;
        return b + (c - b) * w;
    }

    const real denom = real(1) / (va + vb + vc);
    const real v = vb * denom, w = vc * denom;
    b0 = 1 - v - w; b1 = v; b2 = w;
    return a + ab * v + ac * w;
}

namespace {

bool slab_test(const Vec3& bmin, const Vec3& bmax, const Ray& ray, const Vec3& inv_dir,
               real t_min, real t_max) {
    for (int i = 0; i < 3; ++i) {
        real t0 = (bmin[i] - ray.origin[i]) * inv_dir[i];
        real t1 = (bmax[i] - ray.origin[i]) * inv_dir[i];
        if (t0 > t1) std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max) return false;
    }
    return true;
}

real box_dist2(const Vec3& bmin, const Vec3& bmax, const Vec3& p) {
    real d2 = 0;
    for (int i = 0; i < 3; ++i) {
        real d = std::max({bmin[i] - p[i], real(0), p[i] - bmax[i]});
        d2 += d * d;
    }
    return d2;
}

}  // namespace

Bvh::Bvh(const TriMesh& mesh) : mesh_(&mesh) {
    std::vector<Vec3> centroids(mesh.face_count());
    std::vector<int> tris(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        tris[f] = f;
        const auto& t = mesh.faces[f];
        centroids[f] =
            (mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) * (real(1) / 3);
    }
    nodes_.reserve(mesh.face_count() * 2);
    if (!tris.empty()) build(tris, 0, static_cast<int>(tris.size()), centroids);
    tri_order_ = std::move(tris);
}

int Bvh::build(std::vector<int>& tris, int begin, int end, const std::vector<Vec3>& centroids) {
    const int node_idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    Vec3 bmin{1e30, 1e30, 1e30}, bmax{-1e30, -1e30, -1e30};
    Vec3 cmin = bmin, cmax = bmax;
    for (int i = begin; i < end; ++i) {
        const auto& t = mesh_->faces[tris[i]];
        for (int k = 0; k < 3; ++k) {
            bmin = min3(bmin, mesh_->vertices[t[k]]);
            bmax = max3(bmax, mesh_->vertices[t[k]]);
        }
        cmin = min3(cmin, centroids[tris[i]]);
        cmax = max3(cmax, centroids[tris[i]]);
    }
    nodes_[node_idx].bmin = bmin;
    nodes_[node_idx].bmax = bmax;

    const int count = end - begin;
    if (count <= 4) {
        nodes_[node_idx].left = begin;
        nodes_[node_idx].count = count;
        return node_idx;
    }

    // binned SAH split
    constexpr int kBins = 16;
    int best_axis = -1, best_bin = -1;
    real best_cost = std::numeric_limits<real>::infinity();
    const Vec3 cext = cmax - cmin;
    for (int axis = 0; axis < 3; ++axis) {
        if (cext[axis] < real(1e-12)) continue;
        struct Bin {
            Vec3 bmin{1e30, 1e30, 1e30}, bmax{-1e30, -1e30, -1e30};
            int n = 0;
        } bins[kBins];
        const real scale = kBins / cext[axis];
        for (int i = begin; i < end; ++i) {
            int b = std::min(kBins - 1,
                             static_cast<int>((centroids[tris[i]][axis] - cmin[axis]) * scale));
            const auto& t = mesh_->faces[tris[i]];
            for (int k = 0; k < 3; ++k) {
                bins[b].bmin = min3(bins[b].bmin, mesh_->vertices[t[k]]);
                bins[b].bmax = max3(bins[b].bmax, mesh_->vertices[t[k]]);
            }
            bins[b].n++;
        }
        real left_area[kBins], right_area[kBins];
        int left_n[kBins], right_n[kBins];
        Vec3 amin{1e30, 1e30, 1e30}, amax{-1e30, -1e30, -1e30};
        int n = 0;
        for (int b = 0; b < kBins; ++b) {
            if (bins[b].n) {
                amin = min3(amin, bins[b].bmin);
                amax = max3(amax, bins[b].bmax);
            }
            n += bins[b].n;
            Vec3 e = max3(amax - amin, Vec3{0, 0, 0});
            left_area[b] = 2 * (e.x * e.y + e.y * e.z + e.z * e.x);
            left_n[b] = n;
        }
        amin = Vec3{1e30, 1e30, 1e30};
        amax = Vec3{-1e30, -1e30, -1e30};
        n = 0;
        for (int b = kBins - 1; b >= 0; --b) {
            if (bins[b].n) {
                amin = min3(amin, bins[b].bmin);
                amax = max3(amax, bins[b].bmax);
            }
            n += bins[b].n;
            Vec3 e = max3(amax - amin, Vec3{0, 0, 0});
            right_area[b] = 2 * (e.x * e.y + e.y * e.z + e.z * e.x);
            right_n[b] = n;
        }
        for (int b = 0; b < kBins - 1; ++b) {
            if (left_n[b] == 0 || right_n[b + 1] == 0) continue;
            real cost = left_area[b] * left_n[b] + right_area[b + 1] * right_n[b + 1];
            if (cost < best_cost) {
                best_cost = cost;
                best_axis = axis;
                best_bin = b;
            }
        }
    }

    int mid;
    if (best_axis < 0) {
        mid = begin + count / 2;  // degenerate spread, median split
    } else {
        const real scale = kBins / cext[best_axis];
        auto it = std::partition(tris.begin() + begin, tris.begin() + end, [&](int tri) {
            int b = std::min(kBins - 1, static_cast<int>((centroids[tri][best_axis] -
                                                          cmin[best_axis]) * scale));
            return b <= best_bin;
        });
        mid = static_cast<int>(it - tris.begin());
        if (mid == begin || mid == end) mid = begin + count / 2;
    }

    int l = build(tris, begin, mid, centroids);
    int r = build(tris, mid, end, centroids);
    nodes_[node_idx].left = l;
    nodes_[node_idx].right = r;
    nodes_[node_idx].count = 0;
    return node_idx;
}

MeshHit Bvh::intersect(const Ray& ray, real t_min, real t_max) const {
    MeshHit best;
    if (nodes_.empty()) return best;
    const Vec3 inv_dir{real(1) / ray.dir.x, real(1) / ray.dir.y, real(1) / ray.dir.z};
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    real closest = t_max;
    while (sp) {
        const Node& node = nodes_[stack[--sp]];
        if (!slab_test(node.bmin, node.bmax, ray, inv_dir, t_min, closest)) continue;
        if (node.count) {
            for (int i = 0; i < node.count; ++i) {
                int f = tri_order_[node.left + i];
                const auto& tri = mesh_->faces[f];
                real t, b1, b2;
                if (intersect_triangle(ray, mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                       mesh_->vertices[tri[2]], t, b1, b2) &&
                    t >= t_min && t < closest) {
                    closest = t;
                    best.hit = true;
                    best.t = t;
                    best.face = f;
                    best.b1 = b1;
                    best.b2 = b2;
                    best.b0 = 1 - b1 - b2;
                    best.point = ray.at(t);
                }
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.right;
        }
    }
    return best;
}

ClosestPoint Bvh::closest_point(const Vec3& p) const {
    ClosestPoint best;
    if (nodes_.empty()) return best;
    real best_d2 = std::numeric_limits<real>::infinity();
    // traverse nearest-box-first
    struct Entry { int node; real d2; };
    Entry stack[64];
    int sp = 0;
    stack[sp++] = {0, box_dist2(nodes_[0].bmin, nodes_[0].bmax, p)};
    while (sp) {
        Entry e = stack[--sp];
        if (e.d2 >= best_d2) continue;
        const Node& node = nodes_[e.node];
        if (node.count) {
            for (int i = 0; i < node.count; ++i) {
                int f = tri_order_[node.left + i];
                const auto& tri = mesh_->faces[f];
                real b0, b1, b2;
                Vec3 q = closest_point_on_triangle(p, mesh_->vertices[tri[0]],
                                                   mesh_->vertices[tri[1]],
                                                   mesh_->vertices[tri[2]], b0, b1, b2);
                real d2 = length2(q - p);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best.face = f;
                    best.point = q;
                    best.b0 = b0;
                    best.b1 = b1;
                    best.b2 = b2;
                }
            }
        } else {
            real dl = box_dist2(nodes_[node.left].bmin, nodes_[node.left].bmax, p);
            real dr = box_dist2(nodes_[node.right].bmin, nodes_[node.right].bmax, p);
            // push the farther child first so the nearer one pops next
            if (dl < dr) {
                if (dr < best_d2) stack[sp++] = {node.right, dr};
                if (dl < best_d2) stack[sp++] = {node.left, dl};
            } else {
                if (dl < best_d2) stack[sp++] = {node.left, dl};
                if (dr < best_d2) stack[sp++] = {node.right, dr};
            }
        }
    }
    best.dist = std::sqrt(best_d2);
    return best;
}

MeshHit brute_force_intersect(const TriMesh& mesh, const Ray& ray, real t_min, real t_max) {
    MeshHit best;
    real closest = t_max;
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& tri = mesh.faces[f];
        real t, b1, b2;
        if (intersect_triangle(ray, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                               mesh.vertices[tri[2]], t, b1, b2) &&
            t >= t_min && t < closest) {
            closest = t;
            best.hit = true;
            best.t = t;
            best.face = f;
            best.b1 = b1;
            best.b2 = b2;
            best.b0 = 1 - b1 - b2;
            best.point = ray.at(t);
        }
    }
    return best;
}

ClosestPoint brute_force_closest_point(const TriMesh& mesh, const Vec3& p) {
    ClosestPoint best;
    real best_d2 = std::numeric_limits<real>::infinity();
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& tri = mesh.faces[f];
        real b0, b1, b2;
        Vec3 q = closest_point_on_triangle(p, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                           mesh.vertices[tri[2]], b0, b1, b2);
        real d2 = length2(q - p);
        if (d2 < best_d2) {
            best_d2 = d2;
            best.face = f;
            best.point = q;
            best.b0 = b0;
            best.b1 = b1;
            best.b2 = b2;
        }
    }
    best.dist = std::sqrt(best_d2);
    return best;
}

}  // namespace relievo
