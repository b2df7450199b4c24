#pragma once

#include <limits>
#include <vector>

#include "relievo/mesh.hpp"

namespace relievo {

struct MeshHit {
    bool hit = false;
    real t = std::numeric_limits<real>::infinity();
    int face = -1;
    real b0 = 0, b1 = 0, b2 = 0;  // barycentrics, sum to 1
    Vec3 point;
};

// Two-sided ray/triangle test (Moller-Trumbore). Shared by the BVH and the
// brute-force oracle so both report bit-identical t values.
bool intersect_triangle(const Ray& ray, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                        real& t, real& b1, real& b2);

struct ClosestPoint {
    real dist = std::numeric_limits<real>::infinity();
    int face = -1;
    Vec3 point;
    real b0 = 0, b1 = 0, b2 = 0;
};

// Closest point on a single triangle (Ericson's region method).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               real& b0, real& b1, real& b2);

// Binned-SAH BVH over mesh triangles, max 4 per leaf. The mesh must outlive
// the BVH and stay unmodified.
class Bvh {
public:
    explicit Bvh(const TriMesh& mesh);

    MeshHit intersect(const Ray& ray, real t_min = 0,
                      real t_max = std::numeric_limits<real>::infinity()) const;
    ClosestPoint closest_point(const Vec3& p) const;

    const TriMesh& mesh() const { return *mesh_; }

private:
    struct Node {
        Vec3 bmin, bmax;
        int left = -1;         // internal: child index; leaf: first triangle
        int count = 0;         // leaf triangle count; 0 for internal nodes
        int right = -1;
    };

    const TriMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<int> tri_order_;

    int build(std::vector<int>& tris, int begin, int end,
              const std::vector<Vec3>& centroids);
};

// Oracle counterpart of Bvh::intersect, testing every triangle.
MeshHit brute_force_intersect(const TriMesh& mesh, const Ray& ray, real t_min = 0,
                              real t_max = std::numeric_limits<real>::infinity());
ClosestPoint brute_force_closest_point(const TriMesh& mesh, const Vec3& p);

}  // namespace relievo
