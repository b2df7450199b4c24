#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "relievo/vec3.hpp"

namespace relievo {

// Indexed triangle mesh with per-vertex normals.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> normals;  // per vertex, unit

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    Vec3 face_normal(int f) const;
    real face_area(int f) const;
    real total_area() const;

    // Area-weighted average of incident face normals, normalized.
    // Isolated vertices get a zero normal.
    void recompute_vertex_normals();

    // Bounding sphere (centroid + max distance); used for trace bounds.
    void bounding_sphere(Vec3& center, real& radius) const;

    // Barycentric position / interpolated normal on a face.
    Vec3 point_on(int f, real b0, real b1, real b2) const;
    Vec3 interp_normal(int f, real b0, real b1, real b2) const;  // normalized; throws on degenerate
};

// Surface point sampled uniformly by area.
struct SurfaceSample {
    Vec3 position;
    Vec3 normal;  // barycentric-interpolated vertex normal
    int face;
};

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, int count, std::mt19937_64& rng);

// Wavefront OBJ I/O. Loading triangulates polygon faces (fan) and recomputes
// vertex normals when the file carries none.
TriMesh load_obj(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

// Icosphere with the given subdivision level, radius, and center.
TriMesh make_icosphere(int subdivisions, real radius = 1, const Vec3& center = {});

}  // namespace relievo
