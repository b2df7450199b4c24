#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relievo/bvh.hpp"

namespace relievo {

struct RigidTransform {
    Mat3 R;
    Vec3 t;
    Vec3 apply(const Vec3& p) const { return R * p + t; }
    // this after other: x -> this(other(x))
    RigidTransform compose(const RigidTransform& other) const {
        return {R * other.R, R * other.t + t};
    }
};

struct IcpResult {
    RigidTransform transform;       // maps source onto target
    std::vector<real> rms_history;  // per-iteration point-to-plane RMS
    real final_rms = 0;
    bool diverged = false;          // error grew 3 iterations running
};

// Point-to-plane rigid ICP from area-sampled source points onto the target
// surface, with correspondence rejection beyond 3x the median distance.
IcpResult rigid_icp(const TriMesh& source, const TriMesh& target, int iterations = 50,
                    int samples = 5000, std::uint64_t seed = 1);

// Vertices within the crop sphere; throws if none survive.
std::vector<Vec3> tight_crop(const TriMesh& mesh, const Vec3& center, real radius);

struct DistanceSummary {
    real mean = 0, median = 0, stddev = 0, max = 0;
    int count = 0;
};

DistanceSummary summarize(std::vector<real> values);

// Closest-surface distance (true point-to-triangle) of each point.
std::vector<real> point_to_surface_distances(const std::vector<Vec3>& points, const Bvh& ref);

// Mean of both directed mean distances, via area sampling of both surfaces.
real chamfer_symmetric(const TriMesh& a, const TriMesh& b, int samples = 100000,
                       std::uint64_t seed = 1);

// Sample the source surface, pair each sample with the closest reference
// surface point, average 1 - cos(angle between interpolated normals).
real normal_cosine_distance(const TriMesh& source, const TriMesh& reference,
                            int samples = 100000, std::uint64_t seed = 1);

struct EvalOptions {
    bool run_icp = true;
    int icp_iterations = 50;
    bool crop = false;
    Vec3 crop_center;
    real crop_radius = 0;
    int samples = 100000;
    std::uint64_t seed = 1;
};

struct EvalReport {
    DistanceSummary point_to_surface;  // source samples vs reference
    real chamfer = 0;
    real normal_cosine = 0;
    int samples = 0;
    bool icp_applied = false;
    bool icp_diverged = false;
    RigidTransform alignment;

    std::string to_json() const;
    std::string to_table() const;
};

EvalReport evaluate(const TriMesh& source, const TriMesh& reference, const EvalOptions& opts);

}  // namespace relievo
