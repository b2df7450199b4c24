#pragma once

#include <string>

#include "relievo/mesh.hpp"
#include "relievo/trace.hpp"

namespace relievo {

struct TransferOptions {
    // Our field is positive outside, so embossing moves each vertex by
    // -n * F(p); flipping honors the opposite convention.
    bool positive_outside = true;
    // Displace along grad F / |grad F| instead of the mesh vertex normal.
    bool pull_mode = false;
    // Max |displacement| as a fraction of the coarse bounding-sphere radius;
    // <= 0 disables clamping.
    real clamp_fraction = 0.05;
};

struct DisplacementReport {
    std::vector<real> displacement;  // signed, per vertex, post-clamp
    real min = 0, max = 0, mean_abs = 0;
    int clamped = 0;
    bool clamp_warning = false;  // > 20% of vertices clamped

    std::string to_json() const;
};

// Emboss the field's details onto the coarse template: same connectivity,
// each vertex moved along its normal by the local SDF value, normals
// recomputed afterward.
TriMesh transfer_details(const ScalarField& field, const TriMesh& coarse,
                         const TransferOptions& opts, DisplacementReport& report);

}  // namespace relievo
