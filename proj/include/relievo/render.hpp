#pragma once

#include "relievo/bvh.hpp"
#include "relievo/camera.hpp"
#include "relievo/image.hpp"
#include "relievo/sdf_field.hpp"
#include "relievo/shading.hpp"

namespace relievo {

// Self-supervised appearance decomposition of one view (rendered color plus
// the three factors of c = A*D + a_s*S). Background pixels are black; rays
// that hit the SDF but miss the coarse mesh fall back to the SDF normal for
// D's input.
struct Decomposition {
    Image rendered;  // RGB
    Image albedo;    // RGB
    Image diffuse;   // gray
    Image specular;  // gray
    Image mask;      // gray, SDF hit coverage
};

Decomposition decompose_view(const SdfField& field, const ShadingModel& shading,
                             const Bvh& coarse_bvh, const Camera& cam, real bound_radius);

}  // namespace relievo
