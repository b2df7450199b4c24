#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "relievo/vec3.hpp"

namespace relievo {

// Pinhole camera. Extrinsics map world to camera: x_cam = R * x_world + t.
// Camera looks down +z in its own frame, pixel (u,v) has u rightward and
// v downward, and rays pass through pixel centers.
struct Camera {
    real fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    Mat3 rotation;     // world -> camera
    Vec3 translation;  // world -> camera

    Vec3 center() const { return -(rotation.transposed() * translation); }

    Ray pixel_to_ray(real u, real v) const {
        if (u < 0 || u >= width || v < 0 || v >= height)
            throw std::out_of_range("pixel (" + std::to_string(u) + "," + std::to_string(v) +
                                    ") outside image");
        // +0.5 lands on the pixel center
        Vec3 d_cam{(u + real(0.5) - cx) / fx, (v + real(0.5) - cy) / fy, 1};
        Vec3 d_world = rotation.transposed() * d_cam;
        return Ray{center(), normalized(d_world)};
    }

    // Projects a world point; returns false when behind the camera.
    bool project(const Vec3& p_world, real& u, real& v) const {
        Vec3 pc = rotation * p_world + translation;
        if (pc.z <= real(0)) return false;
        u = fx * pc.x / pc.z + cx - real(0.5);
        v = fy * pc.y / pc.z + cy - real(0.5);
        return true;
    }
};

// JSON (de)serialization of camera arrays lives in scene.cpp next to the
// dataset layout code.

}  // namespace relievo
