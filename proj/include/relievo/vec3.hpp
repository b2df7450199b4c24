#pragma once

#include <cmath>

#include "relievo/mat.hpp"

namespace relievo {

struct Vec3 {
    real x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(real x_, real y_, real z_) : x(x_), y(y_), z(z_) {}

    real& operator[](int i) { return (&x)[i]; }
    real operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(real s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(real s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(real s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(real s, const Vec3& v) { return v * s; }

inline real dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline real length2(const Vec3& v) { return dot(v, v); }
inline real length(const Vec3& v) { return std::sqrt(length2(v)); }

inline Vec3 normalized(const Vec3& v) {
    real n = length(v);
    return n > real(0) ? v / n : Vec3{0, 0, 0};
}

inline Vec3 min3(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max3(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
    Vec3 at(real t) const { return origin + dir * t; }
};

// 3x3 matrix, row-major. Used for camera rotations and rigid transforms.
struct Mat3 {
    real m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                real s = 0;
                for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
                r.m[i * 3 + j] = s;
            }
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i * 3 + j] = m[j * 3 + i];
        return r;
    }
    // Rotation about a unit axis by angle (radians), Rodrigues form.
    static Mat3 axis_angle(const Vec3& axis, real angle) {
        const real c = std::cos(angle), s = std::sin(angle), t = 1 - c;
        const Vec3 u = axis;
        Mat3 r;
        r.m[0] = c + u.x * u.x * t;
        r.m[1] = u.x * u.y * t - u.z * s;
        r.m[2] = u.x * u.z * t + u.y * s;
        r.m[3] = u.y * u.x * t + u.z * s;
        r.m[4] = c + u.y * u.y * t;
        r.m[5] = u.y * u.z * t - u.x * s;
        r.m[6] = u.z * u.x * t - u.y * s;
        r.m[7] = u.z * u.y * t + u.x * s;
        r.m[8] = c + u.z * u.z * t;
        return r;
    }
};

}  // namespace relievo
