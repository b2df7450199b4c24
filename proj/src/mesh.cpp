#include "relievo/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace relievo {

Vec3 TriMesh::face_normal(int f) const {
    const auto& t = faces[f];
    Vec3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
    return normalized(n);
}

real TriMesh::face_area(int f) const {
    const auto& t = faces[f];
    return real(0.5) *
           length(cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]));
}

real TriMesh::total_area() const {
    real a = 0;
    for (int f = 0; f < face_count(); ++f) a += face_area(f);
    return a;
}

void TriMesh::recompute_vertex_normals() {
    normals.assign(vertices.size(), Vec3{});
    for (const auto& t : faces) {
        Vec3 n = cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
        // unnormalized cross product is already area-weighted
        normals[t[0]] += n;
        normals[t[1]] += n;
        normals[t[2]] += n;
    }
    for (auto& n : normals) n = normalized(n);
}

void TriMesh::bounding_sphere(Vec3& center, real& radius) const {
    center = Vec3{};
    for (const auto& v : vertices) center += v;
    if (!vertices.empty()) center *= real(1) / vertices.size();
    radius = 0;
    for (const auto& v : vertices) radius = std::max(radius, length(v - center));
}

Vec3 TriMesh::point_on(int f, real b0, real b1, real b2) const {
    const auto& t = faces[f];
    return vertices[t[0]] * b0 + vertices[t[1]] * b1 + vertices[t[2]] * b2;
}

Vec3 TriMesh::interp_normal(int f, real b0, real b1, real b2) const {
    const auto& t = faces[f];
    Vec3 n = normals[t[0]] * b0 + normals[t[1]] * b1 + normals[t[2]] * b2;
    real len = length(n);
    if (len < real(1e-12))
        throw std::runtime_error("degenerate interpolated normal on face " + std::to_string(f));
    return n / len;
}

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, int count, std::mt19937_64& rng) {
    std::vector<real> cdf(mesh.face_count());
    real acc = 0;
    for (int f = 0; f < mesh.face_count(); ++f) {
        acc += mesh.face_area(f);
        cdf[f] = acc;
    }
    std::uniform_real_distribution<real> uni(0, 1);
    std::vector<SurfaceSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        real r = uni(rng) * acc;
        int f = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        if (f >= mesh.face_count()) f = mesh.face_count() - 1;
        real u = uni(rng), v = uni(rng);
        if (u + v > 1) {
            u = 1 - u;
            v = 1 - v;
        }
        real b0 = 1 - u - v, b1 = u, b2 = v;
        out.push_back({mesh.point_on(f, b0, b1, b2), mesh.interp_normal(f, b0, b1, b2), f});
    }
    return out;
}

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open OBJ file: " + path);
    TriMesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<int> vn_of_vertex;  // normal index per vertex as referenced by faces
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 v;
            ss >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
        } else if (tag == "vn") {
            Vec3 n;
            ss >> n.x >> n.y >> n.z;
            file_normals.push_back(n);
        } else if (tag == "f") {
            std::vector<int> vi, ni;
            std::string tok;
            while (ss >> tok) {
                // forms: v, v/vt, v//vn, v/vt/vn
                int v = 0, n = 0;
                size_t s1 = tok.find('/');
                v = std::stoi(tok.substr(0, s1));
                if (s1 != std::string::npos) {
                    size_t s2 = tok.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < tok.size())
                        n = std::stoi(tok.substr(s2 + 1));
                }
                vi.push_back(v > 0 ? v - 1 : static_cast<int>(mesh.vertices.size()) + v);
                ni.push_back(n > 0 ? n - 1 : -1);
            }
            for (size_t k = 2; k < vi.size(); ++k) {
                mesh.faces.push_back({vi[0], vi[k - 1], vi[k]});
                if (vn_of_vertex.size() < mesh.vertices.size())
                    vn_of_vertex.resize(mesh.vertices.size(), -1);
                if (ni[0] >= 0) vn_of_vertex[vi[0]] = ni[0];
                if (ni[k - 1] >= 0) vn_of_vertex[vi[k - 1]] = ni[k - 1];
                if (ni[k] >= 0) vn_of_vertex[vi[k]] = ni[k];
            }
        }
    }
    bool have_all = !file_normals.empty() && vn_of_vertex.size() == mesh.vertices.size();
    if (have_all)
        for (int idx : vn_of_vertex)
            if (idx < 0) have_all = false;
    if (have_all) {
        mesh.normals.resize(mesh.vertices.size());
        for (size_t i = 0; i < mesh.vertices.size(); ++i)
            mesh.normals[i] = normalized(file_normals[vn_of_vertex[i]]);
    } else {
        mesh.recompute_vertex_normals();
    }
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write OBJ file: " + path);
    char buf[256];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", double(v.x), double(v.y),
                      double(v.z));
        out << buf;
    }
    for (const auto& n : mesh.normals) {
        std::snprintf(buf, sizeof(buf), "vn %.17g %.17g %.17g\n", double(n.x), double(n.y),
                      double(n.z));
        out << buf;
    }
    const bool with_n = mesh.normals.size() == mesh.vertices.size();
    for (const auto& f : mesh.faces) {
        if (with_n)
            std::snprintf(buf, sizeof(buf), "f %d//%d %d//%d %d//%d\n", f[0] + 1, f[0] + 1,
                          f[1] + 1, f[1] + 1, f[2] + 1, f[2] + 1);
        else
            std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out << buf;
    }
    if (!out) throw std::runtime_error("failed writing OBJ file: " + path);
}

TriMesh make_icosphere(int subdivisions, real radius, const Vec3& center) {
    const real t = (1 + std::sqrt(real(5))) / 2;
    TriMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : m.vertices) v = normalized(v);
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = static_cast<int>(m.vertices.size());
            m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        m.faces = std::move(next);
    }
    m.normals.resize(m.vertices.size());
    for (size_t i = 0; i < m.vertices.size(); ++i) {
        m.normals[i] = m.vertices[i];  // exact sphere normal
        m.vertices[i] = center + m.vertices[i] * radius;
    }
    return m;
}

}  // namespace relievo
