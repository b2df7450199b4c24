#include "relievo/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace relievo {

std::string DisplacementReport::to_json() const {
    nlohmann::json j;
    j["vertices"] = displacement.size();
    j["min"] = min;
    j["max"] = max;
    j["mean_abs"] = mean_abs;
    j["clamped"] = clamped;
    j["clamp_warning"] = clamp_warning;
    return j.dump(2) + "\n";
}

TriMesh transfer_details(const ScalarField& field, const TriMesh& coarse,
                         const TransferOptions& opts, DisplacementReport& report) {
    TriMesh fine = coarse;
    if (fine.normals.size() != fine.vertices.size()) fine.recompute_vertex_normals();

    Vec3 bc;
    real bradius;
    coarse.bounding_sphere(bc, bradius);
    const real clamp = opts.clamp_fraction > 0 ? opts.clamp_fraction * bradius
                                               : std::numeric_limits<real>::infinity();

    const int n = coarse.vertex_count();
    report = DisplacementReport{};
    report.displacement.resize(n);
    report.min = std::numeric_limits<real>::infinity();
    report.max = -report.min;
    const real sign = opts.positive_outside ? real(-1) : real(1);
    for (int i = 0; i < n; ++i) {
        real d = sign * field.value(coarse.vertices[i]);
        if (std::abs(d) > clamp) {
            d = d < 0 ? -clamp : clamp;
            ++report.clamped;
        }
        Vec3 dir = fine.normals[i];
        if (opts.pull_mode) {
            Vec3 g = field.gradient(coarse.vertices[i]);
            if (length(g) > real(1e-12)) dir = normalized(g);
        }
        fine.vertices[i] = coarse.vertices[i] + dir * d;
        report.displacement[i] = d;
        report.min = std::min(report.min, d);
        report.max = std::max(report.max, d);
        report.mean_abs += std::abs(d);
    }
    report.mean_abs /= std::max(1, n);
    report.clamp_warning = report.clamped > n / 5;
    if (report.clamp_warning)
        std::fprintf(stderr,
                     "[transfer] %d of %d vertices hit the displacement clamp; "
                     "field and mesh may be misaligned\n",
                     report.clamped, n);
    fine.recompute_vertex_normals();
    return fine;
}

}  // namespace relievo
