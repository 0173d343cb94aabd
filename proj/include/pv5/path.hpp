#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pv5/complex2x2.hpp"
#include "pv5/errors.hpp"

namespace pv5 {

/// Piecewise-linear path in the punctured t-plane. Two paths with the same
/// endpoints but different winding around t = 0 are different points of the
/// universal cover; the path itself is the datum.
struct PathSpec {
    std::vector<Cpx> waypoints;
};

inline double point_segment_distance(Cpx p, Cpx a, Cpx b) {
    const Cpx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double s = ((p - a) * std::conj(d)).real() / len2;
    s = std::min(1.0, std::max(0.0, s));
    return std::abs(p - (a + s * d));
}

inline void validate_path(const PathSpec& path) {
    if (path.waypoints.empty())
        throw Error(ErrorCode::InvalidPath, "path has no waypoints");
    for (const Cpx& w : path.waypoints)
        if (w == Cpx(0.0))
            throw Error(ErrorCode::PathThroughOrigin, "waypoint at t = 0");
    for (std::size_t k = 0; k + 1 < path.waypoints.size(); ++k) {
        const Cpx a = path.waypoints[k], b = path.waypoints[k + 1];
        if (a == b) throw Error(ErrorCode::InvalidPath, "consecutive waypoints coincide");
        if (point_segment_distance(Cpx(0.0), a, b) <= 0.0)
            throw Error(ErrorCode::PathThroughOrigin, "segment passes through t = 0");
    }
}

inline double path_length(const PathSpec& path) {
    double L = 0.0;
    for (std::size_t k = 0; k + 1 < path.waypoints.size(); ++k)
        L += std::abs(path.waypoints[k + 1] - path.waypoints[k]);
    return L;
}

inline PathSpec reversed(const PathSpec& path) {
    PathSpec r = path;
    std::reverse(r.waypoints.begin(), r.waypoints.end());
    return r;
}

/// Winding number around the origin of the closed polygon through `loop`
/// (last vertex implicitly joined back to the first). Each segment avoids
/// the origin, so its argument increment is the principal one.
inline int winding_around_origin(const std::vector<Cpx>& loop) {
    double total = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Cpx a = loop[k], b = loop[(k + 1) % n];
        if (a == b) continue;
        total += std::arg(b / a);
    }
    return (int)std::lround(total / (2.0 * std::numbers::pi));
}

} // namespace pv5
