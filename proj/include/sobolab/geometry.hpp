#pragma once

#include <cmath>
#include <string>

#include "sobolab/core.hpp"

namespace sobolab {

enum class SpaceKind { Euclidean, HyperbolicHalfSpace };

struct Space {
    SpaceKind kind;
    int dim;

    bool operator==(const Space&) const = default;
};

inline Space euclidean_space(int n) {
    require(n >= 1, "euclidean_space: n >= 1 required");
    return {SpaceKind::Euclidean, n};
}

inline Space hyperbolic_space(int n) {
    require(n >= 1, "hyperbolic_space: n >= 1 required");
    return {SpaceKind::HyperbolicHalfSpace, n};
}

// A location in R^n or in the upper half-space chart of H^n.
struct Point {
    Vec coords;
    Space space;

    Point(Vec c, Space s) : coords(std::move(c)), space(s) {
        require(static_cast<int>(coords.size()) == space.dim, "Point: coordinate count != dim");
        if (space.kind == SpaceKind::HyperbolicHalfSpace)
            require_domain(coords.back() > 0.0, "Point: hyperbolic chart needs x_n > 0");
    }

    int dim() const { return space.dim; }
    double height() const { return coords.back(); }
};

inline Point euclidean_point(Vec c) {
    int n = static_cast<int>(c.size());
    return Point(std::move(c), euclidean_space(n));
}

inline Point hyperbolic_point(Vec c) {
    int n = static_cast<int>(c.size());
    return Point(std::move(c), hyperbolic_space(n));
}

// Tangent vector expressed in the orthonormal frame e_i = x_n d/dx_i.
struct FrameVector {
    Vec components;  // frame components, so |v|_g = euclidean norm of components
    Point base;

    FrameVector(Vec comp, Point b) : components(std::move(comp)), base(std::move(b)) {
        require(base.space.kind == SpaceKind::HyperbolicHalfSpace,
                "FrameVector: base point must be in the hyperbolic chart");
        require(static_cast<int>(components.size()) == base.dim(),
                "FrameVector: component count != dim");
        for (double c : components)
            require(std::isfinite(c), "FrameVector: components must be finite");
    }
};

// Totally geodesic hypersurfaces of H^n: vertical hyperplanes {x_axis = offset}
// and Euclidean northern hemispheres centered on {x_n = 0}.
struct Hypersurface {
    enum class Kind { VerticalPlane, Hemisphere };

    Kind kind;
    int dim;         // ambient n
    int axis = 0;    // VerticalPlane: 0-based index of the normal coordinate (< dim-1)
    double offset = 0.0;
    Vec center;      // Hemisphere: z, length n-1
    double radius = 0.0;
};

inline Hypersurface vertical_plane(int n, int axis, double offset) {
    require(n >= 2, "vertical_plane: n >= 2 required");
    require(axis >= 0 && axis < n - 1, "vertical_plane: normal axis must be horizontal");
    require(std::isfinite(offset), "vertical_plane: offset must be finite");
    Hypersurface s;
    s.kind = Hypersurface::Kind::VerticalPlane;
    s.dim = n;
    s.axis = axis;
    s.offset = offset;
    return s;
}

inline Hypersurface hemisphere(Vec center, double radius) {
    require(radius > 0.0, "hemisphere: radius must be positive");
    Hypersurface s;
    s.kind = Hypersurface::Kind::Hemisphere;
    s.dim = static_cast<int>(center.size()) + 1;
    require(s.dim >= 2, "hemisphere: ambient dimension >= 2 required");
    s.center = std::move(center);
    s.radius = radius;
    return s;
}

// Relative tolerance on the defining equation for surface membership.
// Quadrature nodes are constructed exactly on-surface; this guards user input.
constexpr double surface_tolerance = 1e-9;

inline double surface_defect(const Point& x, const Hypersurface& s) {
    require(x.dim() == s.dim, "surface_defect: dimension mismatch");
    if (s.kind == Hypersurface::Kind::VerticalPlane) {
        double scale = std::max(1.0, std::abs(s.offset));
        return std::abs(x.coords[static_cast<std::size_t>(s.axis)] - s.offset) / scale;
    }
    double d2 = 0.0;
    for (int i = 0; i + 1 < s.dim; ++i) {
        double t = x.coords[static_cast<std::size_t>(i)] - s.center[static_cast<std::size_t>(i)];
        d2 += t * t;
    }
    d2 += x.height() * x.height();
    return std::abs(std::sqrt(d2) - s.radius) / s.radius;
}

inline bool on_surface(const Point& x, const Hypersurface& s, double tol = surface_tolerance) {
    return surface_defect(x, s) <= tol;
}

// <u,v> at x: Euclidean dot product, or |dx|^2 / x_n^2 in the half-space chart.
// u, v are coordinate components.
inline double metric_inner(const Point& x, const Vec& u, const Vec& v) {
    require(static_cast<int>(u.size()) == x.dim() && static_cast<int>(v.size()) == x.dim(),
            "metric_inner: vector dimension mismatch");
    if (x.space.kind == SpaceKind::Euclidean) return dot(u, v);
    require_domain(x.height() > 0.0, "metric_inner: x_n > 0 required");
    return dot(u, v) / (x.height() * x.height());
}

// Frame coefficients of nabla_{e_i} e_j; constant over the chart.
// Indices are 1-based to match the frame labels e_1..e_n.
inline Vec frame_connection(int i, int j, int n) {
    require(n >= 1, "frame_connection: n >= 1 required");
    require(i >= 1 && i <= n && j >= 1 && j <= n, "frame_connection: index out of range");
    Vec c = zeros(n);
    if (i == n) return c;                 // nabla_{e_n} e_j = 0 for all j
    if (j == n) {
        c[static_cast<std::size_t>(i - 1)] = -1.0;  // nabla_{e_i} e_n = -e_i
    } else if (i == j) {
        c[static_cast<std::size_t>(n - 1)] = 1.0;   // nabla_{e_i} e_i = e_n
    }
    return c;
}

inline double hyperbolic_distance(const Point& x, const Point& y) {
    require(x.space == y.space, "hyperbolic_distance: points in different spaces");
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace,
            "hyperbolic_distance: hyperbolic chart required");
    double d2 = norm2(sub(x.coords, y.coords));
    double arg = 1.0 + d2 / (2.0 * x.height() * y.height());
    return std::acosh(std::max(1.0, arg));
}

// dV_g = dx / x_n^n; the Euclidean case carries weight 1.
inline double volume_weight(const Point& x) {
    if (x.space.kind == SpaceKind::Euclidean) return 1.0;
    require_domain(x.height() > 0.0, "volume_weight: x_n > 0 required");
    return std::pow(x.height(), -static_cast<double>(x.dim()));
}

// Converts Euclidean surface measure to the induced hyperbolic measure dV'_g:
// dsigma / (x_n^{n-1} r) on hemispheres, dsigma / x_n^{n-1} on vertical planes.
inline double surface_measure_weight(const Point& x, const Hypersurface& s) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace,
            "surface_measure_weight: hyperbolic chart required");
    require_domain(on_surface(x, s), "surface_measure_weight: point not on surface");
    double w = std::pow(x.height(), -static_cast<double>(s.dim - 1));
    if (s.kind == Hypersurface::Kind::Hemisphere) w /= s.radius;
    return w;
}

// g-unit normal in frame components. Hemispheres get the upward normal
// (x - (z,0)) / |x - (z,0)|; vertical planes get +e_axis.
inline FrameVector unit_normal(const Point& x, const Hypersurface& s) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace,
            "unit_normal: hyperbolic chart required");
    require_domain(on_surface(x, s), "unit_normal: point not on surface");
    const int n = s.dim;
    if (s.kind == Hypersurface::Kind::VerticalPlane)
        return FrameVector(unit(n, s.axis), x);
    Vec w = x.coords;
    for (int i = 0; i + 1 < n; ++i) w[static_cast<std::size_t>(i)] -= s.center[static_cast<std::size_t>(i)];
    const double len = norm(w);
    return FrameVector(scaled(std::move(w), 1.0 / len), x);
}

// Isometries of the chart used in invariance checks: horizontal translation
// x' -> x' + a and dilation x -> eps x. Both map the family S into itself.
inline Point translate_horizontal(const Point& x, const Vec& a) {
    require(static_cast<int>(a.size()) == x.dim() - 1, "translate_horizontal: bad shift size");
    Vec c = x.coords;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] += a[i];
    return Point(std::move(c), x.space);
}

inline Point dilate(const Point& x, double eps) {
    require(eps > 0.0, "dilate: eps > 0 required");
    return Point(scaled(x.coords, eps), x.space);
}

inline Hypersurface translate_horizontal(const Hypersurface& s, const Vec& a) {
    require(static_cast<int>(a.size()) == s.dim - 1, "translate_horizontal: bad shift size");
    Hypersurface t = s;
    if (s.kind == Hypersurface::Kind::VerticalPlane) {
        t.offset += a[static_cast<std::size_t>(s.axis)];
    } else {
        t.center = add(t.center, a);
    }
    return t;
}

inline Hypersurface dilate(const Hypersurface& s, double eps) {
    require(eps > 0.0, "dilate: eps > 0 required");
    Hypersurface t = s;
    if (s.kind == Hypersurface::Kind::VerticalPlane) {
        t.offset *= eps;
    } else {
        t.center = scaled(t.center, eps);
        t.radius *= eps;
    }
    return t;
}

}  // namespace sobolab
