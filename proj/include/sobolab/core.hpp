#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobolab {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

constexpr double pi = 3.141592653589793238462643383279502884;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_domain(bool cond, const std::string& msg) {
    if (!cond) throw std::domain_error(msg);
}

inline double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Vec add(Vec a, const Vec& b) {
    require(a.size() == b.size(), "add: size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec sub(Vec a, const Vec& b) {
    require(a.size() == b.size(), "sub: size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec scaled(Vec a, double c) {
    for (auto& x : a) x *= c;
    return a;
}

inline Vec zeros(int n) { return Vec(static_cast<std::size_t>(n), 0.0); }

inline Vec unit(int n, int i) {
    Vec e = zeros(n);
    e[static_cast<std::size_t>(i)] = 1.0;
    return e;
}

inline Mat zero_matrix(int rows, int cols) {
    return Mat(static_cast<std::size_t>(rows), Vec(static_cast<std::size_t>(cols), 0.0));
}

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (const auto& row : m)
        for (double v : row) s += v * v;
    return std::sqrt(s);
}

inline double trace(const Mat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m[i][i];
    return s;
}

// Surface area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) {
    require(n >= 1, "unit_sphere_area: n >= 1 required");
    return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// Axis-aligned box, used for declared supports and quadrature extents.
struct Box {
    Vec lo, hi;

    Box() = default;
    Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        require(lo.size() == hi.size(), "Box: corner size mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            require(lo[i] <= hi[i], "Box: lo > hi");
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& x, double slack = 0.0) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }

    bool contained_in(const Box& outer, double slack = 1e-12) const {
        if (outer.dim() != dim()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] < outer.lo[i] - slack || hi[i] > outer.hi[i] + slack) return false;
        return true;
    }

    Box expanded(double margin) const {
        Box b = *this;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            b.lo[i] -= margin;
            b.hi[i] += margin;
        }
        return b;
    }

    Vec center() const {
        Vec c = lo;
        for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    double max_corner_norm() const {
        double m = 0.0;
        const int n = dim();
        for (int mask = 0; mask < (1 << n); ++mask) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                double c = (mask >> i) & 1 ? hi[static_cast<std::size_t>(i)]
                                           : lo[static_cast<std::size_t>(i)];
                s += c * c;
            }
            m = std::max(m, s);
        }
        return std::sqrt(m);
    }
};

inline Box box_union(const Box& a, const Box& b) {
    require(a.dim() == b.dim(), "box_union: dimension mismatch");
    Box u = a;
    for (std::size_t i = 0; i < u.lo.size(); ++i) {
        u.lo[i] = std::min(u.lo[i], b.lo[i]);
        u.hi[i] = std::max(u.hi[i], b.hi[i]);
    }
    return u;
}

inline std::optional<Box> box_intersection(const Box& a, const Box& b) {
    require(a.dim() == b.dim(), "box_intersection: dimension mismatch");
    Box r = a;
    for (std::size_t i = 0; i < r.lo.size(); ++i) {
        r.lo[i] = std::max(r.lo[i], b.lo[i]);
        r.hi[i] = std::min(r.hi[i], b.hi[i]);
        if (r.lo[i] > r.hi[i]) return std::nullopt;
    }
    return r;
}

}  // namespace sobolab
