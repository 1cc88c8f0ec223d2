#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "sobolab/core.hpp"
#include "sobolab/geometry.hpp"

namespace sobolab {

struct Nodes1D {
    Vec x, w;
    std::size_t size() const { return x.size(); }
};

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline const Nodes1D& gauss_legendre(int order) {
    require(order >= 1 && order <= 512, "gauss_legendre: order out of range");
    static std::map<int, Nodes1D> cache;
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    Nodes1D rule;
    rule.x.resize(static_cast<std::size_t>(order));
    rule.w.resize(static_cast<std::size_t>(order));
    const int n = order;
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // Chebyshev-based initial guess for the k-th root.
        double x = std::cos(pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Evaluate P_n and P_n' by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Recompute derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[static_cast<std::size_t>(k)] = -x;
        rule.w[static_cast<std::size_t>(k)] = w;
        rule.x[static_cast<std::size_t>(n - 1 - k)] = x;
        rule.w[static_cast<std::size_t>(n - 1 - k)] = w;
    }
    if (n % 2 == 1) rule.x[static_cast<std::size_t>(n / 2)] = 0.0;
    auto [pos, inserted] = cache.emplace(order, std::move(rule));
    return pos->second;
}

// Composite Gauss-Legendre on [a,b].
inline Nodes1D gl_panels(double a, double b, int order, int panels = 1) {
    require(panels >= 1 && order >= 1, "gl_panels: bad order/panels");
    require(std::isfinite(a) && std::isfinite(b) && a <= b, "gl_panels: bad interval");
    const Nodes1D& base = gauss_legendre(order);
    Nodes1D out;
    out.x.reserve(base.size() * static_cast<std::size_t>(panels));
    out.w.reserve(base.size() * static_cast<std::size_t>(panels));
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (std::size_t i = 0; i < base.size(); ++i) {
            out.x.push_back(lo + 0.5 * h * (base.x[i] + 1.0));
            out.w.push_back(0.5 * h * base.w[i]);
        }
    }
    return out;
}

// Midpoint rule for periodic integrands on [0, period).
inline Nodes1D periodic_rule(int points, double period = 2.0 * pi) {
    require(points >= 1, "periodic_rule: points >= 1 required");
    Nodes1D out;
    const double h = period / points;
    for (int k = 0; k < points; ++k) {
        out.x.push_back((k + 0.5) * h);
        out.w.push_back(h);
    }
    return out;
}

namespace detail {

template <class F>
double gl_apply(F&& f, double a, double b, int order) {
    const Nodes1D& base = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
        s += base.w[i] * f(mid + half * base.x[i]);
    return s * half;
}

template <class F>
double adaptive_step(F&& f, double a, double b, double tol, int depth) {
    const double whole = gl_apply(f, a, b, 15);
    const double mid = 0.5 * (a + b);
    const double split = gl_apply(f, a, mid, 15) + gl_apply(f, mid, b, 15);
    if (std::abs(whole - split) <= tol || depth >= 40) return split;
    return adaptive_step(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_step(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Recursive-bisection adaptive integrator; the oracle for 1-D reference values.
// tol is an absolute error budget for the whole interval.
inline double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
    require(tol > 0.0, "adaptive_integrate: tol > 0 required");
    require(std::isfinite(a) && std::isfinite(b), "adaptive_integrate: finite interval required");
    if (a == b) return 0.0;
    if (a > b) return -adaptive_integrate(f, b, a, tol);
    return detail::adaptive_step(f, a, b, tol, 0);
}

// Relative-tolerance wrapper: scales the budget by a coarse magnitude estimate
// of the integral of |f|.
inline double adaptive_integrate_rel(const std::function<double(double)>& f, double a, double b,
                                     double rtol) {
    require(rtol > 0.0, "adaptive_integrate_rel: rtol > 0 required");
    double mag = 0.0;
    const Nodes1D probe = gl_panels(a, b, 15, 8);
    for (std::size_t i = 0; i < probe.size(); ++i) mag += probe.w[i] * std::abs(f(probe.x[i]));
    if (mag == 0.0) mag = 1.0;
    return adaptive_integrate(f, a, b, rtol * mag);
}

// Nodes plus weights for a concrete integration domain. Weights carry the full
// measure (dsigma, dx, dV_g or dV'_g as appropriate), so integrate() needs
// only pointwise integrand values.
struct QuadratureRule {
    std::vector<Vec> nodes;
    Vec weights;
    Space space{SpaceKind::Euclidean, 0};
    std::string domain;
    double target = 0.0;  // declared relative accuracy
    int order = 0;        // declared polynomial exactness where meaningful

    std::size_t size() const { return nodes.size(); }

    Point node_point(std::size_t i) const { return Point(nodes[i], space); }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }

    double total_mass() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

inline int points_for_accuracy(double accuracy) {
    require(accuracy > 0.0, "points_for_accuracy: accuracy > 0 required");
    if (accuracy >= 1e-6) return 48;
    if (accuracy >= 1e-9) return 64;
    return 96;
}

// Quadrature on the unit sphere S^{n-1} against dsigma. n=2 uses the midpoint
// rule on the circle (spectrally accurate for periodic integrands); n=3 uses
// Gauss-Legendre in cos(theta) times the periodic rule in azimuth.
inline QuadratureRule sphere_rule(int n, double accuracy, int refine = 1) {
    require(n == 2 || n == 3, "sphere_rule: only n in {2,3} supported");
    require(refine >= 1, "sphere_rule: refine >= 1 required");
    const int base = points_for_accuracy(accuracy);
    QuadratureRule rule;
    rule.space = euclidean_space(n);
    rule.target = accuracy;
    rule.domain = "sphere S^" + std::to_string(n - 1);
    if (n == 2) {
        const int N = 2 * base * refine;
        Nodes1D t = periodic_rule(N);
        for (std::size_t i = 0; i < t.size(); ++i) {
            rule.nodes.push_back({std::cos(t.x[i]), std::sin(t.x[i])});
            rule.weights.push_back(t.w[i]);
        }
        rule.order = N - 1;
    } else {
        const int Nt = base * refine;
        const int Np = 2 * base * refine;
        Nodes1D ct = gl_panels(-1.0, 1.0, std::min(Nt, 128), Nt > 128 ? (Nt + 127) / 128 : 1);
        Nodes1D az = periodic_rule(Np);
        for (std::size_t i = 0; i < ct.size(); ++i) {
            const double c = ct.x[i];
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            for (std::size_t j = 0; j < az.size(); ++j) {
                rule.nodes.push_back({s * std::cos(az.x[j]), s * std::sin(az.x[j]), c});
                rule.weights.push_back(ct.w[i] * az.w[j]);
            }
        }
        rule.order = std::min(2 * std::min(Nt, 128) - 1, Np - 1);
    }
    return rule;
}

// Directions in the open upper hemisphere {omega_n > 0} of S^{n-1},
// weighted by dsigma.
inline QuadratureRule upper_direction_rule(int n, double accuracy, int refine = 1) {
    require(n == 2 || n == 3, "upper_direction_rule: only n in {2,3} supported");
    const int base = points_for_accuracy(accuracy) * refine;
    QuadratureRule rule;
    rule.space = euclidean_space(n);
    rule.target = accuracy;
    rule.domain = "upper hemisphere of S^" + std::to_string(n - 1);
    if (n == 2) {
        Nodes1D t = gl_panels(0.0, pi, 32, std::max(1, base / 32));
        for (std::size_t i = 0; i < t.size(); ++i) {
            rule.nodes.push_back({std::cos(t.x[i]), std::sin(t.x[i])});
            rule.weights.push_back(t.w[i]);
        }
    } else {
        Nodes1D ct = gl_panels(0.0, 1.0, 32, std::max(1, base / 32));
        Nodes1D az = periodic_rule(2 * base);
        for (std::size_t i = 0; i < ct.size(); ++i) {
            const double c = ct.x[i];
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            for (std::size_t j = 0; j < az.size(); ++j) {
                rule.nodes.push_back({s * std::cos(az.x[j]), s * std::sin(az.x[j]), c});
                rule.weights.push_back(ct.w[i] * az.w[j]);
            }
        }
    }
    return rule;
}

// Truncation window for rules on hyperbolic hypersurfaces. dV'_g has infinite
// total mass, so either a positive band is required or the caller promises the
// integrand vanishes toward the boundary.
struct SurfaceWindow {
    double min_height = -1.0;  // band x_n >= min_height
    double max_height = std::numeric_limits<double>::infinity();
    std::optional<Box> clip;   // ambient support box; bounds in-plane extents
    bool vanishing_integrand = false;
};

inline QuadratureRule surface_rule(const Hypersurface& s, const SurfaceWindow& window,
                                   double accuracy, int refine = 1) {
    const int n = s.dim;
    require(n == 2 || n == 3, "surface_rule: only n in {2,3} supported");
    double eps = window.min_height;
    if (window.vanishing_integrand && eps < 0.0) eps = 0.0;
    require(eps > 0.0 || (window.vanishing_integrand && eps == 0.0),
            "surface_rule: positive truncation band required");
    const int base = points_for_accuracy(accuracy) * refine;

    QuadratureRule rule;
    rule.space = hyperbolic_space(n);
    rule.target = accuracy;

    if (s.kind == Hypersurface::Kind::Hemisphere) {
        rule.domain = "hemisphere";
        const double r = s.radius;
        double hi_height = std::min({window.max_height, r});
        if (window.clip) hi_height = std::min(hi_height, window.clip->hi.back());
        double lo_height = eps;
        if (window.clip) lo_height = std::max(lo_height, window.clip->lo.back());
        if (lo_height >= hi_height) return rule;  // empty band
        // Polar angle from the apex; x_n = r cos(theta).
        const double theta_lo = std::acos(std::min(1.0, hi_height / r));
        const double theta_hi = std::acos(std::min(1.0, std::max(0.0, lo_height / r)));
        if (n == 2) {
            Nodes1D t = gl_panels(theta_lo, theta_hi, 24, std::max(2, base / 12));
            for (int sign : {-1, +1}) {
                for (std::size_t i = 0; i < t.size(); ++i) {
                    const double th = sign * t.x[i];
                    Vec x = {s.center[0] + r * std::sin(th), r * std::cos(th)};
                    Point p(x, rule.space);
                    rule.nodes.push_back(x);
                    rule.weights.push_back(t.w[i] * r * surface_measure_weight(p, s));
                }
            }
        } else {
            Nodes1D t = gl_panels(theta_lo, theta_hi, 24, std::max(2, base / 12));
            Nodes1D az = periodic_rule(2 * base);
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double st = std::sin(t.x[i]), ct = std::cos(t.x[i]);
                for (std::size_t j = 0; j < az.size(); ++j) {
                    Vec x = {s.center[0] + r * st * std::cos(az.x[j]),
                             s.center[1] + r * st * std::sin(az.x[j]), r * ct};
                    Point p(x, rule.space);
                    rule.nodes.push_back(x);
                    rule.weights.push_back(t.w[i] * az.w[j] * r * r * st *
                                           surface_measure_weight(p, s));
                }
            }
        }
        return rule;
    }

    // Vertical plane {x_axis = offset}: in-plane coordinates are the remaining
    // horizontal coordinates and x_n. The height axis is integrated in
    // t = log(x_n), which flattens the dV'_g weight.
    rule.domain = "vertical plane";
    require(window.clip.has_value() || std::isfinite(window.max_height),
            "surface_rule: vertical plane needs a clip box or finite max_height");
    double lo_h = eps, hi_h = window.max_height;
    if (window.clip) {
        lo_h = std::max(lo_h, window.clip->lo.back());
        hi_h = std::min(hi_h, window.clip->hi.back());
    }
    require(lo_h > 0.0, "surface_rule: vertical plane band must stay above the boundary");
    if (lo_h >= hi_h) return rule;
    Nodes1D tv = gl_panels(std::log(lo_h), std::log(hi_h), 24, std::max(2, base / 12));

    std::vector<Nodes1D> horiz;
    for (int i = 0; i + 1 < n; ++i) {
        if (i == s.axis) continue;
        require(window.clip.has_value(), "surface_rule: plane with n >= 3 needs a clip box");
        double lo = window.clip->lo[static_cast<std::size_t>(i)];
        double hi = window.clip->hi[static_cast<std::size_t>(i)];
        horiz.push_back(gl_panels(lo, hi, 24, std::max(2, base / 12)));
    }

    auto emit = [&](double h_coord, double wh) {
        for (std::size_t k = 0; k < tv.size(); ++k) {
            const double xn = std::exp(tv.x[k]);
            Vec x(static_cast<std::size_t>(n));
            x[static_cast<std::size_t>(s.axis)] = s.offset;
            if (n == 3) {
                const int other = (s.axis == 0) ? 1 : 0;
                x[static_cast<std::size_t>(other)] = h_coord;
            }
            x.back() = xn;
            // dsigma/x_n^{n-1} with dx_n = x_n dt gives weight x_n^{2-n} dt.
            rule.nodes.push_back(x);
            rule.weights.push_back(wh * tv.w[k] * std::pow(xn, 2.0 - n));
        }
    };
    if (n == 2) {
        emit(0.0, 1.0);
    } else {
        for (std::size_t i = 0; i < horiz[0].size(); ++i) emit(horiz[0].x[i], horiz[0].w[i]);
    }
    return rule;
}

// Integration domains for volume_rule. Euclidean kinds carry Lebesgue measure;
// hyperbolic kinds carry dV_g = dx / x_n^n.
struct VolumeDomain {
    enum class Kind { Ball, ExteriorOfBall, FullSpace, HalfSpaceX1Positive, FullHalfSpaceChart };
    Kind kind;
    int dim;
    double radius = 1.0;        // Ball radius / ExteriorOfBall inner radius
    double outer_radius = 0.0;  // ExteriorOfBall truncation R_max
    double min_height = 0.0;    // hyperbolic band
    double max_height = 0.0;
    Vec center;                 // Ball center (defaults to the origin)
};

inline VolumeDomain ball_domain(int n, double radius = 1.0) {
    require(radius > 0.0, "ball_domain: radius > 0 required");
    return {VolumeDomain::Kind::Ball, n, radius, 0.0, 0.0, 0.0, zeros(n)};
}

// Polar rule about an arbitrary center; the right tool for integrands with a
// conical kink at a known point (|F| of a field vanishing there).
inline VolumeDomain ball_domain_at(Vec center, double radius) {
    require(radius > 0.0, "ball_domain_at: radius > 0 required");
    const int n = static_cast<int>(center.size());
    return {VolumeDomain::Kind::Ball, n, radius, 0.0, 0.0, 0.0, std::move(center)};
}

inline VolumeDomain exterior_domain(int n, double outer_radius, double inner_radius = 1.0) {
    require(outer_radius > inner_radius && inner_radius > 0.0,
            "exterior_domain: need 0 < inner < outer truncation");
    return {VolumeDomain::Kind::ExteriorOfBall, n, inner_radius, outer_radius, 0.0, 0.0};
}

inline VolumeDomain full_space_domain(int n) {
    return {VolumeDomain::Kind::FullSpace, n, 0.0, 0.0, 0.0, 0.0};
}

inline VolumeDomain half_space_x1_domain(int n, double min_height, double max_height) {
    require(min_height > 0.0 && max_height > min_height,
            "half_space_x1_domain: need 0 < min_height < max_height");
    return {VolumeDomain::Kind::HalfSpaceX1Positive, n, 0.0, 0.0, min_height, max_height};
}

inline VolumeDomain half_space_chart_domain(int n, double min_height, double max_height) {
    require(min_height > 0.0 && max_height > min_height,
            "half_space_chart_domain: need 0 < min_height < max_height");
    return {VolumeDomain::Kind::FullHalfSpaceChart, n, 0.0, 0.0, min_height, max_height};
}

// Volume rule covering the declared support of the integrand. Refuses supports
// that stick out of the truncated domain rather than silently dropping mass.
inline QuadratureRule volume_rule(const VolumeDomain& domain, const Box& support, double accuracy,
                                  int refine = 1) {
    const int n = domain.dim;
    require(support.dim() == n, "volume_rule: support dimension mismatch");
    require(refine >= 1, "volume_rule: refine >= 1 required");
    const int base = points_for_accuracy(accuracy);
    const int per_axis = base * refine;
    const int order = 24;
    const int panels = std::max(2, per_axis / order);

    QuadratureRule rule;
    rule.target = accuracy;

    using Kind = VolumeDomain::Kind;
    if (domain.kind == Kind::Ball || domain.kind == Kind::ExteriorOfBall) {
        rule.space = euclidean_space(n);
        double r_lo = 0.0, r_hi = domain.radius;
        if (domain.kind == Kind::ExteriorOfBall) {
            require(support.max_corner_norm() <= domain.outer_radius * (1.0 + 1e-12),
                    "volume_rule: support exceeds the exterior truncation radius");
            r_lo = domain.radius;
            r_hi = std::min(domain.outer_radius, support.max_corner_norm());
            rule.domain = "exterior of ball";
        } else {
            rule.domain = "ball";
        }
        if (r_hi <= r_lo) return rule;  // support never meets the domain
        const Vec center = domain.center.empty() ? zeros(n) : domain.center;
        Nodes1D rad = gl_panels(r_lo, r_hi, order, panels);
        QuadratureRule sph = sphere_rule(n, accuracy, refine);
        for (std::size_t i = 0; i < rad.size(); ++i) {
            const double r = rad.x[i];
            const double wr = rad.w[i] * std::pow(r, n - 1);
            for (std::size_t j = 0; j < sph.size(); ++j) {
                rule.nodes.push_back(add(scaled(sph.nodes[j], r), center));
                rule.weights.push_back(wr * sph.weights[j]);
            }
        }
        return rule;
    }

    if (domain.kind == Kind::FullSpace) {
        rule.space = euclidean_space(n);
        rule.domain = "support box";
        std::vector<Nodes1D> axes;
        for (int i = 0; i < n; ++i)
            axes.push_back(gl_panels(support.lo[static_cast<std::size_t>(i)],
                                     support.hi[static_cast<std::size_t>(i)], order, panels));
        Vec x(static_cast<std::size_t>(n));
        std::function<void(int, double)> fill = [&](int axis, double w) {
            if (axis == n) {
                rule.nodes.push_back(x);
                rule.weights.push_back(w);
                return;
            }
            const Nodes1D& a = axes[static_cast<std::size_t>(axis)];
            for (std::size_t i = 0; i < a.size(); ++i) {
                x[static_cast<std::size_t>(axis)] = a.x[i];
                fill(axis + 1, w * a.w[i]);
            }
        };
        fill(0, 1.0);
        return rule;
    }

    // Hyperbolic chart domains.
    rule.space = hyperbolic_space(n);
    require(support.lo.back() >= domain.min_height * (1.0 - 1e-12) &&
                support.hi.back() <= domain.max_height * (1.0 + 1e-12),
            "volume_rule: support exceeds the height truncation band");
    require(support.lo.back() > 0.0, "volume_rule: hyperbolic support must have x_n > 0");

    std::vector<Nodes1D> axes;
    for (int i = 0; i + 1 < n; ++i) {
        double lo = support.lo[static_cast<std::size_t>(i)];
        double hi = support.hi[static_cast<std::size_t>(i)];
        if (i == 0 && domain.kind == Kind::HalfSpaceX1Positive) {
            lo = std::max(lo, 0.0);
            if (hi <= lo) return rule;  // support entirely outside {x_1 > 0}
        }
        axes.push_back(gl_panels(lo, hi, order, panels));
    }
    // Height axis in t = log(x_n): dx/x_n^n = e^{(1-n)t} dt.
    Nodes1D tv = gl_panels(std::log(support.lo.back()), std::log(support.hi.back()), order, panels);
    rule.domain = domain.kind == Kind::HalfSpaceX1Positive ? "half chart {x_1 > 0}" : "chart";

    Vec x(static_cast<std::size_t>(n));
    std::function<void(int, double)> fill = [&](int axis, double w) {
        if (axis == n - 1) {
            for (std::size_t k = 0; k < tv.size(); ++k) {
                x.back() = std::exp(tv.x[k]);
                rule.nodes.push_back(x);
                rule.weights.push_back(w * tv.w[k] * std::exp((1.0 - n) * tv.x[k]));
            }
            return;
        }
        const Nodes1D& a = axes[static_cast<std::size_t>(axis)];
        for (std::size_t i = 0; i < a.size(); ++i) {
            x[static_cast<std::size_t>(axis)] = a.x[i];
            fill(axis + 1, w * a.w[i]);
        }
    };
    fill(0, 1.0);
    return rule;
}

}  // namespace sobolab
