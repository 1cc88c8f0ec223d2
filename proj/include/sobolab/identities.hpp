#pragma once

#include <cmath>
#include <vector>

#include "sobolab/core.hpp"
#include "sobolab/fields.hpp"
#include "sobolab/functionals.hpp"
#include "sobolab/geometry.hpp"
#include "sobolab/quadrature.hpp"

namespace sobolab {

// The constant c with <a,b> = c int_S <a,w><b,w> dsigma(w); c = n / |S^{n-1}|
// because int w_1^2 dsigma = |S^{n-1}| / n.
struct AveragingConstant {
    int n = 0;
    double c = 0.0;
};

inline AveragingConstant averaging_constant(int n) {
    require(n >= 2, "averaging_constant: n >= 2 required");
    return {n, static_cast<double>(n) / unit_sphere_area(n)};
}

// w = (x - (z,0)) / |x - (z,0)|, always in the open upper hemisphere.
inline Vec phi_map(const Point& x, const Vec& z) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace, "phi_map: chart point required");
    require(static_cast<int>(z.size()) == x.dim() - 1, "phi_map: z has length n-1");
    Vec w = x.coords;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] -= z[i];
    const double len = norm(w);
    return scaled(std::move(w), 1.0 / len);
}

// Jac Phi_x(z) = x_n / |x - (z,0)|^n.
inline double phi_jacobian(const Point& x, const Vec& z) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace, "phi_jacobian: chart point required");
    require(static_cast<int>(z.size()) == x.dim() - 1, "phi_jacobian: z has length n-1");
    double d2 = x.height() * x.height();
    for (std::size_t i = 0; i + 1 < x.coords.size(); ++i) {
        const double t = x.coords[i] - z[i];
        d2 += t * t;
    }
    return x.height() * std::pow(d2, -0.5 * x.dim());
}

// The member of the hemisphere family through x whose g-unit normal at x is
// x_n w: center z = x' - x_n w'/w_n on the boundary plane, radius x_n / w_n.
inline Hypersurface hemisphere_from(const Point& x, const Vec& omega) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace,
            "hemisphere_from: chart point required");
    require(static_cast<int>(omega.size()) == x.dim(), "hemisphere_from: dimension mismatch");
    require(std::abs(norm(omega) - 1.0) < 1e-9, "hemisphere_from: omega must be a unit vector");
    require_domain(omega.back() > 0.0,
                   "hemisphere_from: omega_n > 0 required (vertical-plane limit excluded)");
    const int n = x.dim();
    Vec z(static_cast<std::size_t>(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
        auto ii = static_cast<std::size_t>(i);
        z[ii] = x.coords[ii] - x.height() * omega[ii] / omega.back();
    }
    return hemisphere(std::move(z), x.height() / omega.back());
}

// int_{R^{n-1}} x_n / |x - (z,0)|^n dz, computed through a fixed tangent map
// so the x-independence is a genuine numerical check. Equals pi for n = 2.
inline double coarea_weight(const Point& x, int n) {
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace && x.dim() == n,
            "coarea_weight: chart point of dimension n required");
    require(n == 2 || n == 3, "coarea_weight: n in {2,3} supported");
    const double cut = 0.5 * pi - 1e-9;
    const double xn = x.height();
    if (n == 2) {
        const double x1 = x.coords[0];
        return adaptive_integrate_rel(
            [&](double t) {
                const double z = std::tan(t);
                const double jac = 1.0 + z * z;
                const double dz = z - x1;
                return xn * jac / (dz * dz + xn * xn);
            },
            -cut, cut, 1e-10);
    }
    const double x1 = x.coords[0], x2 = x.coords[1];
    return adaptive_integrate_rel(
        [&](double t1) {
            const double z1 = std::tan(t1);
            const double j1 = 1.0 + z1 * z1;
            const double d1 = z1 - x1;
            const double inner = adaptive_integrate_rel(
                [&](double t2) {
                    const double z2 = std::tan(t2);
                    const double j2 = 1.0 + z2 * z2;
                    const double d2 = z2 - x2;
                    const double q = d1 * d1 + d2 * d2 + xn * xn;
                    return xn * j2 / (q * std::sqrt(q));
                },
                -cut, cut, 1e-10);
            return j1 * inner;
        },
        -cut, cut, 1e-9);
}

// --- hemisphere-family coarea identity ----------------------------------------

struct CoareaReport {
    double lhs = 0.0;       // nested (z, r, surface) integral
    double rhs = 0.0;       // coarea constant times the volume integral
    double constant = 0.0;  // numerically determined coarea_weight
    double residual = 0.0;
};

namespace detail {

// theta-intervals of the arc of S(z,r) lying inside the support box (n = 2).
inline std::vector<std::pair<double, double>> hemisphere_arc_windows(double z, double r,
                                                                      const Box& box) {
    std::vector<std::pair<double, double>> out;
    const double clo = std::max(0.0, box.lo.back() / r);
    const double chi = std::min(1.0, box.hi.back() / r);
    if (clo >= chi) return out;
    const double alpha = std::acos(chi);  // |theta| lower bound
    const double beta = std::acos(clo);   // |theta| upper bound
    const double slo = std::max(-1.0, (box.lo.front() - z) / r);
    const double shi = std::min(1.0, (box.hi.front() - z) / r);
    if (slo >= shi) return out;
    const double glo = std::asin(slo), ghi = std::asin(shi);
    for (auto [lo, hi] : {std::pair{-beta, -alpha}, std::pair{alpha, beta}}) {
        const double a = std::max(lo, glo), b = std::min(hi, ghi);
        if (a < b) out.emplace_back(a, b);
    }
    return out;
}

}  // namespace detail

// Checks int_z int_r int_{S(z,r)} F dV'_g dr/r^{n-1} dz against
// coarea_weight * int F dV_g on a compactly supported chart density, n = 2.
inline CoareaReport verify_coarea(const ScalarField& F, int n, double accuracy = 1e-5,
                                  int refine = 1) {
    require(n == 2, "verify_coarea: only n = 2 supported");
    require(F.support.has_value(), "verify_coarea: compactly supported density required");
    const Box& box = *F.support;
    require(box.lo.back() > 0.0, "verify_coarea: support must stay inside the chart");

    // outer z-axis through the tangent map; the far tail decays like 1/z^2
    const double zmax = 1e6;
    const double tcut = std::atan(zmax);
    Nodes1D tz = gl_panels(-tcut, tcut, 24, 16 * refine);

    const Vec corner_lo = box.lo, corner_hi = box.hi;
    double lhs = 0.0;
    for (std::size_t iz = 0; iz < tz.size(); ++iz) {
        const double z = std::tan(tz.x[iz]);
        const double wz = tz.w[iz] * (1.0 + z * z);

        // radial window from the support box corners
        double r2lo = std::numeric_limits<double>::infinity(), r2hi = 0.0;
        const double dx1 = std::max({corner_lo.front() - z, z - corner_hi.front(), 0.0});
        const double dx1_far = std::max(std::abs(corner_lo.front() - z),
                                        std::abs(corner_hi.front() - z));
        r2lo = dx1 * dx1 + corner_lo.back() * corner_lo.back();
        r2hi = dx1_far * dx1_far + corner_hi.back() * corner_hi.back();
        const double rlo = std::sqrt(r2lo), rhi = std::sqrt(r2hi);
        if (rlo >= rhi) continue;

        // log-spaced radial nodes against dr/r
        Nodes1D tr = gl_panels(std::log(rlo), std::log(rhi), 24, 4 * refine);
        double inner_r = 0.0;
        for (std::size_t ir = 0; ir < tr.size(); ++ir) {
            const double r = std::exp(tr.x[ir]);
            double arc = 0.0;
            for (auto [a, b] : detail::hemisphere_arc_windows(z, r, box)) {
                Nodes1D tt = gl_panels(a, b, 24, 2 * refine);
                for (std::size_t it = 0; it < tt.size(); ++it) {
                    const double xn = r * std::cos(tt.x[it]);
                    const Vec x{z + r * std::sin(tt.x[it]), xn};
                    arc += tt.w[it] * F.value(x) / xn;
                }
            }
            // dr/r^{n-1} with the log substitution contributes no extra factor
            // beyond the measure already in tr.w for n = 2
            inner_r += tr.w[ir] * arc;
        }
        lhs += wz * inner_r;
    }

    CoareaReport report;
    report.lhs = lhs;
    report.constant = coarea_weight(hyperbolic_point({0.0, 1.0}), 2);
    QuadratureRule vol = volume_rule(half_space_chart_domain(2, box.lo.back(), box.hi.back()),
                                     box, accuracy, refine);
    report.rhs = report.constant * vol.integrate([&](const Vec& x) { return F.value(x); });
    report.residual =
        std::abs(report.lhs - report.rhs) / std::max(1e-300, std::abs(report.rhs));
    return report;
}

// --- the averaging reconstruction pipeline ------------------------------------

// c int_x int_{S^{n-1}} <f(x), w> <phi(x), w> dsigma(w) dx; equals the direct
// pairing by the sphere-average identity.
namespace detail {

// Compact direction rule over the full sphere: the averaging integrand is a
// quadratic spherical polynomial, so low orders are already exact.
inline QuadratureRule small_sphere_rule(int n) {
    QuadratureRule rule;
    rule.space = euclidean_space(n);
    rule.domain = "sphere (low order)";
    if (n == 2) {
        Nodes1D t = periodic_rule(16);
        for (std::size_t i = 0; i < t.size(); ++i) {
            rule.nodes.push_back({std::cos(t.x[i]), std::sin(t.x[i])});
            rule.weights.push_back(t.w[i]);
        }
        return rule;
    }
    Nodes1D ct = gl_panels(-1.0, 1.0, 8);
    Nodes1D az = periodic_rule(16);
    for (std::size_t i = 0; i < ct.size(); ++i) {
        const double c = ct.x[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (std::size_t j = 0; j < az.size(); ++j) {
            rule.nodes.push_back({s * std::cos(az.x[j]), s * std::sin(az.x[j]), c});
            rule.weights.push_back(ct.w[i] * az.w[j]);
        }
    }
    return rule;
}

inline QuadratureRule small_upper_rule(int n) {
    QuadratureRule rule;
    rule.space = euclidean_space(n);
    rule.domain = "upper hemisphere (low order)";
    if (n == 2) {
        Nodes1D t = gl_panels(0.0, pi, 16);
        for (std::size_t i = 0; i < t.size(); ++i) {
            rule.nodes.push_back({std::cos(t.x[i]), std::sin(t.x[i])});
            rule.weights.push_back(t.w[i]);
        }
        return rule;
    }
    Nodes1D ct = gl_panels(0.0, 1.0, 8);
    Nodes1D az = periodic_rule(16);
    for (std::size_t i = 0; i < ct.size(); ++i) {
        const double c = ct.x[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (std::size_t j = 0; j < az.size(); ++j) {
            rule.nodes.push_back({s * std::cos(az.x[j]), s * std::sin(az.x[j]), c});
            rule.weights.push_back(ct.w[i] * az.w[j]);
        }
    }
    return rule;
}

}  // namespace detail

inline double averaged_pairing_euclidean(const VectorField& f, const VectorField& phi,
                                         double accuracy = 1e-8, int refine = 1) {
    require(f.basis == VectorField::Basis::Cartesian &&
                phi.basis == VectorField::Basis::Cartesian,
            "averaged_pairing_euclidean: Cartesian fields required");
    const int n = f.dim;
    const AveragingConstant c = averaging_constant(n);
    Box box = detail::integrand_box(f.support, phi.support, "averaged_pairing_euclidean");
    if (detail::degenerate(box)) return 0.0;
    QuadratureRule vol = volume_rule(full_space_domain(n), box, accuracy, refine);
    QuadratureRule sph = detail::small_sphere_rule(n);
    double total = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const Vec a = f.components(vol.nodes[i]);
        const Vec b = phi.components(vol.nodes[i]);
        double inner = 0.0;
        for (std::size_t j = 0; j < sph.size(); ++j)
            inner += sph.weights[j] * dot(a, sph.nodes[j]) * dot(b, sph.nodes[j]);
        total += vol.weights[i] * inner;
    }
    return c.c * total;
}

// Hyperbolic analogue over the upper direction hemisphere: the integrand is
// even in w, so twice the S_+ integral replaces the full sphere.
inline double averaged_pairing_hyperbolic(const VectorField& f, const VectorField& phi,
                                          double accuracy = 1e-8, int refine = 1) {
    require(f.basis == VectorField::Basis::HyperbolicFrame &&
                phi.basis == VectorField::Basis::HyperbolicFrame,
            "averaged_pairing_hyperbolic: frame fields required");
    const int n = f.dim;
    const AveragingConstant c = averaging_constant(n);
    Box box = detail::integrand_box(f.support, phi.support, "averaged_pairing_hyperbolic");
    if (detail::degenerate(box)) return 0.0;
    QuadratureRule vol = volume_rule(half_space_chart_domain(n, box.lo.back(), box.hi.back()),
                                     box, accuracy, refine);
    QuadratureRule dirs = detail::small_upper_rule(n);
    double total = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const Vec a = f.components(vol.nodes[i]);
        const Vec b = phi.components(vol.nodes[i]);
        double inner = 0.0;
        for (std::size_t j = 0; j < dirs.size(); ++j)
            inner += dirs.weights[j] * dot(a, dirs.nodes[j]) * dot(b, dirs.nodes[j]);
        total += vol.weights[i] * inner;
    }
    return 2.0 * c.c * total;
}

}  // namespace sobolab
