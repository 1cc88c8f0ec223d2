#pragma once

#include <cmath>
#include <string>

#include "sobolab/core.hpp"
#include "sobolab/fields.hpp"
#include "sobolab/geometry.hpp"
#include "sobolab/quadrature.hpp"

namespace sobolab {

struct NormReport {
    double value = 0.0;
    std::string rule;
    double error_estimate = 0.0;  // refinement difference
};

namespace detail {

inline Box integrand_box(const std::optional<Box>& a, const std::optional<Box>& b,
                         const char* who) {
    require(a.has_value() || b.has_value(), std::string(who) + ": support box required");
    if (a && b) {
        auto cap = box_intersection(*a, *b);
        if (!cap) {
            // Disjoint supports: any degenerate box gives the zero integral.
            Box z = *a;
            z.hi = z.lo;
            return z;
        }
        return *cap;
    }
    return a ? *a : *b;
}

inline bool degenerate(const Box& b) {
    for (std::size_t i = 0; i < b.lo.size(); ++i)
        if (b.lo[i] >= b.hi[i]) return true;
    return false;
}

inline VolumeDomain domain_for_box(const Space& space, const Box& box) {
    if (space.kind == SpaceKind::Euclidean) return full_space_domain(space.dim);
    return half_space_chart_domain(space.dim, box.lo.back(), box.hi.back());
}

inline void check_basis(const VectorField& f, const Space& space, const char* who) {
    require(f.dim == space.dim, std::string(who) + ": dimension mismatch");
    if (space.kind == SpaceKind::Euclidean)
        require(f.basis == VectorField::Basis::Cartesian,
                std::string(who) + ": Euclidean integral needs Cartesian components");
    else
        require(f.basis == VectorField::Basis::HyperbolicFrame,
                std::string(who) + ": hyperbolic integral needs frame components");
}

template <class F>
NormReport reported_integral(F&& build_and_eval, double accuracy) {
    NormReport r;
    r.value = build_and_eval(1);
    const double refined = build_and_eval(2);
    r.error_estimate = std::abs(refined - r.value);
    r.value = refined;
    r.rule = "volume rule, target " + std::to_string(accuracy);
    return r;
}

inline bool degenerate_support(const std::optional<Box>& b) {
    if (!b) return false;
    for (std::size_t i = 0; i < b->lo.size(); ++i)
        if (b->lo[i] >= b->hi[i]) return true;
    return false;
}

}  // namespace detail

// Integral of <f, phi> over the declared space with the correct measure:
// Lebesgue in the Euclidean case, dV_g in the chart.
inline double pairing(const VectorField& f, const VectorField& phi, const Space& space,
                      double accuracy = 1e-9, int refine = 1) {
    detail::check_basis(f, space, "pairing");
    detail::check_basis(phi, space, "pairing");
    require(phi.support.has_value(), "pairing: phi must be compactly supported");
    Box box = detail::integrand_box(f.support, phi.support, "pairing");
    if (detail::degenerate(box)) return 0.0;
    QuadratureRule rule = volume_rule(detail::domain_for_box(space, box), box, accuracy, refine);
    return rule.integrate(
        [&](const Vec& x) { return dot(f.components(x), phi.components(x)); });
}

inline NormReport l1_norm(const VectorField& f, const Space& space, double accuracy = 1e-9) {
    detail::check_basis(f, space, "l1_norm");
    require(f.support.has_value(), "l1_norm: support box required");
    if (detail::degenerate_support(f.support)) return {};
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule rule =
                volume_rule(detail::domain_for_box(space, *f.support), *f.support, accuracy, refine);
            return rule.integrate([&](const Vec& x) { return norm(f.components(x)); });
        },
        accuracy);
}

inline NormReport lp_norm(const VectorField& phi, const Space& space, double p,
                          double accuracy = 1e-9) {
    detail::check_basis(phi, space, "lp_norm");
    require(phi.support.has_value(), "lp_norm: support box required");
    require(p >= 1.0, "lp_norm: p >= 1 required");
    if (detail::degenerate_support(phi.support)) return {};
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule rule = volume_rule(detail::domain_for_box(space, *phi.support),
                                              *phi.support, accuracy, refine);
            return std::pow(
                rule.integrate([&](const Vec& x) { return std::pow(norm(phi.components(x)), p); }),
                1.0 / p);
        },
        accuracy);
}

inline NormReport lp_norm(const ScalarField& psi, const Space& space, double p,
                          double accuracy = 1e-9) {
    require(psi.support.has_value(), "lp_norm: support box required");
    require(p >= 1.0, "lp_norm: p >= 1 required");
    if (detail::degenerate_support(psi.support)) return {};
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule rule = volume_rule(detail::domain_for_box(space, *psi.support),
                                              *psi.support, accuracy, refine);
            return std::pow(
                rule.integrate([&](const Vec& x) { return std::pow(std::abs(psi.value(x)), p); }),
                1.0 / p);
        },
        accuracy);
}

// ||grad phi||_{L^p}: Frobenius norm of the coordinate Jacobian (Euclidean) or
// of the frame covariant derivative (hyperbolic), integrated in the right measure.
inline NormReport gradient_lp_norm(const VectorField& phi, const Space& space, double p,
                                   double accuracy = 1e-9) {
    detail::check_basis(phi, space, "gradient_lp_norm");
    require(phi.support.has_value(), "gradient_lp_norm: support box required");
    if (detail::degenerate_support(phi.support)) return {};
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule rule = volume_rule(detail::domain_for_box(space, *phi.support),
                                              *phi.support, accuracy, refine);
            double s = 0.0;
            if (space.kind == SpaceKind::Euclidean) {
                s = rule.integrate(
                    [&](const Vec& x) { return std::pow(frobenius_norm(phi.jacobian(x)), p); });
            } else {
                s = rule.integrate([&](const Vec& x) {
                    Point pt(x, rule.space);
                    return std::pow(frobenius_norm(covariant_derivative(phi, pt)), p);
                });
            }
            return std::pow(s, 1.0 / p);
        },
        accuracy);
}

inline NormReport ln_gradient_norm(const VectorField& phi, const Space& space,
                                   double accuracy = 1e-9) {
    return gradient_lp_norm(phi, space, static_cast<double>(space.dim), accuracy);
}

inline NormReport l1_divergence_norm(const VectorField& f, const Space& space,
                                     double accuracy = 1e-9) {
    detail::check_basis(f, space, "l1_divergence_norm");
    require(f.support.has_value(), "l1_divergence_norm: support box required");
    if (detail::degenerate_support(f.support)) return {};
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule rule =
                volume_rule(detail::domain_for_box(space, *f.support), *f.support, accuracy, refine);
            return rule.integrate([&](const Vec& x) {
                Point pt(x, rule.space);
                return std::abs(space.kind == SpaceKind::Euclidean
                                    ? divergence_euclidean(f, pt)
                                    : divergence_hyperbolic(f, pt));
            });
        },
        accuracy);
}

// --- unit sphere functionals (Euclidean setting) ----------------------------

// <phi, nu> on and near the unit sphere as an ambient scalar, with its
// analytic ambient gradient.
inline ScalarField normal_component_on_sphere(const VectorField& phi) {
    require(phi.basis == VectorField::Basis::Cartesian,
            "normal_component_on_sphere: Cartesian field required");
    ScalarField out;
    out.support = phi.support;
    out.value = [phi](const Vec& x) {
        const double r = norm(x);
        return dot(phi.components(x), scaled(x, 1.0 / r));
    };
    out.gradient = [phi](const Vec& x) {
        const double r = norm(x);
        const Vec nu = scaled(x, 1.0 / r);
        const Vec c = phi.components(x);
        const Mat j = phi.jacobian(x);
        const double cn = dot(c, nu);
        Vec g(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            double jt = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) jt += j[i][k] * nu[i];
            g[k] = jt + (c[k] - cn * nu[k]) / r;
        }
        return g;
    };
    return out;
}

// Tangential projection of the ambient gradient: grad_S psi = (I - nu nu^T) grad psi.
inline Vec sphere_tangential_gradient(const ScalarField& psi, const Vec& x) {
    const double r = norm(x);
    const Vec nu = scaled(x, 1.0 / r);
    Vec g = psi.gradient(x);
    const double gn = dot(g, nu);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gn * nu[i];
    return g;
}

// ||grad_S psi||_{L^p(S^{n-1})} for an ambient scalar restricted to the sphere.
inline double sphere_scalar_gradient_lp_norm(const ScalarField& psi, int n, double p,
                                             double accuracy = 1e-9, int refine = 1) {
    QuadratureRule sph = sphere_rule(n, accuracy, refine);
    return std::pow(sph.integrate([&](const Vec& x) {
                        return std::pow(norm(sphere_tangential_gradient(psi, x)), p);
                    }),
                    1.0 / p);
}

// ||grad_g psi||_{L^p(H^m)} for a compactly supported chart scalar.
inline double chart_scalar_gradient_lp_norm(const ScalarField& psi, int m, double p,
                                            double accuracy = 1e-9, int refine = 1) {
    require(psi.support.has_value(), "chart_scalar_gradient_lp_norm: support box required");
    QuadratureRule rule =
        volume_rule(half_space_chart_domain(m, psi.support->lo.back(), psi.support->hi.back()),
                    *psi.support, accuracy, refine);
    return std::pow(rule.integrate([&](const Vec& x) {
                        return std::pow(x.back() * norm(psi.gradient(x)), p);
                    }),
                    1.0 / p);
}

// Frobenius norm of the tangentially projected ambient derivative D(phi) P.
inline double sphere_tangential_jacobian_norm(const VectorField& phi, const Vec& x) {
    const Vec nu = scaled(x, 1.0 / norm(x));
    const Mat j = phi.jacobian(x);
    double s = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const double jn = dot(j[i], nu);
        for (std::size_t k = 0; k < j[i].size(); ++k) {
            const double t = j[i][k] - jn * nu[k];
            s += t * t;
        }
    }
    return std::sqrt(s);
}

inline NormReport w1n_sphere_norm(const VectorField& phi, double accuracy = 1e-9) {
    require(phi.basis == VectorField::Basis::Cartesian, "w1n_sphere_norm: Cartesian required");
    const int n = phi.dim;
    const double p = n;
    return detail::reported_integral(
        [&](int refine) {
            QuadratureRule sph = sphere_rule(n, accuracy, refine);
            const double lp = std::pow(
                sph.integrate([&](const Vec& x) { return std::pow(norm(phi.components(x)), p); }),
                1.0 / p);
            const double gp = std::pow(sph.integrate([&](const Vec& x) {
                                           return std::pow(sphere_tangential_jacobian_norm(phi, x), p);
                                       }),
                                       1.0 / p);
            return lp + gp;
        },
        accuracy);
}

inline double sphere_l1_norm(const VectorField& f, double accuracy = 1e-9, int refine = 1) {
    QuadratureRule sph = sphere_rule(f.dim, accuracy, refine);
    return sph.integrate([&](const Vec& x) { return norm(f.components(x)); });
}

// Flux pairing over the unit sphere with the outward normal.
inline double unit_sphere_flux(const VectorField& f, const VectorField& phi,
                               double accuracy = 1e-9, int refine = 1) {
    require(f.dim == phi.dim, "unit_sphere_flux: dimension mismatch");
    QuadratureRule sph = sphere_rule(f.dim, accuracy, refine);
    return sph.integrate([&](const Vec& x) {
        return dot(f.components(x), x) * dot(phi.components(x), x);
    });
}

// --- hyperbolic surface functionals ------------------------------------------

namespace detail {

inline SurfaceWindow window_from_supports(const std::optional<Box>& a,
                                          const std::optional<Box>& b, const char* who) {
    Box box = integrand_box(a, b, who);
    SurfaceWindow w;
    w.min_height = box.lo.back();
    w.max_height = box.hi.back();
    w.clip = box;
    return w;
}

}  // namespace detail

// Flux pairing over a member of the hypersurface family, against dV'_g.
inline double boundary_flux(const VectorField& f, const VectorField& phi, const Hypersurface& s,
                            double accuracy = 1e-9, int refine = 1) {
    require(f.basis == VectorField::Basis::HyperbolicFrame &&
                phi.basis == VectorField::Basis::HyperbolicFrame,
            "boundary_flux: frame components required");
    SurfaceWindow w = detail::window_from_supports(f.support, phi.support, "boundary_flux");
    if (detail::degenerate(*w.clip)) return 0.0;
    QuadratureRule rule = surface_rule(s, w, accuracy, refine);
    return rule.integrate([&](const Vec& x) {
        Point p(x, rule.space);
        const Vec nu = unit_normal(p, s).components;
        return dot(f.components(x), nu) * dot(phi.components(x), nu);
    });
}

inline double surface_l1_norm(const VectorField& f, const Hypersurface& s, double accuracy = 1e-9,
                              int refine = 1) {
    require(f.basis == VectorField::Basis::HyperbolicFrame, "surface_l1_norm: frame required");
    SurfaceWindow w = detail::window_from_supports(f.support, std::nullopt, "surface_l1_norm");
    QuadratureRule rule = surface_rule(s, w, accuracy, refine);
    return rule.integrate([&](const Vec& x) { return norm(f.components(x)); });
}

// Frobenius norm of the covariant derivative restricted to the surface's
// tangential frame directions (all rows except the normal axis).
inline double surface_tangential_covariant_norm(const VectorField& phi, const Hypersurface& s,
                                                const Point& x) {
    require(s.kind == Hypersurface::Kind::VerticalPlane,
            "surface_tangential_covariant_norm: vertical plane required");
    Mat m = covariant_derivative(phi, x);
    double acc = 0.0;
    for (int i = 0; i < phi.dim; ++i) {
        if (i == s.axis) continue;
        for (double v : m[static_cast<std::size_t>(i)]) acc += v * v;
    }
    return std::sqrt(acc);
}

inline NormReport w1n_surface_norm(const VectorField& phi, const Hypersurface& s,
                                   double accuracy = 1e-9) {
    require(phi.basis == VectorField::Basis::HyperbolicFrame, "w1n_surface_norm: frame required");
    require(s.kind == Hypersurface::Kind::VerticalPlane,
            "w1n_surface_norm: vertical plane required");
    const double p = phi.dim;
    return detail::reported_integral(
        [&](int refine) {
            SurfaceWindow w =
                detail::window_from_supports(phi.support, std::nullopt, "w1n_surface_norm");
            QuadratureRule rule = surface_rule(s, w, accuracy, refine);
            const double lp = std::pow(
                rule.integrate([&](const Vec& x) { return std::pow(norm(phi.components(x)), p); }),
                1.0 / p);
            const double gp =
                std::pow(rule.integrate([&](const Vec& x) {
                             Point pt(x, rule.space);
                             return std::pow(surface_tangential_covariant_norm(phi, s, pt), p);
                         }),
                         1.0 / p);
            return lp + gp;
        },
        accuracy);
}

// --- the two integration-by-parts identities ---------------------------------

// | int_{S^{n-1}} <f,nu> psi dsigma + int_{R^n \ B^n} <f, grad psi> dx |,
// normalized by |LHS| + |RHS| + 1 so near-zero identities stay well-scaled.
inline double verify_parts_euclidean(const VectorField& f, const ScalarField& psi,
                                     double accuracy = 1e-9, int refine = 1) {
    require(f.divergence_free, "verify_parts_euclidean: f must be divergence-free");
    require(psi.support.has_value(), "verify_parts_euclidean: psi must be compactly supported");
    const int n = f.dim;
    QuadratureRule sph = sphere_rule(n, accuracy, refine);
    const double lhs =
        sph.integrate([&](const Vec& x) { return dot(f.components(x), x) * psi.value(x); });

    Box box = detail::integrand_box(f.support, psi.support, "verify_parts_euclidean");
    double rhs = 0.0;
    if (!detail::degenerate(box)) {
        const double rmax = box.max_corner_norm();
        if (rmax > 1.0) {
            QuadratureRule ext = volume_rule(exterior_domain(n, rmax * (1.0 + 1e-9)), box,
                                             accuracy, refine);
            rhs = -ext.integrate(
                [&](const Vec& x) { return dot(f.components(x), psi.gradient(x)); });
        }
    }
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1.0);
}

// Same residual for S = {x_1 = 0}, X = {x_1 > 0} in the chart.
inline double verify_parts_hyperbolic(const VectorField& f, const ScalarField& psi,
                                      double accuracy = 1e-9, int refine = 1) {
    require(f.basis == VectorField::Basis::HyperbolicFrame,
            "verify_parts_hyperbolic: frame components required");
    require(f.divergence_free, "verify_parts_hyperbolic: f must be divergence-free");
    require(psi.support.has_value(), "verify_parts_hyperbolic: psi must be compactly supported");
    const int n = f.dim;
    const Hypersurface S = vertical_plane(n, 0, 0.0);

    Box box = detail::integrand_box(f.support, psi.support, "verify_parts_hyperbolic");
    if (detail::degenerate(box)) return 0.0;

    SurfaceWindow w;
    w.min_height = box.lo.back();
    w.max_height = box.hi.back();
    w.clip = box;
    double lhs = 0.0;
    if (box.lo.front() <= 0.0 && box.hi.front() >= 0.0) {
        QuadratureRule srule = surface_rule(S, w, accuracy, refine);
        lhs = srule.integrate(
            [&](const Vec& x) { return f.components(x).front() * psi.value(x); });
    }

    double rhs = 0.0;
    if (box.hi.front() > 0.0) {
        QuadratureRule vrule = volume_rule(half_space_x1_domain(n, box.lo.back(), box.hi.back()),
                                           box, accuracy, refine);
        rhs = -vrule.integrate([&](const Vec& x) {
            Vec g = psi.gradient(x);
            for (auto& v : g) v *= x.back();
            return dot(f.components(x), g);
        });
    }
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1.0);
}

}  // namespace sobolab
