#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sobolab/core.hpp"
#include "sobolab/fields.hpp"
#include "sobolab/functionals.hpp"
#include "sobolab/geometry.hpp"
#include "sobolab/quadrature.hpp"

namespace sobolab {

// Radial mollifier profile h(t) for t = |u| >= 0, with analytic derivative.
// Two documented variants: the sphere branch needs h = 1 near 0, the chart
// branch needs unit mass.
struct Mollifier {
    std::function<double(double)> h, dh;
    double support_radius = 1.0;
    double plateau_radius = 0.0;  // h == 1 on [0, plateau_radius]
};

// h = 1 on [0,1/2], then (1-s^2)^k with s = 2t-1 down to 0 at t = 1.
inline Mollifier plateau_mollifier(int k = 4) {
    require(k >= 2, "plateau_mollifier: k >= 2 required");
    Mollifier m;
    m.support_radius = 1.0;
    m.plateau_radius = 0.5;
    m.h = [k](double t) {
        t = std::abs(t);
        if (t <= 0.5) return 1.0;
        if (t >= 1.0) return 0.0;
        const double s = 2.0 * t - 1.0;
        return std::pow(1.0 - s * s, k);
    };
    m.dh = [k](double t) {
        t = std::abs(t);
        if (t <= 0.5 || t >= 1.0) return 0.0;
        const double s = 2.0 * t - 1.0;
        return -4.0 * k * s * std::pow(1.0 - s * s, k - 1);
    };
    return m;
}

// c (1-t^2)^k with c chosen so the profile has unit mass over R^m.
inline Mollifier unit_mass_mollifier(int m_dim, int k = 6) {
    require(m_dim >= 1 && k >= 3, "unit_mass_mollifier: need m >= 1, k >= 3");
    // int_{|v|<1} (1-|v|^2)^k dv = pi^{m/2} Gamma(k+1) / Gamma(k+1+m/2)
    const double mass = std::pow(pi, 0.5 * m_dim) * std::tgamma(k + 1.0) /
                        std::tgamma(k + 1.0 + 0.5 * m_dim);
    const double c = 1.0 / mass;
    Mollifier m;
    m.support_radius = 1.0;
    m.h = [k, c](double t) {
        t = std::abs(t);
        return t < 1.0 ? c * std::pow(1.0 - t * t, k) : 0.0;
    };
    m.dh = [k, c](double t) {
        t = std::abs(t);
        return t < 1.0 ? -2.0 * k * c * t * std::pow(1.0 - t * t, k - 1) : 0.0;
    };
    return m;
}

// c_lambda = int_{S^{n-1}} eta_lambda(x - y) dsigma(y) for |x| = 1, reduced to
// the polar angle: |x - y| = 2 sin(alpha/2).
inline double c_lambda(double lambda, const Mollifier& eta, int n) {
    require(n >= 2, "c_lambda: n >= 2 required");
    require(lambda > 0.0, "c_lambda: lambda > 0 required");
    require(lambda < 1.0, "c_lambda: the mean-value branch handles lambda >= 1");
    const double reach = lambda * eta.support_radius;
    const double alpha_max = 2.0 * std::asin(std::min(1.0, 0.5 * reach));
    const double alpha_seam =
        eta.plateau_radius > 0.0
            ? 2.0 * std::asin(std::min(1.0, 0.5 * lambda * eta.plateau_radius))
            : alpha_max;
    auto integrand = [&](double a) {
        return eta.h(2.0 * std::sin(0.5 * a) / lambda) * std::pow(std::sin(a), n - 2);
    };
    double total = 0.0;
    for (auto [lo, hi] : {std::pair{0.0, alpha_seam}, std::pair{alpha_seam, alpha_max}}) {
        if (hi <= lo) continue;
        Nodes1D g = gl_panels(lo, hi, 24, 2);
        for (std::size_t i = 0; i < g.size(); ++i) total += g.w[i] * integrand(g.x[i]);
    }
    return unit_sphere_area(n - 1) * total;
}

namespace detail {

// Orthonormal pair completing a unit vector u in R^3.
inline std::pair<Vec, Vec> tangent_basis(const Vec& u) {
    Vec a = std::abs(u[0]) < 0.9 ? Vec{1.0, 0.0, 0.0} : Vec{0.0, 1.0, 0.0};
    const double au = dot(a, u);
    for (int i = 0; i < 3; ++i) a[static_cast<std::size_t>(i)] -= au * u[static_cast<std::size_t>(i)];
    a = scaled(a, 1.0 / norm(a));
    Vec b{u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2], u[0] * a[1] - u[1] * a[0]};
    return {a, b};
}

// Precomputed polar cap rule around a movable unit vector: offsets alpha_j with
// measure weights, kernel values, and chord data. Shared by the c_lambda
// cross-check and the sphere mollification.
struct CapRule {
    struct Node {
        double alpha, weight;  // measure weight: d(alpha) (n=2) or sin(a) da db (n=3)
        double beta = 0.0;     // azimuth, n=3 only
        double eta = 0.0;      // kernel value at this chord
        double deta = 0.0;     // kernel radial derivative
        double chord = 0.0;    // |x - y| = 2 sin(alpha/2)
    };
    int n = 2;
    std::vector<Node> nodes;
};

inline CapRule cap_rule(double lambda, const Mollifier& eta, int n, int refine = 1) {
    require(n == 2 || n == 3, "cap_rule: n in {2,3} required");
    CapRule rule;
    rule.n = n;
    const double reach = lambda * eta.support_radius;
    const double alpha_max = 2.0 * std::asin(std::min(1.0, 0.5 * reach));
    const double alpha_seam =
        eta.plateau_radius > 0.0
            ? 2.0 * std::asin(std::min(1.0, 0.5 * lambda * eta.plateau_radius))
            : alpha_max;
    std::vector<std::pair<double, double>> segments;
    if (alpha_seam > 0.0) segments.emplace_back(0.0, alpha_seam);
    if (alpha_max > alpha_seam) segments.emplace_back(alpha_seam, alpha_max);

    auto chord_of = [](double a) { return 2.0 * std::sin(0.5 * a); };
    if (n == 2) {
        for (auto [lo, hi] : segments) {
            Nodes1D g = gl_panels(lo, hi, 16, 2 * refine);
            for (std::size_t i = 0; i < g.size(); ++i) {
                for (double sign : {-1.0, 1.0}) {
                    CapRule::Node node;
                    node.alpha = sign * g.x[i];
                    node.weight = g.w[i];
                    node.chord = chord_of(g.x[i]);
                    node.eta = eta.h(node.chord / lambda);
                    node.deta = eta.dh(node.chord / lambda);
                    rule.nodes.push_back(node);
                }
            }
        }
    } else {
        const int nbeta = 24 * refine;
        Nodes1D az = periodic_rule(nbeta);
        for (auto [lo, hi] : segments) {
            Nodes1D g = gl_panels(lo, hi, 12, 2 * refine);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double sa = std::sin(g.x[i]);
                const double chord = chord_of(g.x[i]);
                const double ev = eta.h(chord / lambda);
                const double dv = eta.dh(chord / lambda);
                for (std::size_t j = 0; j < az.size(); ++j) {
                    CapRule::Node node;
                    node.alpha = g.x[i];
                    node.beta = az.x[j];
                    node.weight = g.w[i] * az.w[j] * sa;
                    node.chord = chord;
                    node.eta = ev;
                    node.deta = dv;
                    rule.nodes.push_back(node);
                }
            }
        }
    }
    return rule;
}

// Node position on the sphere for a cap rule centered at unit u.
inline Vec cap_point(const CapRule& rule, const CapRule::Node& node, const Vec& u,
                     const std::pair<Vec, Vec>& basis) {
    if (rule.n == 2) {
        const double c = std::cos(node.alpha), s = std::sin(node.alpha);
        return {c * u[0] - s * u[1], s * u[0] + c * u[1]};
    }
    const double sa = std::sin(node.alpha), ca = std::cos(node.alpha);
    const double cb = std::cos(node.beta), sb = std::sin(node.beta);
    Vec y(3);
    for (int i = 0; i < 3; ++i) {
        auto ii = static_cast<std::size_t>(i);
        y[ii] = sa * (cb * basis.first[ii] + sb * basis.second[ii]) + ca * u[ii];
    }
    return y;
}

}  // namespace detail

// Rotation-invariance cross-check: the defining surface integral evaluated by
// an explicit cap rule centered at a particular unit vector x.
inline double c_lambda_at(const Vec& x, double lambda, const Mollifier& eta, int n,
                          int refine = 1) {
    require(static_cast<int>(x.size()) == n, "c_lambda_at: dimension mismatch");
    require(lambda > 0.0 && lambda < 1.0, "c_lambda_at: 0 < lambda < 1 required");
    Vec u = scaled(x, 1.0 / norm(x));
    detail::CapRule rule = detail::cap_rule(lambda, eta, n, refine);
    std::pair<Vec, Vec> basis;
    if (n == 3) basis = detail::tangent_basis(u);
    double total = 0.0;
    for (const auto& node : rule.nodes) {
        Vec y = detail::cap_point(rule, node, u, basis);
        total += node.weight * eta.h(norm(sub(u, y)) / lambda);
    }
    return total;
}

// --- probe grids for sup-norm certificates -----------------------------------

// Spacing at least 64 points per lambda-length-scale where affordable; 2-D
// surfaces cap the total count and recover accuracy by local refinement around
// the best candidates.
struct ProbeOptions {
    double points_per_scale = 64.0;
    std::size_t max_points = 200000;
    int polish_rounds = 25;
};

namespace detail {

inline std::vector<Vec> circle_grid(std::size_t count) {
    std::vector<Vec> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = 2.0 * pi * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        pts.push_back({std::cos(t), std::sin(t)});
    }
    return pts;
}

inline std::vector<Vec> fibonacci_sphere(std::size_t count) {
    std::vector<Vec> pts;
    pts.reserve(count);
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double t = golden * static_cast<double>(i);
        pts.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    return pts;
}

// Golden-section style polish of a function of one angle offset around a
// candidate sphere point, along a great-circle direction.
template <class F>
double polish_on_sphere(F&& f, const Vec& u0, double step, int rounds, int n) {
    Vec u = u0;
    double best = f(u);
    std::pair<Vec, Vec> basis;
    for (int round = 0; round < rounds; ++round) {
        bool improved = false;
        std::vector<Vec> dirs;
        if (n == 2) {
            dirs.push_back({-u[1], u[0]});
        } else {
            basis = tangent_basis(u);
            dirs.push_back(basis.first);
            dirs.push_back(basis.second);
        }
        for (const Vec& d : dirs) {
            for (double sign : {1.0, -1.0}) {
                Vec cand = add(u, scaled(d, sign * step));
                cand = scaled(cand, 1.0 / norm(cand));
                const double v = f(cand);
                if (v > best) {
                    best = v;
                    u = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-12) break;
    }
    return best;
}

template <class F>
double sphere_sup(F&& f, int n, double length_scale, const ProbeOptions& opt) {
    std::size_t count;
    if (n == 2) {
        count = static_cast<std::size_t>(std::ceil(2.0 * pi * opt.points_per_scale / length_scale));
        count = std::clamp<std::size_t>(count, 256, 1u << 23);
    } else {
        const double spacing = length_scale / opt.points_per_scale;
        const double want = 4.0 * pi / (spacing * spacing);
        count = static_cast<std::size_t>(std::min<double>(want, static_cast<double>(opt.max_points)));
        count = std::max<std::size_t>(count, 2048);
    }
    std::vector<Vec> grid = n == 2 ? circle_grid(count) : fibonacci_sphere(count);
    double best = -1.0;
    Vec at = grid.front();
    for (const Vec& u : grid) {
        const double v = f(u);
        if (v > best) {
            best = v;
            at = u;
        }
    }
    const double step = n == 2 ? 2.0 * pi / static_cast<double>(count)
                               : std::sqrt(4.0 * pi / static_cast<double>(count));
    return polish_on_sphere(f, at, step, opt.polish_rounds, n);
}

}  // namespace detail

// --- sphere decomposition (mollification on S^{n-1}) -------------------------

struct DecompositionResult {
    ScalarField phi1, phi2;
    ScalarField extension;  // phi2 extended off the surface
    std::function<Vec(const Vec&)> extension_gradient;
    double lambda = 0.0;
    double sup_phi1 = 0.0;           // measured ||phi1||_inf
    double sup_grad_phi2 = 0.0;      // measured intrinsic ||grad phi2||_inf
    double sup_grad_extension = 0.0; // measured ambient ||grad extension||_inf
    double c_lambda_value = 0.0;     // kernel mass (sphere branch, lambda < 1)
};

// phi = phi1 + phi2 on S^{n-1}. For lambda >= 1, phi2 is the spherical mean;
// otherwise phi2 is the normalized mollification at scale lambda and the
// extension is homogeneous of degree 0.
inline DecompositionResult sphere_decompose(const ScalarField& phi, double lambda, int n,
                                            const Mollifier& eta = plateau_mollifier(),
                                            const ProbeOptions& probes = {}) {
    require(n == 2 || n == 3, "sphere_decompose: n in {2,3} required");
    require(lambda > 0.0, "sphere_decompose: lambda > 0 required");

    DecompositionResult out;
    out.lambda = lambda;

    auto normalize = [](const Vec& x) { return scaled(x, 1.0 / norm(x)); };

    if (lambda >= 1.0) {
        QuadratureRule sph = sphere_rule(n, 1e-10);
        const double mean =
            sph.integrate([&](const Vec& y) { return phi.value(y); }) / unit_sphere_area(n);
        out.phi2.value = [mean](const Vec&) { return mean; };
        out.phi2.gradient = [n](const Vec&) { return zeros(n); };
        out.extension = out.phi2;
        out.extension_gradient = [n](const Vec&) { return zeros(n); };
        out.phi1.value = [phi, mean, normalize](const Vec& x) {
            return phi.value(normalize(x)) - mean;
        };
        out.phi1.gradient = [phi, normalize](const Vec& x) {
            return sphere_tangential_gradient(phi, normalize(x));
        };
        out.sup_grad_phi2 = 0.0;
        out.sup_grad_extension = 0.0;
        out.sup_phi1 = detail::sphere_sup(
            [&](const Vec& u) { return std::abs(out.phi1.value(u)); }, n, 1.0, probes);
        return out;
    }

    const double clam = c_lambda(lambda, eta, n);
    out.c_lambda_value = clam;
    detail::CapRule rule = detail::cap_rule(lambda, eta, n);

    // phi2 on the sphere; evaluation normalizes its argument, which makes the
    // same closure the degree-0 homogeneous extension.
    auto phi2_at = [phi, rule, clam, normalize, n](const Vec& x) {
        Vec u = normalize(x);
        std::pair<Vec, Vec> basis;
        if (n == 3) basis = detail::tangent_basis(u);
        double acc = 0.0;
        for (const auto& node : rule.nodes) {
            if (node.eta == 0.0) continue;
            acc += node.weight * node.eta * phi.value(detail::cap_point(rule, node, u, basis));
        }
        return acc / clam;
    };

    // Tangential gradient of phi2 at u via the differentiated kernel:
    // grad Phi2(u) = c^{-1} int (1/lambda) h'(|u-y|/lambda) (u-y)/|u-y| phi(y),
    // projected tangentially.
    auto grad_phi2_sphere = [phi, rule, clam, lambda, normalize, n](const Vec& x) {
        Vec u = normalize(x);
        std::pair<Vec, Vec> basis;
        if (n == 3) basis = detail::tangent_basis(u);
        Vec acc = zeros(n);
        for (const auto& node : rule.nodes) {
            if (node.deta == 0.0) continue;
            Vec y = detail::cap_point(rule, node, u, basis);
            Vec diff = sub(u, y);
            const double dist = norm(diff);
            if (dist == 0.0) continue;
            const double scale = node.weight * node.deta / (lambda * dist) * phi.value(y);
            for (int i = 0; i < n; ++i)
                acc[static_cast<std::size_t>(i)] += scale * diff[static_cast<std::size_t>(i)];
        }
        acc = scaled(acc, 1.0 / clam);
        const double radial = dot(acc, u);
        for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] -= radial * u[static_cast<std::size_t>(i)];
        return acc;
    };

    out.phi2.value = phi2_at;
    out.phi2.gradient = grad_phi2_sphere;
    out.extension.value = phi2_at;  // already homogeneous of degree 0
    out.extension_gradient = [grad_phi2_sphere, normalize](const Vec& x) {
        const double r = norm(x);
        return scaled(grad_phi2_sphere(normalize(x)), 1.0 / r);
    };
    out.extension.gradient = out.extension_gradient;

    out.phi1.value = [phi, phi2_at, normalize](const Vec& x) {
        Vec u = normalize(x);
        return phi.value(u) - phi2_at(u);
    };
    out.phi1.gradient = [phi, grad_phi2_sphere, normalize](const Vec& x) {
        Vec u = normalize(x);
        return sub(sphere_tangential_gradient(phi, u), grad_phi2_sphere(u));
    };

    out.sup_phi1 = detail::sphere_sup(
        [&](const Vec& u) { return std::abs(out.phi1.value(u)); }, n, lambda, probes);
    out.sup_grad_phi2 = detail::sphere_sup(
        [&](const Vec& u) { return norm(grad_phi2_sphere(u)); }, n, lambda, probes);
    out.sup_grad_extension = out.sup_grad_phi2;  // sup over |x| >= 1 sits on the sphere
    return out;
}

// |grad of the degree-0 extension| at x, |x| >= 1: surface gradient norm at
// x/|x| shrunk by 1/|x|; the radial derivative is identically zero.
inline double radial_extension_gradient(const DecompositionResult& result, const Vec& x) {
    const double r = norm(x);
    require_domain(r >= 1.0 - 1e-12, "radial_extension_gradient: |x| >= 1 required");
    return norm(result.extension_gradient(x));
}

// --- chart decomposition (mollification on H^m) -------------------------------

namespace detail {

// Group translate T_v(x) = (x' + x_m e^{v_m} v', x_m e^{v_m}).
inline Vec group_translate(const Vec& x, const Vec& v) {
    const std::size_t m = x.size();
    const double scale = x.back() * std::exp(v.back());
    Vec y(m);
    for (std::size_t i = 0; i + 1 < m; ++i) y[i] = x[i] + scale * v[i];
    y.back() = scale;
    return y;
}

struct ChartKernel {
    std::vector<Vec> v_nodes;
    Vec weights;  // includes lambda^{-m} eta(v/lambda) and the volume element
};

// Kernel nodes in v-space. m = 2 uses polar coordinates so the polynomial
// mollifier is integrated without a kink along its support circle.
inline ChartKernel chart_kernel(double lambda, const Mollifier& eta, int m, int refine = 1) {
    require(m == 1 || m == 2, "chart_kernel: m in {1,2} required");
    ChartKernel k;
    const double reach = lambda * eta.support_radius;
    const double jac = std::pow(lambda, -m);
    if (m == 1) {
        Nodes1D axis = gl_panels(-reach, reach, 16, refine);
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const double hv = eta.h(std::abs(axis.x[i]) / lambda);
            if (hv == 0.0) continue;
            k.v_nodes.push_back({axis.x[i]});
            k.weights.push_back(axis.w[i] * jac * hv);
        }
        return k;
    }
    Nodes1D rad = gl_panels(0.0, reach, 12, refine);
    Nodes1D az = periodic_rule(16 * refine);
    for (std::size_t i = 0; i < rad.size(); ++i) {
        const double r = rad.x[i];
        const double hv = eta.h(r / lambda);
        if (hv == 0.0) continue;
        for (std::size_t j = 0; j < az.size(); ++j) {
            k.v_nodes.push_back({r * std::cos(az.x[j]), r * std::sin(az.x[j])});
            k.weights.push_back(rad.w[i] * az.w[j] * r * jac * hv);
        }
    }
    return k;
}

// Deterministic sup over a chart box in (x', log x_m) coordinates with
// coordinate polish.
template <class F>
double chart_sup(F&& f, const Box& box, double lambda, const ProbeOptions& opt) {
    const int m = box.dim();
    const double t_lo = std::log(box.lo.back()), t_hi = std::log(box.hi.back());
    double spacing = lambda / opt.points_per_scale;

    // The horizontal mollification scale is x_m * lambda; resolve it at the
    // bottom of the band but cap the total budget.
    auto count_for = [&](double h) {
        double total = (t_hi - t_lo) / h + 1.0;
        for (int i = 0; i + 1 < m; ++i) {
            const double extent = box.hi[static_cast<std::size_t>(i)] - box.lo[static_cast<std::size_t>(i)];
            total *= extent / (h * box.lo.back()) + 1.0;
        }
        return total;
    };
    while (count_for(spacing) > static_cast<double>(opt.max_points)) spacing *= 1.5;

    double best = -1.0;
    Vec at;
    const int tn = static_cast<int>((t_hi - t_lo) / spacing) + 1;
    Vec x(static_cast<std::size_t>(m));
    std::function<void(int)> walk = [&](int d) {
        if (d == m - 1) {
            for (int it = 0; it <= tn; ++it) {
                x.back() = std::exp(t_lo + (t_hi - t_lo) * it / std::max(1, tn));
                const double val = f(x);
                if (val > best) {
                    best = val;
                    at = x;
                }
            }
            return;
        }
        const double lo = box.lo[static_cast<std::size_t>(d)], hi = box.hi[static_cast<std::size_t>(d)];
        const double h = spacing * box.lo.back();
        const int cnt = static_cast<int>((hi - lo) / h) + 1;
        for (int i = 0; i <= cnt; ++i) {
            x[static_cast<std::size_t>(d)] = lo + (hi - lo) * i / std::max(1, cnt);
            walk(d + 1);
        }
    };
    walk(0);

    // coordinate-descent polish
    Vec steps(static_cast<std::size_t>(m), spacing * at.back());
    steps.back() = spacing * at.back();
    for (int round = 0; round < opt.polish_rounds; ++round) {
        bool improved = false;
        for (int d = 0; d < m; ++d) {
            for (double sign : {1.0, -1.0}) {
                Vec cand = at;
                cand[static_cast<std::size_t>(d)] += sign * steps[static_cast<std::size_t>(d)];
                if (cand.back() <= 0.0) continue;
                const double val = f(cand);
                if (val > best) {
                    best = val;
                    at = cand;
                    improved = true;
                }
            }
        }
        if (!improved)
            for (auto& s : steps) s *= 0.5;
    }
    return best;
}

}  // namespace detail

// phi = phi1 + phi2 on H^m at scale lambda with Morrey exponent p > m.
// For lambda >= 1 the split is trivial (phi1 = phi); otherwise phi2 is the
// group mollification against a unit-mass kernel.
inline DecompositionResult hyperbolic_decompose(const ScalarField& phi, double lambda, double p,
                                                int m,
                                                const Mollifier& eta_in = Mollifier{},
                                                const ProbeOptions& probes = {}) {
    require(m >= 1, "hyperbolic_decompose: m >= 1 required");
    require(p > m, "hyperbolic_decompose: Morrey hypothesis p > m violated");
    require(lambda > 0.0, "hyperbolic_decompose: lambda > 0 required");
    require(phi.support.has_value(), "hyperbolic_decompose: compact support required");

    const Mollifier eta = eta_in.h ? eta_in : unit_mass_mollifier(m);

    DecompositionResult out;
    out.lambda = lambda;

    if (lambda >= 1.0) {
        out.phi1 = phi;
        out.phi2.value = [m](const Vec&) { return 0.0; };
        out.phi2.gradient = [m](const Vec&) { return zeros(m); };
        out.phi2.support = phi.support;
        out.sup_phi1 = detail::chart_sup(
            [&](const Vec& x) { return std::abs(phi.value(x)); }, *phi.support, 1.0, probes);
        out.sup_grad_phi2 = 0.0;
        return out;
    }

    detail::ChartKernel kernel = detail::chart_kernel(lambda, eta, m);

    auto phi2_at = [phi, kernel](const Vec& x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < kernel.v_nodes.size(); ++j)
            acc += kernel.weights[j] * phi.value(detail::group_translate(x, kernel.v_nodes[j]));
        return acc;
    };

    // Frame derivatives under the integral:
    //   e_i phi2 (i < m):   int e^{-v_m} (e_i phi)(T_v x) K(v) dv
    //   e_m phi2:           int [(e_m phi) + sum_i v_i (e_i phi)](T_v x) K(v) dv
    // with (e_i phi)(y) = y_m d_i phi(y).
    auto frame_grad_phi2 = [phi, kernel, m](const Vec& x) {
        Vec acc = zeros(m);
        for (std::size_t j = 0; j < kernel.v_nodes.size(); ++j) {
            const Vec& v = kernel.v_nodes[j];
            Vec y = detail::group_translate(x, v);
            Vec g = phi.gradient(y);
            const double ym = y.back();
            const double emphi = ym * g.back();
            double last = emphi;
            for (int i = 0; i + 1 < m; ++i) {
                const double eiphi = ym * g[static_cast<std::size_t>(i)];
                acc[static_cast<std::size_t>(i)] +=
                    kernel.weights[j] * std::exp(-v.back()) * eiphi;
                last += v[static_cast<std::size_t>(i)] * eiphi;
            }
            acc.back() += kernel.weights[j] * last;
        }
        return acc;
    };

    out.phi2.value = phi2_at;
    // coordinate gradient recovered from the frame components
    out.phi2.gradient = [frame_grad_phi2, m](const Vec& x) {
        Vec g = frame_grad_phi2(x);
        for (auto& v : g) v /= x.back();
        return g;
    };

    // support of phi2: group-translated support with the lambda margins
    {
        const Box& s = *phi.support;
        Box b = s;
        const double el = std::exp(lambda);
        b.lo.back() = s.lo.back() / el;
        b.hi.back() = s.hi.back() * el;
        const double shift = s.hi.back() * el * lambda;
        for (int i = 0; i + 1 < m; ++i) {
            b.lo[static_cast<std::size_t>(i)] -= shift;
            b.hi[static_cast<std::size_t>(i)] += shift;
        }
        out.phi2.support = b;
    }

    out.phi1.value = [phi, phi2_at](const Vec& x) { return phi.value(x) - phi2_at(x); };
    out.phi1.gradient = [phi, out_grad = out.phi2.gradient](const Vec& x) {
        return sub(phi.gradient(x), out_grad(x));
    };
    out.phi1.support = out.phi2.support;

    const Box probe_box = *out.phi2.support;
    out.sup_phi1 = detail::chart_sup(
        [&](const Vec& x) { return std::abs(out.phi1.value(x)); }, probe_box, lambda, probes);
    out.sup_grad_phi2 = detail::chart_sup(
        [&](const Vec& x) { return norm(frame_grad_phi2(x)); }, probe_box, lambda, probes);
    return out;
}

// Extension of a function on S = {x_1 = 0} in H^n to the whole chart:
// value at (x_1, x'', x_n) is the surface value at (x'', sqrt(x_1^2 + x_n^2)).
// The gradient bound transfers: |grad_g extension| <= sup_S |grad_g phi2|.
inline ScalarField extend_to_ambient(const ScalarField& phi2_on_surface, int n) {
    require(n >= 2, "extend_to_ambient: n >= 2 required");
    const int m = n - 1;
    ScalarField out;
    auto project = [m](const Vec& x) {
        Vec y(static_cast<std::size_t>(m));
        for (int i = 0; i + 1 < m; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) + 1];
        y.back() = std::hypot(x.front(), x.back());
        return y;
    };
    out.value = [phi2_on_surface, project](const Vec& x) {
        return phi2_on_surface.value(project(x));
    };
    out.gradient = [phi2_on_surface, project, n, m](const Vec& x) {
        Vec y = project(x);
        Vec gs = phi2_on_surface.gradient(y);
        const double rho = y.back();
        Vec g(static_cast<std::size_t>(n));
        g.front() = gs.back() * x.front() / rho;
        for (int i = 0; i + 1 < m; ++i) g[static_cast<std::size_t>(i) + 1] = gs[static_cast<std::size_t>(i)];
        g.back() = gs.back() * x.back() / rho;
        return g;
    };
    if (phi2_on_surface.support) {
        const Box& s = *phi2_on_surface.support;
        Vec lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
        lo.front() = -s.hi.back();
        hi.front() = s.hi.back();
        for (int i = 0; i + 1 < m; ++i) {
            lo[static_cast<std::size_t>(i) + 1] = s.lo[static_cast<std::size_t>(i)];
            hi[static_cast<std::size_t>(i) + 1] = s.hi[static_cast<std::size_t>(i)];
        }
        lo.back() = 0.0;
        hi.back() = s.hi.back();
        out.support = Box(lo, hi);
    }
    return out;
}

}  // namespace sobolab
