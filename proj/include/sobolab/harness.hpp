#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sobolab/core.hpp"
#include "sobolab/decomposition.hpp"
#include "sobolab/fields.hpp"
#include "sobolab/functionals.hpp"
#include "sobolab/geometry.hpp"
#include "sobolab/identities.hpp"
#include "sobolab/quadrature.hpp"

namespace sobolab {

enum class Setting { EuclideanMain, HyperbolicMain, EuclideanLowOrder };

inline const char* setting_name(Setting s) {
    switch (s) {
        case Setting::EuclideanMain: return "euclidean_main";
        case Setting::HyperbolicMain: return "hyperbolic_main";
        case Setting::EuclideanLowOrder: return "euclidean_low_order";
    }
    return "?";
}

struct RatioRecord {
    std::string family;
    Vec parameters;
    Setting setting = Setting::EuclideanMain;
    double numerator = 0.0;    // |pairing|
    double f_l1 = 0.0;         // ||f||_1
    double grad_phi_ln = 0.0;  // ||grad phi||_n
    double div_f_l1 = 0.0;     // low-order setting only
    double phi_ln = 0.0;       // low-order setting only
    double ratio = 0.0;
};

// |<f,phi>| divided by the inequality's right-hand side for the chosen setting.
// The low-order denominator carries the extra ||div f||_1 ||phi||_n term.
inline RatioRecord ratio(const VectorField& f, const VectorField& phi, Setting setting,
                         double accuracy = 1e-7, int refine = 1) {
    RatioRecord rec;
    rec.setting = setting;
    const Space space = setting == Setting::HyperbolicMain ? hyperbolic_space(f.dim)
                                                           : euclidean_space(f.dim);
    if (setting != Setting::EuclideanLowOrder)
        require(f.divergence_free, "ratio: this setting requires a divergence-free f");

    rec.numerator = std::abs(pairing(f, phi, space, accuracy, refine));
    rec.f_l1 = l1_norm(f, space, accuracy).value;
    rec.grad_phi_ln = gradient_lp_norm(phi, space, space.dim, accuracy).value;
    double denom = rec.f_l1 * rec.grad_phi_ln;
    if (setting == Setting::EuclideanLowOrder) {
        rec.div_f_l1 = l1_divergence_norm(f, space, accuracy).value;
        rec.phi_ln = lp_norm(phi, space, space.dim, accuracy).value;
        denom += rec.div_f_l1 * rec.phi_ln;
    }
    require_domain(denom > 0.0, "ratio: degenerate denominator");
    rec.ratio = rec.numerator / denom;
    return rec;
}

// Named parametric family of admissible (f, phi) pairs over a parameter box.
struct FamilySpec {
    std::string name;
    int dim = 2;
    Setting setting = Setting::EuclideanMain;
    Box parameter_box;
    std::function<std::pair<VectorField, VectorField>(const Vec&)> make;
};

struct TracePoint {
    int evaluation = 0;
    double best = 0.0;
};

struct EstimateResult {
    RatioRecord best;
    std::vector<TracePoint> trace;  // best-so-far, nondecreasing
    int evaluations = 0;
};

// Derivative-free maximization of the ratio over the family's parameter box:
// Nelder-Mead simplex with random restarts, deterministic under the seed.
// The result is a lower bound on the inequality's constant.
inline EstimateResult estimate_constant(const FamilySpec& family, int budget,
                                        std::uint64_t seed = 1, double accuracy = 1e-7,
                                        int refine = 1, int restarts = 5) {
    require(budget > 0, "estimate_constant: budget > 0 required");
    require(static_cast<bool>(family.make), "estimate_constant: family has no generator");
    const int dim = family.parameter_box.dim();
    const Box& box = family.parameter_box;

    auto clamp_to_box = [&](Vec p) {
        for (int i = 0; i < dim; ++i) {
            auto ii = static_cast<std::size_t>(i);
            p[ii] = std::clamp(p[ii], box.lo[ii], box.hi[ii]);
        }
        return p;
    };

    EstimateResult result;
    result.best.ratio = -1.0;

    auto evaluate = [&](const Vec& raw) {
        Vec p = clamp_to_box(raw);
        auto [f, phi] = family.make(p);
        RatioRecord rec = ratio(f, phi, family.setting, accuracy, refine);
        rec.family = family.name;
        rec.parameters = p;
        ++result.evaluations;
        if (rec.ratio > result.best.ratio) result.best = rec;
        result.trace.push_back({result.evaluations, result.best.ratio});
        return rec.ratio;
    };

    std::mt19937_64 rng(seed);
    const int per_restart = std::max(dim + 2, budget / std::max(1, restarts));

    for (int restart = 0; restart < restarts; ++restart) {
        if (result.evaluations >= budget) break;

        // random initial simplex inside the box
        std::vector<std::pair<double, Vec>> simplex;
        Vec base(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            auto ii = static_cast<std::size_t>(i);
            std::uniform_real_distribution<double> dist(box.lo[ii], box.hi[ii]);
            base[ii] = dist(rng);
        }
        simplex.emplace_back(evaluate(base), base);
        for (int i = 0; i < dim; ++i) {
            auto ii = static_cast<std::size_t>(i);
            Vec v = base;
            const double span = box.hi[ii] - box.lo[ii];
            v[ii] = std::clamp(v[ii] + 0.25 * span, box.lo[ii], box.hi[ii]);
            if (v[ii] == base[ii]) v[ii] = std::clamp(base[ii] - 0.25 * span, box.lo[ii], box.hi[ii]);
            simplex.emplace_back(evaluate(v), v);
        }

        const int start_evals = result.evaluations;
        while (result.evaluations - start_evals < per_restart &&
               result.evaluations < budget) {
            std::sort(simplex.begin(), simplex.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });

            // convergence: simplex collapsed below the parameter tolerance
            double spread = 0.0;
            for (const auto& [val, v] : simplex)
                spread = std::max(spread, norm(sub(v, simplex.front().second)));
            if (spread < 1e-3) break;

            // centroid of all but the worst
            Vec centroid = zeros(dim);
            for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
                centroid = add(centroid, simplex[i].second);
            centroid = scaled(centroid, 1.0 / static_cast<double>(dim));
            const Vec& worst = simplex.back().second;

            Vec reflected = add(centroid, scaled(sub(centroid, worst), 1.0));
            const double fr = evaluate(reflected);
            if (fr > simplex.front().first) {
                Vec expanded = add(centroid, scaled(sub(centroid, worst), 2.0));
                const double fe = evaluate(expanded);
                simplex.back() = fe > fr ? std::make_pair(fe, expanded)
                                         : std::make_pair(fr, reflected);
            } else if (fr > simplex[simplex.size() - 2].first) {
                simplex.back() = {fr, reflected};
            } else {
                Vec contracted = add(centroid, scaled(sub(worst, centroid), 0.5));
                const double fc = evaluate(contracted);
                if (fc > simplex.back().first) {
                    simplex.back() = {fc, contracted};
                } else {
                    // shrink toward the best vertex
                    for (std::size_t i = 1; i < simplex.size(); ++i) {
                        simplex[i].second = scaled(
                            add(simplex[i].second, simplex.front().second), 0.5);
                        simplex[i].first = evaluate(simplex[i].second);
                        if (result.evaluations >= budget) break;
                    }
                }
            }
        }
    }
    return result;
}

// --- Hardy / Morrey / vector Sobolev checks -----------------------------------

// ||Phi||_{L^p(H^n)} / ||e_n Phi||_{L^p(H^n)}; bounded by p/(n-1).
inline double hardy_check(const ScalarField& Phi, double p, int n, double accuracy = 1e-8) {
    require(n >= 2, "hardy_check: n >= 2 required (the constant degenerates)");
    require(p >= 1.0, "hardy_check: p >= 1 required");
    require(Phi.support.has_value(), "hardy_check: compact support required");
    const Space space = hyperbolic_space(n);
    const double num = lp_norm(Phi, space, p, accuracy).value;

    ScalarField enphi;
    enphi.support = Phi.support;
    enphi.value = [Phi](const Vec& x) { return x.back() * Phi.gradient(x).back(); };
    enphi.gradient = nullptr;
    QuadratureRule rule = volume_rule(
        half_space_chart_domain(n, Phi.support->lo.back(), Phi.support->hi.back()),
        *Phi.support, accuracy);
    const double den = std::pow(
        rule.integrate([&](const Vec& x) { return std::pow(std::abs(enphi.value(x)), p); }),
        1.0 / p);
    require_domain(den > 0.0, "hardy_check: zero field excluded");
    return num / den;
}

struct VectorSobolevReport {
    double ratio = 0.0;        // ||phi||_p / ||grad_g phi||_p
    double derived_bound = 0.0;  // n p/(n-1), the composed componentwise bound
};

inline VectorSobolevReport sobolev_vector_check(const VectorField& phi, double p,
                                                double accuracy = 1e-8) {
    require(phi.basis == VectorField::Basis::HyperbolicFrame,
            "sobolev_vector_check: frame field required");
    const int n = phi.dim;
    require(n >= 2, "sobolev_vector_check: n >= 2 required");
    VectorSobolevReport rep;
    const Space space = hyperbolic_space(n);
    const double num = lp_norm(phi, space, p, accuracy).value;
    const double den = gradient_lp_norm(phi, space, p, accuracy).value;
    require_domain(den > 0.0, "sobolev_vector_check: zero field excluded");
    rep.ratio = num / den;
    rep.derived_bound = n * p / (n - 1.0);
    return rep;
}

// ||phi||_inf / ||grad_g phi||_{L^p(H^m)} for p > m.
inline double morrey_check(const ScalarField& phi, double p, int m, double accuracy = 1e-8,
                           const ProbeOptions& probes = {}) {
    require(p > m, "morrey_check: p > m required");
    require(phi.support.has_value(), "morrey_check: compact support required");
    const double sup = detail::chart_sup(
        [&](const Vec& x) { return std::abs(phi.value(x)); }, *phi.support, 0.25, probes);
    const double den = chart_scalar_gradient_lp_norm(phi, m, p, accuracy);
    require_domain(den > 0.0, "morrey_check: zero field excluded");
    return sup / den;
}

// --- localized (partition of unity) estimate ----------------------------------

struct LocalizedReport {
    double kappa = 0.0;                   // int zeta(d(x,alpha))^2 dV_g(alpha)
    double normalization_residual = 0.0;  // x-independence of kappa
    double numerator = 0.0;
    double f_term = 0.0;    // ||zeta f||_1 + ||<grad_g zeta, f>||_1
    double phi_term = 0.0;  // ||grad phi||_n + ||phi||_n
    double ratio = 0.0;
    double support_height_lo = 0.0;  // band of x_n met on supp zeta_alpha
    double support_height_hi = 0.0;
};

namespace detail {

// Analytic chart gradient of x -> d(x, alpha).
inline Vec distance_gradient(const Vec& x, const Vec& alpha) {
    const std::size_t n = x.size();
    const double xn = x.back(), an = alpha.back();
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - alpha[i];
        d2 += t * t;
    }
    const double q = d2 / (2.0 * xn * an);
    const double dq = std::sqrt(std::max(1e-300, q * (q + 2.0)));
    Vec g(n);
    for (std::size_t i = 0; i + 1 < n; ++i) g[i] = (x[i] - alpha[i]) / (xn * an * dq);
    g.back() = ((x.back() - alpha.back()) / (xn * an) - d2 / (2.0 * xn * xn * an)) / dq;
    return g;
}

// Chart box of the geodesic ball B(center, R): a Euclidean ball with center
// (c', c_n cosh R) and radius c_n sinh R.
inline Box geodesic_ball_box(const Vec& center, double R) {
    const double cn = center.back();
    Vec lo = center, hi = center;
    const double horiz = cn * std::sinh(R);
    for (std::size_t i = 0; i + 1 < lo.size(); ++i) {
        lo[i] -= horiz;
        hi[i] += horiz;
    }
    lo.back() = cn * std::exp(-R);
    hi.back() = cn * std::exp(R);
    return Box(lo, hi);
}

}  // namespace detail

// The cutoff zeta_alpha(x) = zeta(d(x, alpha)) as a chart scalar field.
inline ScalarField localized_cutoff(const Mollifier& zeta, const Vec& alpha, double scale = 1.0) {
    ScalarField f;
    f.support = detail::geodesic_ball_box(alpha, zeta.support_radius);
    f.value = [zeta, alpha, scale](const Vec& x) {
        return scale * zeta.h(hyperbolic_distance(hyperbolic_point(x), hyperbolic_point(alpha)));
    };
    f.gradient = [zeta, alpha, scale](const Vec& x) {
        const double d =
            hyperbolic_distance(hyperbolic_point(x), hyperbolic_point(alpha));
        const double dh = zeta.dh(d);
        if (dh == 0.0) return zeros(static_cast<int>(x.size()));
        return scaled(detail::distance_gradient(x, alpha), scale * dh);
    };
    return f;
}

// int_{H^n} zeta(d(x,alpha))^2 dV_g(alpha) at a fixed x; constant in x.
inline double cutoff_square_mass(const Mollifier& zeta, const Vec& x, double accuracy = 1e-8) {
    const int n = static_cast<int>(x.size());
    Box box = detail::geodesic_ball_box(x, zeta.support_radius);
    QuadratureRule rule = volume_rule(half_space_chart_domain(n, box.lo.back(), box.hi.back()),
                                      box, accuracy);
    Point px = hyperbolic_point(x);
    return rule.integrate([&](const Vec& alpha) {
        const double v = zeta.h(hyperbolic_distance(px, hyperbolic_point(alpha)));
        return v * v;
    });
}

// The localized inequality at alpha = (0,1): zeta is rescaled so that the
// square mass is one, the normalization's x-independence is verified, and the
// localized ratio is reported.
inline LocalizedReport appendix_localized_estimate(const VectorField& f, const VectorField& phi,
                                                   const Mollifier& zeta,
                                                   double accuracy = 1e-7) {
    require(f.basis == VectorField::Basis::HyperbolicFrame &&
                phi.basis == VectorField::Basis::HyperbolicFrame,
            "appendix_localized_estimate: frame fields required");
    require(zeta.support_radius > 0.0 && zeta.support_radius < 50.0,
            "appendix_localized_estimate: zeta must be compactly supported");
    const int n = f.dim;
    LocalizedReport rep;

    const Vec probe1 = [n] {
        Vec v = zeros(n);
        v.back() = 1.0;
        return v;
    }();
    Vec probe2 = probe1;
    probe2.front() += 0.7;
    probe2.back() = 1.9;

    rep.kappa = cutoff_square_mass(zeta, probe1, accuracy);
    const double kappa2 = cutoff_square_mass(zeta, probe2, accuracy);
    rep.normalization_residual = std::abs(kappa2 / rep.kappa - 1.0);

    // rescale so int zeta_alpha^2 dV_g(alpha) = 1
    const double scale = 1.0 / std::sqrt(rep.kappa);
    const Vec alpha0 = probe1;
    ScalarField zeta_alpha = localized_cutoff(zeta, alpha0, scale);
    rep.support_height_lo = zeta_alpha.support->lo.back();
    rep.support_height_hi = zeta_alpha.support->hi.back();

    const Space space = hyperbolic_space(n);
    VectorField zf = field_multiply(zeta_alpha, f);
    VectorField zphi = field_multiply(zeta_alpha, phi);
    rep.numerator = std::abs(pairing(zf, zphi, space, accuracy));

    const double zf_l1 = l1_norm(zf, space, accuracy).value;
    // || <grad_g zeta_alpha, f>_g ||_{L^1}
    Box fbox = detail::integrand_box(f.support, zeta_alpha.support,
                                     "appendix_localized_estimate");
    double grad_term = 0.0;
    if (!detail::degenerate(fbox)) {
        QuadratureRule rule = volume_rule(
            half_space_chart_domain(n, fbox.lo.back(), fbox.hi.back()), fbox, accuracy);
        grad_term = rule.integrate([&](const Vec& x) {
            return std::abs(dot(frame_gradient(zeta_alpha, x), f.components(x)));
        });
    }
    rep.f_term = zf_l1 + grad_term;
    rep.phi_term = gradient_lp_norm(phi, space, n, accuracy).value +
                   lp_norm(phi, space, n, accuracy).value;
    require_domain(rep.f_term * rep.phi_term > 0.0,
                   "appendix_localized_estimate: degenerate denominator");
    rep.ratio = rep.numerator / (rep.f_term * rep.phi_term);
    return rep;
}

// --- flux proposition: decomposition-based domination ---------------------------

struct FluxBoundReport {
    double flux = 0.0;
    double f_l1_bulk = 0.0;     // exterior (Euclidean) or half-space (chart) mass
    double f_l1_surface = 0.0;
    double phi_w1n = 0.0;
    double ratio = 0.0;          // |flux| / three-factor product
    double lambda_star = 0.0;    // || f ||_bulk / || f ||_surface
    double bound_i = 0.0;        // ||f||_surface * sup |phi_1|
    double bound_ii = 0.0;       // ||f||_bulk * sup |grad extension|
    bool dominated = false;      // |flux| <= bound_i + bound_ii (with slack)
};

// Euclidean proposition on the unit sphere.
inline FluxBoundReport proposition_flux_bound(const VectorField& f, const VectorField& phi,
                                              double accuracy = 1e-8,
                                              const ProbeOptions& probes = {}) {
    require(f.basis == VectorField::Basis::Cartesian &&
                phi.basis == VectorField::Basis::Cartesian,
            "proposition_flux_bound: Cartesian fields required");
    require(f.divergence_free, "proposition_flux_bound: divergence-free f required");
    const int n = f.dim;
    FluxBoundReport rep;
    rep.flux = unit_sphere_flux(f, phi, accuracy);
    rep.f_l1_surface = sphere_l1_norm(f, accuracy);

    require(f.support.has_value(), "proposition_flux_bound: f needs a support box");
    const double rmax = std::max(1.0 + 1e-9, f.support->max_corner_norm() * (1.0 + 1e-12));
    QuadratureRule ext = volume_rule(exterior_domain(n, rmax), *f.support, accuracy);
    rep.f_l1_bulk = ext.integrate([&](const Vec& x) { return norm(f.components(x)); });
    rep.phi_w1n = w1n_sphere_norm(phi, accuracy).value;

    const double denom = std::pow(rep.f_l1_bulk, 1.0 / n) *
                         std::pow(rep.f_l1_surface, 1.0 - 1.0 / n) * rep.phi_w1n;
    require_domain(denom > 0.0, "proposition_flux_bound: zero denominator (degenerate input)");
    rep.ratio = std::abs(rep.flux) / denom;

    rep.lambda_star = rep.f_l1_bulk / rep.f_l1_surface;
    DecompositionResult dec =
        sphere_decompose(normal_component_on_sphere(phi), rep.lambda_star, n,
                         plateau_mollifier(), probes);
    rep.bound_i = rep.f_l1_surface * dec.sup_phi1;
    rep.bound_ii = rep.f_l1_bulk * dec.sup_grad_extension;
    rep.dominated = std::abs(rep.flux) <= (rep.bound_i + rep.bound_ii) * (1.0 + 1e-6) + 1e-12;
    return rep;
}

// Hyperbolic proposition on a vertical plane with normal axis 0; an offset is
// removed by the horizontal-translation isometry first.
inline FluxBoundReport proposition_flux_bound(const VectorField& f_in, const VectorField& phi_in,
                                              const Hypersurface& s, double accuracy = 1e-8,
                                              const ProbeOptions& probes = {}) {
    require(s.kind == Hypersurface::Kind::VerticalPlane && s.axis == 0,
            "proposition_flux_bound: vertical plane with normal axis x_1 required");
    require(f_in.basis == VectorField::Basis::HyperbolicFrame &&
                phi_in.basis == VectorField::Basis::HyperbolicFrame,
            "proposition_flux_bound: frame fields required");
    require(f_in.divergence_free, "proposition_flux_bound: divergence-free f required");
    const int n = f_in.dim;

    VectorField f = f_in, phi = phi_in;
    if (s.offset != 0.0) {
        Vec shift = zeros(n - 1);
        shift.front() = -s.offset;
        f = frame_field_translated(f_in, shift);
        phi = frame_field_translated(phi_in, shift);
    }
    const Hypersurface S = vertical_plane(n, 0, 0.0);

    FluxBoundReport rep;
    rep.flux = boundary_flux(f, phi, S, accuracy);
    rep.f_l1_surface = surface_l1_norm(f, S, accuracy);

    require(f.support.has_value(), "proposition_flux_bound: f needs a support box");
    Box xbox = *f.support;
    xbox.lo.front() = std::max(xbox.lo.front(), 0.0);
    if (xbox.lo.front() < xbox.hi.front()) {
        QuadratureRule bulk = volume_rule(
            half_space_chart_domain(n, xbox.lo.back(), xbox.hi.back()), xbox, accuracy);
        rep.f_l1_bulk = bulk.integrate([&](const Vec& x) {
            return x.front() > 0.0 ? norm(f.components(x)) : 0.0;
        });
    }
    rep.phi_w1n = w1n_surface_norm(phi, S, accuracy).value;

    const double denom = std::pow(rep.f_l1_bulk, 1.0 / n) *
                         std::pow(rep.f_l1_surface, 1.0 - 1.0 / n) * rep.phi_w1n;
    require_domain(denom > 0.0, "proposition_flux_bound: zero denominator (degenerate input)");
    rep.ratio = std::abs(rep.flux) / denom;
    rep.lambda_star = rep.f_l1_bulk / rep.f_l1_surface;

    // <phi, nu>_g restricted to S as a function on the H^{n-1} chart
    ScalarField phis;
    auto embed = [n](const Vec& y) {
        Vec x(static_cast<std::size_t>(n));
        x.front() = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) x[i + 1] = y[i];
        return x;
    };
    phis.value = [phi, embed](const Vec& y) { return phi.components(embed(y)).front(); };
    phis.gradient = [phi, embed, n](const Vec& y) {
        Mat j = phi.jacobian(embed(y));
        Vec g(static_cast<std::size_t>(n - 1));
        for (int i = 1; i < n; ++i) g[static_cast<std::size_t>(i - 1)] = j.front()[static_cast<std::size_t>(i)];
        return g;
    };
    if (phi.support) {
        Vec lo(static_cast<std::size_t>(n - 1)), hi(static_cast<std::size_t>(n - 1));
        for (int i = 1; i < n; ++i) {
            lo[static_cast<std::size_t>(i - 1)] = phi.support->lo[static_cast<std::size_t>(i)];
            hi[static_cast<std::size_t>(i - 1)] = phi.support->hi[static_cast<std::size_t>(i)];
        }
        phis.support = Box(lo, hi);
    }
    require(phis.support.has_value(), "proposition_flux_bound: phi needs a support box");

    DecompositionResult dec =
        hyperbolic_decompose(phis, rep.lambda_star, n, n - 1, Mollifier{}, probes);
    rep.bound_i = rep.f_l1_surface * dec.sup_phi1;
    // the ambient extension inherits the surface gradient bound
    rep.bound_ii = rep.f_l1_bulk * dec.sup_grad_phi2;
    rep.dominated = std::abs(rep.flux) <= (rep.bound_i + rep.bound_ii) * (1.0 + 1e-6) + 1e-12;
    return rep;
}

// --- built-in families for the constant search ---------------------------------

inline std::vector<FamilySpec> builtin_families(Setting setting, int dim) {
    require(dim == 2 || dim == 3, "builtin_families: dim in {2,3} required");
    std::vector<FamilySpec> out;

    if (setting == Setting::EuclideanMain) {
        // long stream tube against a directional envelope
        FamilySpec tube;
        tube.name = "tube";
        tube.dim = dim;
        tube.setting = setting;
        tube.parameter_box = Box({1.0, 0.15, 0.8, 0.3}, {6.0, 0.9, 6.0, 3.0});
        tube.make = [dim](const Vec& p) {
            const double len = p[0], thick = p[1], es = p[2], ea = p[3];
            Vec fscales = zeros(dim), escales = zeros(dim);
            fscales[0] = len;
            escales[0] = len * es;
            for (int i = 1; i < dim; ++i) {
                fscales[static_cast<std::size_t>(i)] = thick;
                escales[static_cast<std::size_t>(i)] = thick * ea;
            }
            VectorField f = tube_field(zeros(dim), fscales);
            ScalarField envelope = anisotropic_poly_bump(zeros(dim), escales);
            ScalarField z;
            z.value = [](const Vec&) { return 0.0; };
            z.gradient = [dim](const Vec&) { return zeros(dim); };
            z.support = envelope.support;
            std::vector<ScalarField> comps(static_cast<std::size_t>(dim), z);
            comps[0] = envelope;
            VectorField phi = vector_from_components(comps, VectorField::Basis::Cartesian);
            return std::make_pair(f, phi);
        };
        out.push_back(tube);

        FamilySpec pair;
        pair.name = "rotational_pair";
        pair.dim = dim;
        pair.setting = setting;
        pair.parameter_box = Box({0.3, 0.3, -1.0, 0.2}, {1.5, 1.5, 1.0, 2.5});
        pair.make = [dim](const Vec& p) {
            VectorField f = poly_curl_field(zeros(dim), p[0]);
            Vec c = zeros(dim);
            c[0] = p[2];
            VectorField phi = poly_curl_field(c, p[1], p[3]);
            return std::make_pair(f, phi);
        };
        out.push_back(pair);

        FamilySpec multi;
        multi.name = "multibump";
        multi.dim = dim;
        multi.setting = setting;
        multi.parameter_box = Box({0.3, 0.3, 0.2, -1.0}, {1.2, 1.2, 2.2, 1.0});
        multi.make = [dim](const Vec& p) {
            Vec c1 = zeros(dim), c2 = zeros(dim);
            c2[0] = p[2];
            VectorField f = field_sum(poly_curl_field(c1, p[0]),
                                      field_scale(poly_curl_field(c2, p[1]), p[3]));
            VectorField phi =
                tube_field(scaled(c2, 0.5), Vec(static_cast<std::size_t>(dim), 0.6 + 0.5 * p[2]));
            return std::make_pair(f, phi);
        };
        out.push_back(multi);
        return out;
    }

    if (setting == Setting::HyperbolicMain) {
        FamilySpec lifted;
        lifted.name = "lifted_tube";
        lifted.dim = dim;
        lifted.setting = setting;
        lifted.parameter_box = Box({0.2, 0.1, 0.3, 0.3}, {0.8, 0.6, 3.0, 3.0});
        lifted.make = [dim](const Vec& p) {
            Vec center = zeros(dim);
            center.back() = 1.0;
            Vec fscales = zeros(dim);
            fscales[0] = p[0];
            for (int i = 1; i < dim; ++i) fscales[static_cast<std::size_t>(i)] = p[1];
            VectorField f = make_divfree_hyperbolic(tube_field(center, fscales));
            ScalarField envelope = chart_poly_bump(center, 0.25 * p[2]);
            ScalarField z;
            z.value = [](const Vec&) { return 0.0; };
            z.gradient = [dim](const Vec&) { return zeros(dim); };
            z.support = envelope.support;
            std::vector<ScalarField> comps(static_cast<std::size_t>(dim), z);
            comps[0] = envelope;
            ScalarField second = chart_poly_bump(center, 0.25 * p[3], 0.7);
            second.support = envelope.support;
            comps.back() = second;
            VectorField phi = vector_from_components(comps, VectorField::Basis::HyperbolicFrame);
            return std::make_pair(f, phi);
        };
        out.push_back(lifted);

        FamilySpec rot;
        rot.name = "lifted_rotational";
        rot.dim = dim;
        rot.setting = setting;
        rot.parameter_box = Box({0.15, 0.15, -0.4}, {0.7, 0.7, 0.4});
        rot.make = [dim](const Vec& p) {
            Vec c1 = zeros(dim), c2 = zeros(dim);
            c1.back() = 1.0;
            c2.back() = 1.0;
            c2[0] = p[2];
            VectorField f = make_divfree_hyperbolic(poly_curl_field(c1, p[0]));
            VectorField phi = make_divfree_hyperbolic(poly_curl_field(c2, p[1]));
            return std::make_pair(f, phi);
        };
        out.push_back(rot);
        return out;
    }

    // EuclideanLowOrder: f need not be divergence-free
    FamilySpec grad;
    grad.name = "gradient_mix";
    grad.dim = dim;
    grad.setting = setting;
    grad.parameter_box = Box({0.3, 0.3, -1.0, 0.0}, {1.5, 1.5, 1.0, 1.0});
    grad.make = [dim](const Vec& p) {
        ScalarField pot = poly_bump(zeros(dim), p[0]);
        VectorField fgrad = gradient_field(pot, dim);
        VectorField fcurl = poly_curl_field(zeros(dim), p[0]);
        VectorField f = field_sum(field_scale(fgrad, p[3]), field_scale(fcurl, 1.0 - p[3]));
        Vec c = zeros(dim);
        c[0] = p[2];
        VectorField phi = poly_curl_field(c, p[1]);
        return std::make_pair(f, phi);
    };
    out.push_back(grad);

    FamilySpec pure;
    pure.name = "pure_gradient";
    pure.dim = dim;
    pure.setting = setting;
    pure.parameter_box = Box({0.3, 0.3, -0.8}, {1.4, 1.4, 0.8});
    pure.make = [dim](const Vec& p) {
        ScalarField pot = poly_bump(zeros(dim), p[0]);
        VectorField f = gradient_field(pot, dim);
        Vec c = zeros(dim);
        c[0] = p[2];
        VectorField phi = gradient_field(poly_bump(c, p[1]), dim);
        return std::make_pair(f, phi);
    };
    out.push_back(pure);
    return out;
}

}  // namespace sobolab
