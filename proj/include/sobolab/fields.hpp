#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "sobolab/core.hpp"
#include "sobolab/geometry.hpp"

namespace sobolab {

// Scalar function with analytic first (and optionally second) derivatives.
// Fields carry their derivatives analytically; the decomposition lemmas and
// covariant derivatives need stable gradients at small mollification scales.
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;   // coordinate partials
    std::function<Mat(const Vec&)> hessian;    // optional, needed for potentials
    std::optional<Box> support;
};

// Vector field stored either in Cartesian coordinate components or in the
// hyperbolic frame components f^i (so that the tangent vector is sum f^i e_i).
struct VectorField {
    enum class Basis { Cartesian, HyperbolicFrame };

    int dim = 0;
    Basis basis = Basis::Cartesian;
    std::function<Vec(const Vec&)> components;
    std::function<Mat(const Vec&)> jacobian;   // [i][j] = d comp_i / d x_j
    bool divergence_free = false;
    std::optional<Box> support;
};

inline double divergence_euclidean(const VectorField& F, const Point& x) {
    require(F.basis == VectorField::Basis::Cartesian,
            "divergence_euclidean: Cartesian basis required");
    require(x.space.kind == SpaceKind::Euclidean && x.dim() == F.dim,
            "divergence_euclidean: Euclidean point of matching dimension required");
    return trace(F.jacobian(x.coords));
}

// div_g f = x_n^n sum_i d_i (x_n^{1-n} f^i) = x_n tr(Df) - (n-1) f^n
// for frame components f^i.
inline double divergence_hyperbolic(const VectorField& f, const Point& x) {
    require(f.basis == VectorField::Basis::HyperbolicFrame,
            "divergence_hyperbolic: frame basis required");
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace && x.dim() == f.dim,
            "divergence_hyperbolic: hyperbolic point of matching dimension required");
    const double xn = x.height();
    return xn * trace(f.jacobian(x.coords)) - (f.dim - 1) * f.components(x.coords).back();
}

// Frame components of nabla_g phi as a matrix: entry (i,j) = <nabla_{e_i} phi, e_j>_g.
inline Mat covariant_derivative(const VectorField& phi, const Point& x) {
    require(phi.basis == VectorField::Basis::HyperbolicFrame,
            "covariant_derivative: frame basis required");
    require(x.space.kind == SpaceKind::HyperbolicHalfSpace && x.dim() == phi.dim,
            "covariant_derivative: hyperbolic point of matching dimension required");
    const int n = phi.dim;
    const double xn = x.height();
    const Vec comp = phi.components(x.coords);
    const Mat jac = phi.jacobian(x.coords);
    Mat m = zero_matrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                xn * jac[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < n; ++i) {
        m[static_cast<std::size_t>(i)].back() += comp[static_cast<std::size_t>(i)];
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -= comp.back();
    }
    return m;
}

// Frame components of the hyperbolic gradient of a scalar: (e_i psi) = x_n d_i psi.
inline Vec frame_gradient(const ScalarField& psi, const Vec& x) {
    Vec g = psi.gradient(x);
    for (auto& v : g) v *= x.back();
    return g;
}

inline double frame_gradient_norm(const ScalarField& psi, const Vec& x) {
    return norm(frame_gradient(psi, x));
}

// n=2: F = (d2 psi, -d1 psi). Divergence-free because mixed partials commute.
inline VectorField make_divfree_euclidean(const ScalarField& psi) {
    require(static_cast<bool>(psi.hessian), "make_divfree_euclidean: potential needs a Hessian");
    VectorField F;
    F.dim = 2;
    F.basis = VectorField::Basis::Cartesian;
    F.divergence_free = true;
    F.support = psi.support;
    F.components = [psi](const Vec& x) {
        Vec g = psi.gradient(x);
        return Vec{g[1], -g[0]};
    };
    F.jacobian = [psi](const Vec& x) {
        Mat h = psi.hessian(x);
        return Mat{{h[1][0], h[1][1]}, {-h[0][0], -h[0][1]}};
    };
    return F;
}

// n=3: F = curl A for a vector potential A.
inline VectorField make_divfree_euclidean(const std::array<ScalarField, 3>& A) {
    for (const auto& a : A)
        require(static_cast<bool>(a.hessian), "make_divfree_euclidean: potential needs a Hessian");
    VectorField F;
    F.dim = 3;
    F.basis = VectorField::Basis::Cartesian;
    F.divergence_free = true;
    std::optional<Box> sup;
    for (const auto& a : A) {
        if (!a.support) continue;
        sup = sup ? box_union(*sup, *a.support) : *a.support;
    }
    F.support = sup;
    F.components = [A](const Vec& x) {
        Vec g0 = A[0].gradient(x), g1 = A[1].gradient(x), g2 = A[2].gradient(x);
        return Vec{g2[1] - g1[2], g0[2] - g2[0], g1[0] - g0[1]};
    };
    F.jacobian = [A](const Vec& x) {
        Mat h0 = A[0].hessian(x), h1 = A[1].hessian(x), h2 = A[2].hessian(x);
        Mat j = zero_matrix(3, 3);
        for (int c = 0; c < 3; ++c) {
            auto cc = static_cast<std::size_t>(c);
            j[0][cc] = h2[1][cc] - h1[2][cc];
            j[1][cc] = h0[2][cc] - h2[0][cc];
            j[2][cc] = h1[0][cc] - h0[1][cc];
        }
        return j;
    };
    return F;
}

// Lift a Euclidean divergence-free field into the chart: frame components
// f^i = x_n^{n-1} F^i give div_g f = x_n^n div_e F = 0 identically.
inline VectorField make_divfree_hyperbolic(const VectorField& F) {
    require(F.basis == VectorField::Basis::Cartesian,
            "make_divfree_hyperbolic: Cartesian input required");
    require(F.divergence_free, "make_divfree_hyperbolic: input not certified divergence-free");
    if (F.support) require(F.support->lo.back() > 0.0,
                           "make_divfree_hyperbolic: support must lie in the chart x_n > 0");
    const int n = F.dim;
    VectorField f;
    f.dim = n;
    f.basis = VectorField::Basis::HyperbolicFrame;
    f.divergence_free = true;
    f.support = F.support;
    f.components = [F, n](const Vec& x) {
        const double s = std::pow(x.back(), n - 1);
        Vec c = F.components(x);
        for (auto& v : c) v *= s;
        return c;
    };
    f.jacobian = [F, n](const Vec& x) {
        const double xn = x.back();
        const double s = std::pow(xn, n - 1);
        const double ds = (n - 1) * std::pow(xn, n - 2);
        Vec c = F.components(x);
        Mat j = F.jacobian(x);
        for (int i = 0; i < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            for (int k = 0; k < n; ++k) j[ii][static_cast<std::size_t>(k)] *= s;
            j[ii].back() += ds * c[ii];
        }
        return j;
    };
    return f;
}

// grad psi as a Cartesian vector field; generally not divergence-free.
inline VectorField gradient_field(const ScalarField& psi, int dim) {
    require(static_cast<bool>(psi.hessian), "gradient_field: potential needs a Hessian");
    VectorField F;
    F.dim = dim;
    F.basis = VectorField::Basis::Cartesian;
    F.support = psi.support;
    F.components = [psi](const Vec& x) { return psi.gradient(x); };
    F.jacobian = [psi](const Vec& x) { return psi.hessian(x); };
    return F;
}

// --- field arithmetic -------------------------------------------------------

inline VectorField field_sum(const VectorField& a, const VectorField& b) {
    require(a.dim == b.dim && a.basis == b.basis, "field_sum: incompatible fields");
    VectorField out = a;
    out.divergence_free = a.divergence_free && b.divergence_free;
    if (a.support && b.support)
        out.support = box_union(*a.support, *b.support);
    else
        out.support.reset();
    out.components = [a, b](const Vec& x) { return add(a.components(x), b.components(x)); };
    out.jacobian = [a, b](const Vec& x) {
        Mat ja = a.jacobian(x), jb = b.jacobian(x);
        for (std::size_t i = 0; i < ja.size(); ++i) ja[i] = add(ja[i], jb[i]);
        return ja;
    };
    return out;
}

inline VectorField field_scale(const VectorField& a, double c) {
    VectorField out = a;
    out.components = [a, c](const Vec& x) { return scaled(a.components(x), c); };
    out.jacobian = [a, c](const Vec& x) {
        Mat j = a.jacobian(x);
        for (auto& row : j) row = scaled(row, c);
        return j;
    };
    return out;
}

// psi * F; divergence-free status is not preserved. Disjoint supports yield a
// zero field with a collapsed support box.
inline VectorField field_multiply(const ScalarField& psi, const VectorField& F) {
    VectorField out = F;
    out.divergence_free = false;
    if (psi.support && F.support) {
        auto cap = box_intersection(*psi.support, *F.support);
        out.support = cap ? *cap : Box(psi.support->lo, psi.support->lo);
    } else if (psi.support) {
        out.support = psi.support;
    }
    out.components = [psi, F](const Vec& x) { return scaled(F.components(x), psi.value(x)); };
    out.jacobian = [psi, F](const Vec& x) {
        const double p = psi.value(x);
        const Vec g = psi.gradient(x);
        const Vec c = F.components(x);
        Mat j = F.jacobian(x);
        for (std::size_t i = 0; i < j.size(); ++i)
            for (std::size_t k = 0; k < j[i].size(); ++k) j[i][k] = p * j[i][k] + g[k] * c[i];
        return j;
    };
    return out;
}

inline VectorField vector_from_components(std::vector<ScalarField> comps,
                                          VectorField::Basis basis) {
    const int n = static_cast<int>(comps.size());
    VectorField out;
    out.dim = n;
    out.basis = basis;
    std::optional<Box> sup;
    for (const auto& c : comps) {
        if (!c.support) { sup.reset(); break; }
        sup = sup ? box_union(*sup, *c.support) : *c.support;
    }
    out.support = sup;
    out.components = [comps, n](const Vec& x) {
        Vec v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = comps[static_cast<std::size_t>(i)].value(x);
        return v;
    };
    out.jacobian = [comps, n](const Vec& x) {
        Mat j(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) j[static_cast<std::size_t>(i)] = comps[static_cast<std::size_t>(i)].gradient(x);
        return j;
    };
    return out;
}

// L^1-preserving dilation family: eps^{-mass_exponent} F(x / eps).
inline VectorField dilated(const VectorField& F, double eps, double mass_exponent) {
    require(eps > 0.0, "dilated: eps > 0 required");
    VectorField out = F;
    const double amp = std::pow(eps, -mass_exponent);
    out.components = [F, eps, amp](const Vec& x) {
        return scaled(F.components(scaled(x, 1.0 / eps)), amp);
    };
    out.jacobian = [F, eps, amp](const Vec& x) {
        Mat j = F.jacobian(scaled(x, 1.0 / eps));
        for (auto& row : j) row = scaled(row, amp / eps);
        return j;
    };
    if (F.support) out.support = Box(scaled(F.support->lo, eps), scaled(F.support->hi, eps));
    return out;
}

// --- built-in catalog -------------------------------------------------------
//
// All catalog fields are parametrized by center and per-axis scales and carry
// analytic derivatives. Profiles are functions of s = sum ((x_i - c_i)/a_i)^2.

namespace profiles {

struct Profile {
    std::function<double(double)> q, dq, d2q;  // value and derivatives in s
};

inline Profile gaussian() {
    return {[](double s) { return std::exp(-s); },
            [](double s) { return -std::exp(-s); },
            [](double s) { return std::exp(-s); }};
}

// (1 - s)^k on s < 1, extended by zero; C^{k-1} across the support boundary.
inline Profile poly_bump(int k) {
    require(k >= 3, "poly_bump: k >= 3 required for usable smoothness");
    return {[k](double s) { return s < 1.0 ? std::pow(1.0 - s, k) : 0.0; },
            [k](double s) { return s < 1.0 ? -k * std::pow(1.0 - s, k - 1) : 0.0; },
            [k](double s) {
                return s < 1.0 ? k * (k - 1.0) * std::pow(1.0 - s, k - 2) : 0.0;
            }};
}

// Flat top: 1 for s <= 1/4, then (1-u^2)^k with u = 2 sqrt(s) - 1 down to 0 at
// s = 1. No second derivative; not usable as a stream potential.
inline Profile plateau_bump(int k) {
    require(k >= 2, "plateau_bump: k >= 2 required");
    Profile p;
    p.q = [k](double s) {
        if (s <= 0.25) return 1.0;
        if (s >= 1.0) return 0.0;
        const double u = 2.0 * std::sqrt(s) - 1.0;
        return std::pow(1.0 - u * u, k);
    };
    p.dq = [k](double s) {
        if (s <= 0.25 || s >= 1.0) return 0.0;
        const double rs = std::sqrt(s);
        const double u = 2.0 * rs - 1.0;
        return -2.0 * k * u * std::pow(1.0 - u * u, k - 1) / rs;
    };
    p.d2q = nullptr;
    return p;
}

}  // namespace profiles

// How far a Gaussian tail must extend before it is negligible at double
// precision: exp(-8.5^2) ~ 5e-32.
constexpr double gaussian_support_sigmas = 8.5;

inline ScalarField anisotropic_profile_field(const profiles::Profile& q, Vec center, Vec scales,
                                             double amplitude, double support_multiple) {
    const int n = static_cast<int>(center.size());
    require(static_cast<int>(scales.size()) == n, "profile field: scales size mismatch");
    for (double a : scales) require(a > 0.0, "profile field: scales must be positive");
    ScalarField f;
    Vec lo(center), hi(center);
    for (int i = 0; i < n; ++i) {
        lo[static_cast<std::size_t>(i)] -= support_multiple * scales[static_cast<std::size_t>(i)];
        hi[static_cast<std::size_t>(i)] += support_multiple * scales[static_cast<std::size_t>(i)];
    }
    f.support = Box(lo, hi);
    auto sval = [center, scales, n](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            const double t = (x[ii] - center[ii]) / scales[ii];
            s += t * t;
        }
        return s;
    };
    f.value = [q, sval, amplitude](const Vec& x) { return amplitude * q.q(sval(x)); };
    f.gradient = [q, sval, center, scales, amplitude, n](const Vec& x) {
        const double ds = q.dq(sval(x));
        Vec g(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            g[ii] = amplitude * ds * 2.0 * (x[ii] - center[ii]) / (scales[ii] * scales[ii]);
        }
        return g;
    };
    if (q.d2q) {
        f.hessian = [q, sval, center, scales, amplitude, n](const Vec& x) {
            const double s = sval(x);
            const double d1 = q.dq(s), d2 = q.d2q(s);
            Mat h = zero_matrix(n, n);
            for (int i = 0; i < n; ++i) {
                auto ii = static_cast<std::size_t>(i);
                const double ui = 2.0 * (x[ii] - center[ii]) / (scales[ii] * scales[ii]);
                for (int j = 0; j < n; ++j) {
                    auto jj = static_cast<std::size_t>(j);
                    const double uj = 2.0 * (x[jj] - center[jj]) / (scales[jj] * scales[jj]);
                    h[ii][jj] = amplitude * d2 * ui * uj;
                }
                h[ii][ii] += amplitude * d1 * 2.0 / (scales[ii] * scales[ii]);
            }
            return h;
        };
    }
    return f;
}

inline ScalarField gaussian_bump(Vec center, double width, double amplitude = 1.0) {
    const int n = static_cast<int>(center.size());
    return anisotropic_profile_field(profiles::gaussian(), std::move(center),
                                     Vec(static_cast<std::size_t>(n), width), amplitude,
                                     gaussian_support_sigmas);
}

inline ScalarField poly_bump(Vec center, double radius, double amplitude = 1.0, int k = 6) {
    const int n = static_cast<int>(center.size());
    return anisotropic_profile_field(profiles::poly_bump(k), std::move(center),
                                     Vec(static_cast<std::size_t>(n), radius), amplitude, 1.0);
}

inline ScalarField anisotropic_gaussian(Vec center, Vec scales, double amplitude = 1.0) {
    return anisotropic_profile_field(profiles::gaussian(), std::move(center), std::move(scales),
                                     amplitude, gaussian_support_sigmas);
}

inline ScalarField anisotropic_poly_bump(Vec center, Vec scales, double amplitude = 1.0,
                                         int k = 6) {
    return anisotropic_profile_field(profiles::poly_bump(k), std::move(center), std::move(scales),
                                     amplitude, 1.0);
}

// Scalar bump adapted to the chart: profile of (|x'-c'|^2 + log^2(x_n/c_n))/R^2,
// so the support stays inside {x_n > 0} and is symmetric in hyperbolic terms.
inline ScalarField chart_profile_field(const profiles::Profile& q, Vec center, double radius,
                                       double amplitude, double support_multiple) {
    const int n = static_cast<int>(center.size());
    require(n >= 1, "chart_profile_field: n >= 1 required");
    require(center.back() > 0.0 && radius > 0.0, "chart_profile_field: bad center/radius");
    ScalarField f;
    const double m = support_multiple * radius;
    Vec lo(center), hi(center);
    for (int i = 0; i + 1 < n; ++i) {
        lo[static_cast<std::size_t>(i)] -= m;
        hi[static_cast<std::size_t>(i)] += m;
    }
    lo.back() = center.back() * std::exp(-m);
    hi.back() = center.back() * std::exp(m);
    f.support = Box(lo, hi);
    auto sval = [center, radius, n](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            const double t = x[ii] - center[ii];
            s += t * t;
        }
        const double u = std::log(x.back() / center.back());
        return (s + u * u) / (radius * radius);
    };
    f.value = [q, sval, amplitude](const Vec& x) { return amplitude * q.q(sval(x)); };
    f.gradient = [q, sval, center, radius, amplitude, n](const Vec& x) {
        const double ds = amplitude * q.dq(sval(x)) / (radius * radius);
        Vec g(static_cast<std::size_t>(n));
        for (int i = 0; i + 1 < n; ++i) {
            auto ii = static_cast<std::size_t>(i);
            g[ii] = ds * 2.0 * (x[ii] - center[ii]);
        }
        g.back() = ds * 2.0 * std::log(x.back() / center.back()) / x.back();
        return g;
    };
    return f;
}

inline ScalarField chart_gaussian_bump(Vec center, double radius, double amplitude = 1.0) {
    return chart_profile_field(profiles::gaussian(), std::move(center), radius, amplitude,
                               gaussian_support_sigmas);
}

inline ScalarField chart_poly_bump(Vec center, double radius, double amplitude = 1.0, int k = 6) {
    return chart_profile_field(profiles::poly_bump(k), std::move(center), radius, amplitude, 1.0);
}

// Constant equal to amplitude on the inner half of the bump.
inline ScalarField chart_plateau_bump(Vec center, double radius, double amplitude = 1.0,
                                      int k = 4) {
    return chart_profile_field(profiles::plateau_bump(k), std::move(center), radius, amplitude,
                               1.0);
}

// Rotational (stream-function) field about a center, n = 2.
inline VectorField rotational_field(Vec center, double width, double amplitude = 1.0) {
    return make_divfree_euclidean(gaussian_bump(std::move(center), width, amplitude));
}

// Compactly supported curl field: n=2 stream bump, n=3 curl of a bump along e_3.
inline VectorField poly_curl_field(Vec center, double radius, double amplitude = 1.0, int k = 6) {
    const int n = static_cast<int>(center.size());
    require(n == 2 || n == 3, "poly_curl_field: n in {2,3} required");
    if (n == 2) return make_divfree_euclidean(poly_bump(std::move(center), radius, amplitude, k));
    ScalarField zero;
    zero.value = [](const Vec&) { return 0.0; };
    zero.gradient = [](const Vec& x) { return zeros(static_cast<int>(x.size())); };
    zero.hessian = [](const Vec& x) {
        const int m = static_cast<int>(x.size());
        return zero_matrix(m, m);
    };
    ScalarField a3 = poly_bump(std::move(center), radius, amplitude, k);
    zero.support = a3.support;
    return make_divfree_euclidean(std::array<ScalarField, 3>{zero, zero, a3});
}

// Long anisotropic stream bump, the classical near-extremizer shape.
inline VectorField tube_field(Vec center, Vec scales, double amplitude = 1.0, int k = 6) {
    const int n = static_cast<int>(center.size());
    require(n == 2 || n == 3, "tube_field: n in {2,3} required");
    ScalarField psi = anisotropic_poly_bump(std::move(center), std::move(scales), amplitude, k);
    if (n == 2) return make_divfree_euclidean(psi);
    ScalarField zero;
    zero.value = [](const Vec&) { return 0.0; };
    zero.gradient = [](const Vec& x) { return zeros(static_cast<int>(x.size())); };
    zero.hessian = [](const Vec& x) {
        const int m = static_cast<int>(x.size());
        return zero_matrix(m, m);
    };
    zero.support = psi.support;
    return make_divfree_euclidean(std::array<ScalarField, 3>{zero, zero, psi});
}

// --- isometry pushforwards ---------------------------------------------------
//
// For horizontal translations and dilations of the chart the frame e_i is
// equivariant, so pushing a frame field forward is plain composition with the
// inverse map; frame components do not mix.

inline VectorField frame_field_translated(const VectorField& f, const Vec& shift) {
    require(f.basis == VectorField::Basis::HyperbolicFrame,
            "frame_field_translated: frame field required");
    require(static_cast<int>(shift.size()) == f.dim - 1, "frame_field_translated: bad shift");
    auto back = [shift](Vec x) {
        for (std::size_t i = 0; i < shift.size(); ++i) x[i] -= shift[i];
        return x;
    };
    VectorField out = f;
    out.components = [f, back](const Vec& x) { return f.components(back(x)); };
    out.jacobian = [f, back](const Vec& x) { return f.jacobian(back(x)); };
    if (f.support) {
        Box b = *f.support;
        for (std::size_t i = 0; i < shift.size(); ++i) {
            b.lo[i] += shift[i];
            b.hi[i] += shift[i];
        }
        out.support = b;
    }
    return out;
}

inline VectorField frame_field_dilated(const VectorField& f, double eps) {
    require(f.basis == VectorField::Basis::HyperbolicFrame,
            "frame_field_dilated: frame field required");
    require(eps > 0.0, "frame_field_dilated: eps > 0 required");
    VectorField out = f;
    out.components = [f, eps](const Vec& x) { return f.components(scaled(x, 1.0 / eps)); };
    out.jacobian = [f, eps](const Vec& x) {
        Mat j = f.jacobian(scaled(x, 1.0 / eps));
        for (auto& row : j) row = scaled(row, 1.0 / eps);
        return j;
    };
    if (f.support) out.support = Box(scaled(f.support->lo, eps), scaled(f.support->hi, eps));
    return out;
}

inline ScalarField scalar_translated(const ScalarField& psi, const Vec& shift, int dim) {
    require(static_cast<int>(shift.size()) == dim - 1, "scalar_translated: bad shift");
    auto back = [shift](Vec x) {
        for (std::size_t i = 0; i < shift.size(); ++i) x[i] -= shift[i];
        return x;
    };
    ScalarField out = psi;
    out.value = [psi, back](const Vec& x) { return psi.value(back(x)); };
    out.gradient = [psi, back](const Vec& x) { return psi.gradient(back(x)); };
    out.hessian = nullptr;
    if (psi.support) {
        Box b = *psi.support;
        for (std::size_t i = 0; i < shift.size(); ++i) {
            b.lo[i] += shift[i];
            b.hi[i] += shift[i];
        }
        out.support = b;
    }
    return out;
}

inline ScalarField scalar_dilated(const ScalarField& psi, double eps) {
    require(eps > 0.0, "scalar_dilated: eps > 0 required");
    ScalarField out = psi;
    out.value = [psi, eps](const Vec& x) { return psi.value(scaled(x, 1.0 / eps)); };
    out.gradient = [psi, eps](const Vec& x) {
        return scaled(psi.gradient(scaled(x, 1.0 / eps)), 1.0 / eps);
    };
    out.hessian = nullptr;
    if (psi.support) out.support = Box(scaled(psi.support->lo, eps), scaled(psi.support->hi, eps));
    return out;
}

// --- probe helpers ----------------------------------------------------------

inline Vec random_in_box(const Box& box, std::mt19937_64& rng) {
    Vec x(box.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::uniform_real_distribution<double> dist(box.lo[i], box.hi[i]);
        x[i] = dist(rng);
    }
    return x;
}

// Largest |div| over random probes inside the support; certification battery
// for constructed divergence-free fields.
inline double max_divergence_on_probes(const VectorField& F, int probes, std::uint64_t seed) {
    require(F.support.has_value(), "max_divergence_on_probes: support box required");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        Vec x = random_in_box(*F.support, rng);
        Point p = F.basis == VectorField::Basis::Cartesian ? euclidean_point(x)
                                                           : hyperbolic_point(x);
        const double d = F.basis == VectorField::Basis::Cartesian
                             ? divergence_euclidean(F, p)
                             : divergence_hyperbolic(F, p);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

}  // namespace sobolab
