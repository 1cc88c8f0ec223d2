#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sobolab/fields.hpp"
#include "sobolab/functionals.hpp"

using namespace sobolab;

namespace {

VectorField zero_like(const VectorField& F) {
    VectorField z = F;
    z.components = [n = F.dim](const Vec&) { return zeros(n); };
    z.jacobian = [n = F.dim](const Vec&) { return zero_matrix(n, n); };
    return z;
}

double sup_on_support(const VectorField& F, int steps = 60) {
    double best = 0.0;
    const Box& b = *F.support;
    Vec x(b.lo.size());
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
            x[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * i / steps;
            x[1] = b.lo[1] + (b.hi[1] - b.lo[1]) * j / steps;
            best = std::max(best, norm(F.components(x)));
        }
    return best;
}

}  // namespace

TEST_CASE("pairing of pointwise-orthogonal fields vanishes") {
    ScalarField psi = poly_bump({0.0, 0.0}, 1.0, 1.2);
    VectorField f = make_divfree_euclidean(psi);   // grad-perp of psi
    VectorField phi = gradient_field(psi, 2);      // grad of psi
    CHECK(pairing(f, phi, euclidean_space(2)) == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("pairing against itself gives the closed-form Gaussian L2 norm") {
    const double A = 1.3, w = 0.8;
    ScalarField g = gaussian_bump({0.0, 0.0}, w, A);
    ScalarField zero;
    zero.value = [](const Vec&) { return 0.0; };
    zero.gradient = [](const Vec& x) { return zeros(static_cast<int>(x.size())); };
    zero.support = g.support;
    VectorField phi = vector_from_components({g, zero}, VectorField::Basis::Cartesian);
    const double got = pairing(phi, phi, euclidean_space(2));
    // int A^2 exp(-2|x|^2/w^2) dx = A^2 pi w^2 / 2
    CHECK(got == Catch::Approx(A * A * pi * w * w / 2.0).epsilon(1e-10));
}

TEST_CASE("hyperbolic pairing of lifted fields equals the Euclidean oracle") {
    for (int n : {2, 3}) {
        Vec c = zeros(n);
        c.back() = 2.0;
        VectorField F = poly_curl_field(c, 0.8, 1.0);
        Vec c2 = c;
        c2[0] += 0.2;
        VectorField Phi = poly_curl_field(c2, 0.7, 1.5);
        VectorField f = make_divfree_hyperbolic(F);
        VectorField phi = make_divfree_hyperbolic(Phi);
        const double got = pairing(f, phi, hyperbolic_space(n));
        // frame pairing x_n^{2(n-1)} <F,Phi> against dV_g collapses to
        // <F,Phi> x_n^{n-2} dx
        auto cap = box_intersection(*F.support, *Phi.support);
        REQUIRE(cap.has_value());
        QuadratureRule rule = volume_rule(full_space_domain(n), *cap, 1e-9);
        const double oracle = rule.integrate([&](const Vec& x) {
            return dot(F.components(x), Phi.components(x)) * std::pow(x.back(), n - 2.0);
        });
        CHECK(got == Catch::Approx(oracle).margin(1e-8 * (std::abs(oracle) + 1.0)));
    }
}

TEST_CASE("unbounded support is refused") {
    VectorField raw;
    raw.dim = 2;
    raw.basis = VectorField::Basis::Cartesian;
    raw.components = [](const Vec& x) { return x; };
    raw.jacobian = [](const Vec&) { return Mat{{1.0, 0.0}, {0.0, 1.0}}; };
    CHECK_THROWS(pairing(raw, raw, euclidean_space(2)));
    CHECK_THROWS(l1_norm(raw, euclidean_space(2)));
}

TEST_CASE("zero field has zero norms") {
    VectorField z = zero_like(rotational_field({0.0, 0.0}, 1.0));
    CHECK(l1_norm(z, euclidean_space(2)).value == 0.0);
    CHECK(ln_gradient_norm(z, euclidean_space(2)).value == 0.0);
    CHECK(w1n_sphere_norm(z).value == 0.0);
}

TEST_CASE("L1 norm is invariant under the mass-preserving dilation") {
    VectorField f = rotational_field({0.1, 0.2}, 0.9, 1.1);
    const double base = l1_norm(f, euclidean_space(2)).value;
    for (double eps : {0.5, 2.0}) {
        VectorField feps = dilated(f, eps, 2.0);
        CHECK(l1_norm(feps, euclidean_space(2)).value == Catch::Approx(base).epsilon(1e-8));
    }
}

TEST_CASE("surface gradient of the normal component of a constant field") {
    // phi = (a, 0): <phi, nu> = a cos(theta) on the circle, so the tangential
    // gradient norm is |a sin(theta)|.
    const double a = 1.7;
    VectorField phi;
    phi.dim = 2;
    phi.basis = VectorField::Basis::Cartesian;
    phi.components = [a](const Vec&) { return Vec{a, 0.0}; };
    phi.jacobian = [](const Vec&) { return zero_matrix(2, 2); };
    ScalarField nc = normal_component_on_sphere(phi);
    for (double theta : {0.3, 1.1, 2.0, 4.4}) {
        Vec x{std::cos(theta), std::sin(theta)};
        CHECK(norm(sphere_tangential_gradient(nc, x)) ==
              Catch::Approx(a * std::abs(std::sin(theta))).margin(1e-10));
    }
    // L^2 norm over the circle against the 1-D oracle
    QuadratureRule sph = sphere_rule(2, 1e-10);
    const double got = std::sqrt(sph.integrate(
        [&](const Vec& x) { return norm2(sphere_tangential_gradient(nc, x)); }));
    const double oracle = std::sqrt(adaptive_integrate(
        [&](double t) { return a * a * std::sin(t) * std::sin(t); }, 0.0, 2.0 * pi, 1e-12));
    CHECK(got == Catch::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("unit sphere flux of the radial direction field is the circle length") {
    VectorField radial;
    radial.dim = 2;
    radial.basis = VectorField::Basis::Cartesian;
    radial.components = [](const Vec& x) { return scaled(x, 1.0 / norm(x)); };
    radial.jacobian = [](const Vec& x) {
        const double r = norm(x);
        Mat j = zero_matrix(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                    ((i == k ? 1.0 : 0.0) - x[static_cast<std::size_t>(i)] *
                                                x[static_cast<std::size_t>(k)] / (r * r)) /
                    r;
        return j;
    };
    CHECK(unit_sphere_flux(radial, radial) == Catch::Approx(2.0 * pi).epsilon(1e-12));
}

TEST_CASE("boundary_flux vanishes for tangential fields") {
    ScalarField b = chart_poly_bump({0.0, 1.0}, 0.6);
    ScalarField z;
    z.value = [](const Vec&) { return 0.0; };
    z.gradient = [](const Vec& x) { return zeros(static_cast<int>(x.size())); };
    z.support = b.support;
    VectorField tangential = vector_from_components({z, b}, VectorField::Basis::HyperbolicFrame);
    VectorField phi = vector_from_components({b, b}, VectorField::Basis::HyperbolicFrame);
    Hypersurface S = vertical_plane(2, 0, 0.0);
    CHECK(boundary_flux(tangential, phi, S) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("hemisphere flux of lifted fields against the parametrized oracle") {
    VectorField F = poly_curl_field({0.0, 1.0}, 0.9, 1.0);
    VectorField Phi = poly_curl_field({0.2, 0.9}, 0.8, 2.0);
    VectorField f = make_divfree_hyperbolic(F);
    VectorField phi = make_divfree_hyperbolic(Phi);
    Hypersurface hemi = hemisphere({0.0}, 1.0);
    const double got = boundary_flux(f, phi, hemi, 1e-9);
    // theta-parametrization: x = (sin t, cos t), nu frame components (sin t, cos t),
    // dV'_g = dt / cos t
    const double oracle = adaptive_integrate(
        [&](double t) {
            Vec x{std::sin(t), std::cos(t)};
            Vec nu{std::sin(t), std::cos(t)};
            return dot(f.components(x), nu) * dot(phi.components(x), nu) / std::cos(t);
        },
        -0.5 * pi + 1e-9, 0.5 * pi - 1e-9, 1e-11);
    CHECK(got == Catch::Approx(oracle).margin(1e-7 * (std::abs(oracle) + 1.0)));
}

TEST_CASE("Euclidean integration by parts across the unit sphere") {
    // psi supported strictly inside the ball: both sides vanish
    VectorField f = rotational_field({0.9, 0.0}, 0.5, 1.0);
    ScalarField inner = poly_bump({0.0, 0.0}, 0.45);
    CHECK(verify_parts_euclidean(f, inner) == Catch::Approx(0.0).margin(1e-14));

    // rotational f and radial psi about the origin: flux integrand vanishes
    VectorField rot = rotational_field({0.0, 0.0}, 0.8, 1.0);
    ScalarField radial = gaussian_bump({0.0, 0.0}, 1.1, 0.7);
    CHECK(verify_parts_euclidean(rot, radial) < 1e-10);

    // generic bump pairs in n = 2 and n = 3
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6), r(0.6, 1.2);
    for (int trial = 0; trial < 10; ++trial) {
        VectorField g = rotational_field({u(rng), u(rng)}, r(rng), 1.0);
        ScalarField psi = poly_bump({u(rng), u(rng)}, r(rng) + 0.4, 0.9);
        CHECK(verify_parts_euclidean(g, psi) < 1e-6);
    }
    for (int trial = 0; trial < 6; ++trial) {
        VectorField g = poly_curl_field({u(rng), u(rng), u(rng)}, r(rng) + 0.3, 1.0);
        ScalarField psi = poly_bump({u(rng), u(rng), u(rng)}, r(rng) + 0.4, 1.1);
        CHECK(verify_parts_euclidean(g, psi) < 1e-6);
    }
}

TEST_CASE("hyperbolic integration by parts across the vertical plane") {
    // product support away from S: both sides vanish
    VectorField f_away = make_divfree_hyperbolic(poly_curl_field({2.0, 1.0}, 0.5));
    ScalarField psi_away = chart_poly_bump({2.0, 1.0}, 0.4);
    CHECK(verify_parts_hyperbolic(f_away, psi_away) < 1e-10);

    // f with vanishing normal component: surface side is identically zero and
    // the volume side cancels by the divergence theorem.
    // For n = 2, f = (0, s(x_1) x_n) in frame components is divergence-free:
    // div_g f = x_n d_n(s x_n)/... = s x_n - s x_n = 0.
    ScalarField b = chart_poly_bump({0.0, 1.0}, 0.7);
    ScalarField s1 = poly_bump({0.0}, 1.0, 1.0);
    VectorField tang;
    tang.dim = 2;
    tang.basis = VectorField::Basis::HyperbolicFrame;
    tang.divergence_free = true;
    tang.support = Box({-1.0, 0.3}, {1.0, 3.0});
    tang.components = [s1](const Vec& x) { return Vec{0.0, s1.value({x[0]}) * x[1]}; };
    tang.jacobian = [s1](const Vec& x) {
        return Mat{{0.0, 0.0}, {s1.gradient({x[0]})[0] * x[1], s1.value({x[0]})}};
    };
    CHECK(max_divergence_on_probes(tang, 100, 9) < 1e-12);
    CHECK(verify_parts_hyperbolic(tang, b) < 1e-8);

    // generic pairs in n = 2 and n = 3
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.4, 0.4), r(0.3, 0.6);
    for (int trial = 0; trial < 10; ++trial) {
        VectorField g =
            make_divfree_hyperbolic(poly_curl_field({u(rng), 1.2 + u(rng)}, r(rng), 1.0));
        ScalarField psi = chart_poly_bump({u(rng), 1.2 + u(rng)}, r(rng) + 0.2);
        CHECK(verify_parts_hyperbolic(g, psi) < 1e-6);
    }
    for (int trial = 0; trial < 4; ++trial) {
        VectorField g = make_divfree_hyperbolic(
            poly_curl_field({u(rng), u(rng), 1.2 + u(rng)}, r(rng), 1.0));
        ScalarField psi = chart_poly_bump({u(rng), u(rng), 1.2 + u(rng)}, r(rng) + 0.2);
        CHECK(verify_parts_hyperbolic(g, psi) < 1e-6);
    }
}

TEST_CASE("Hoelder consistency: |pairing| <= ||f||_1 sup|phi|") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.5, 0.5), r(0.4, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        VectorField f = rotational_field({u(rng), u(rng)}, r(rng), 1.0 + u(rng));
        VectorField phi = tube_field({u(rng), u(rng)}, {r(rng) + 1.0, r(rng)}, 1.0);
        const double lhs = std::abs(pairing(f, phi, euclidean_space(2)));
        const double rhs = l1_norm(f, euclidean_space(2)).value * sup_on_support(phi);
        CHECK(lhs <= rhs * (1.0 + 1e-8) + 1e-12);
    }
}

TEST_CASE("boundary_flux is invariant under chart isometries") {
    VectorField f = make_divfree_hyperbolic(poly_curl_field({0.3, 1.2}, 0.7, 1.0));
    VectorField phi = make_divfree_hyperbolic(poly_curl_field({-0.1, 1.0}, 0.8, 1.4));
    Hypersurface S = vertical_plane(2, 0, 0.0);
    const double base = boundary_flux(f, phi, S, 1e-9);

    const Vec shift{0.8};
    const double translated = boundary_flux(frame_field_translated(f, shift),
                                            frame_field_translated(phi, shift),
                                            translate_horizontal(S, shift), 1e-9);
    CHECK(translated == Catch::Approx(base).margin(1e-8 * (std::abs(base) + 1.0)));

    const double eps = 1.7;
    const double dilated_flux = boundary_flux(frame_field_dilated(f, eps),
                                              frame_field_dilated(phi, eps), dilate(S, eps), 1e-9);
    CHECK(dilated_flux == Catch::Approx(base).margin(1e-8 * (std::abs(base) + 1.0)));

    // hemisphere member of the family: translations leave the flux unchanged;
    // dilations rescale it by 1/eps because dV'_g carries the 1/r factor.
    Hypersurface hemi = hemisphere({0.1}, 1.3);
    const double hbase = boundary_flux(f, phi, hemi, 1e-9);
    const double htrans = boundary_flux(frame_field_translated(f, shift),
                                        frame_field_translated(phi, shift),
                                        translate_horizontal(hemi, shift), 1e-9);
    CHECK(htrans == Catch::Approx(hbase).margin(1e-8 * (std::abs(hbase) + 1.0)));
    const double hdil = boundary_flux(frame_field_dilated(f, eps), frame_field_dilated(phi, eps),
                                      dilate(hemi, eps), 1e-9);
    CHECK(hdil == Catch::Approx(hbase / eps).margin(1e-8 * (std::abs(hbase) + 1.0)));
}

TEST_CASE("w1n surface norm on the plane accepts only frame fields") {
    VectorField f = rotational_field({0.0, 0.0}, 1.0);
    CHECK_THROWS(w1n_surface_norm(f, vertical_plane(2, 0, 0.0)));
    VectorField lifted = make_divfree_hyperbolic(poly_curl_field({0.0, 1.5}, 0.5));
    const double v = w1n_surface_norm(lifted, vertical_plane(2, 0, 0.0)).value;
    CHECK(v > 0.0);
    CHECK(std::isfinite(v));
}
