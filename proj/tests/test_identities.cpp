#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sobolab/identities.hpp"

using namespace sobolab;

namespace {

// Finite-difference Gram determinant of the map z -> (x-(z,0))/|x-(z,0)|,
// the independent oracle for phi_jacobian.
double fd_gram_jacobian(const Point& x, const Vec& z) {
    const int m = static_cast<int>(z.size());
    const double h = 1e-6;
    Mat cols;
    for (int j = 0; j < m; ++j) {
        Vec zp = z, zm = z;
        zp[static_cast<std::size_t>(j)] += h;
        zm[static_cast<std::size_t>(j)] -= h;
        cols.push_back(scaled(sub(phi_map(x, zp), phi_map(x, zm)), 1.0 / (2.0 * h)));
    }
    Mat gram = zero_matrix(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            gram[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                dot(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    double det = 0.0;
    if (m == 1)
        det = gram[0][0];
    else
        det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
    return std::sqrt(std::max(0.0, det));
}

}  // namespace

TEST_CASE("averaging constant values and reconstruction of the dot product") {
    CHECK(averaging_constant(2).c == Catch::Approx(1.0 / pi).epsilon(1e-14));
    CHECK(averaging_constant(3).c == Catch::Approx(3.0 / (4.0 * pi)).epsilon(1e-14));
    CHECK_THROWS(averaging_constant(1));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n : {2, 3}) {
        QuadratureRule sph = sphere_rule(n, 1e-10);
        const double c = averaging_constant(n).c;
        for (int trial = 0; trial < 25; ++trial) {
            Vec a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                a[static_cast<std::size_t>(i)] = u(rng);
                b[static_cast<std::size_t>(i)] = u(rng);
            }
            const double got =
                c * sph.integrate([&](const Vec& w) { return dot(a, w) * dot(b, w); });
            CHECK(got == Catch::Approx(dot(a, b)).margin(1e-10));
        }
    }
}

TEST_CASE("phi_map examples") {
    Point x = hyperbolic_point({0.0, 1.0});
    Vec w0 = phi_map(x, {0.0});
    CHECK(w0[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(w0[1] == Catch::Approx(1.0));

    Vec w1 = phi_map(x, {1.0});
    CHECK(w1[0] == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(w1[1] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0), h(0.2, 4.0);
    for (int trial = 0; trial < 30; ++trial) {
        Point p = hyperbolic_point({u(rng), u(rng), h(rng)});
        Vec w = phi_map(p, {u(rng), u(rng)});
        CHECK(norm(w) == Catch::Approx(1.0).epsilon(1e-13));
        CHECK(w.back() > 0.0);
    }
}

TEST_CASE("phi_jacobian formula and finite-difference Gram oracle") {
    Point x = hyperbolic_point({0.0, 1.0});
    CHECK(phi_jacobian(x, {0.0}) == Catch::Approx(1.0));
    CHECK(phi_jacobian(x, {1.0}) == Catch::Approx(0.5).epsilon(1e-14));

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0), h(0.3, 3.0);
    for (int n : {2, 3}) {
        for (int trial = 0; trial < 100; ++trial) {
            Vec c(static_cast<std::size_t>(n));
            for (int i = 0; i + 1 < n; ++i) c[static_cast<std::size_t>(i)] = u(rng);
            c.back() = h(rng);
            Point p = hyperbolic_point(c);
            Vec z(static_cast<std::size_t>(n - 1));
            for (int i = 0; i + 1 < n; ++i) z[static_cast<std::size_t>(i)] = u(rng);
            const double formula = phi_jacobian(p, z);
            const double oracle = fd_gram_jacobian(p, z);
            CHECK(formula == Catch::Approx(oracle).epsilon(1e-6));
            CHECK(formula > 0.0);
        }
    }
}

TEST_CASE("hemisphere_from: examples, round trip, and normal consistency") {
    Point x = hyperbolic_point({0.0, 1.0});
    Hypersurface s = hemisphere_from(x, {0.0, 1.0});
    CHECK(s.center[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(s.radius == Catch::Approx(1.0));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0), h(0.3, 3.0), wn(0.05, 1.0);
    for (int n : {2, 3}) {
        for (int trial = 0; trial < 30; ++trial) {
            Vec c(static_cast<std::size_t>(n));
            for (int i = 0; i + 1 < n; ++i) c[static_cast<std::size_t>(i)] = u(rng);
            c.back() = h(rng);
            Point p = hyperbolic_point(c);
            Vec w(static_cast<std::size_t>(n));
            for (int i = 0; i + 1 < n; ++i) w[static_cast<std::size_t>(i)] = u(rng);
            w.back() = wn(rng);
            w = scaled(w, 1.0 / norm(w));

            Hypersurface hemi = hemisphere_from(p, w);
            CHECK(on_surface(p, hemi, 1e-12));
            // round trip through the center
            Vec w_back = phi_map(p, hemi.center);
            CHECK(norm(sub(w_back, w)) == Catch::Approx(0.0).margin(1e-12));
            // the g-unit normal at x is exactly omega in frame components
            Vec nu = unit_normal(p, hemi).components;
            CHECK(norm(sub(nu, w)) == Catch::Approx(0.0).margin(1e-12));
        }
    }
    CHECK_THROWS(hemisphere_from(x, {1.0, 0.0}));   // omega_n = 0
    CHECK_THROWS(hemisphere_from(x, {0.0, -1.0}));  // downward
}

TEST_CASE("coarea_weight: value, x-independence, dilation") {
    // n = 2: arctangent oracle gives exactly pi
    Point base = hyperbolic_point({0.0, 1.0});
    CHECK(coarea_weight(base, 2) == Catch::Approx(pi).epsilon(1e-8));

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-2.0, 2.0), h(0.4, 2.5);
    const double ref2 = coarea_weight(base, 2);
    for (int trial = 0; trial < 10; ++trial) {
        Point p = hyperbolic_point({u(rng), h(rng)});
        CHECK(coarea_weight(p, 2) == Catch::Approx(ref2).epsilon(1e-8));
    }
    Point doubled = hyperbolic_point({0.6, 2.6});
    CHECK(coarea_weight(doubled, 2) ==
          Catch::Approx(coarea_weight(hyperbolic_point({0.3, 1.3}), 2)).epsilon(1e-8));

    // n = 3: x-independent and equal to 2 pi
    const double ref3 = coarea_weight(hyperbolic_point({0.0, 0.0, 1.0}), 3);
    CHECK(ref3 == Catch::Approx(2.0 * pi).epsilon(1e-7));
    for (int trial = 0; trial < 3; ++trial) {
        Point p = hyperbolic_point({u(rng), u(rng), h(rng)});
        CHECK(coarea_weight(p, 3) == Catch::Approx(ref3).epsilon(1e-7));
    }
}

TEST_CASE("verify_coarea on a reference chart bump") {
    ScalarField zero;
    zero.value = [](const Vec&) { return 0.0; };
    zero.gradient = [](const Vec&) { return Vec{0.0, 0.0}; };
    zero.support = Box({-0.5, 0.5}, {0.5, 1.5});
    CoareaReport z = verify_coarea(zero, 2);
    CHECK(z.lhs == Catch::Approx(0.0).margin(1e-14));
    CHECK(z.rhs == Catch::Approx(0.0).margin(1e-14));

    ScalarField bump = chart_poly_bump({0.2, 1.0}, 0.8, 1.0);
    CoareaReport r = verify_coarea(bump, 2);
    CHECK(r.constant == Catch::Approx(pi).epsilon(1e-8));
    CHECK(r.residual < 1e-4);

    // LHS is invariant under horizontal translations of the density
    ScalarField shifted = scalar_translated(bump, {0.9}, 2);
    CoareaReport rs = verify_coarea(shifted, 2);
    CHECK(rs.lhs == Catch::Approx(r.lhs).epsilon(1e-6));

    CHECK_THROWS(verify_coarea(zero, 3));
    ScalarField unbounded;
    unbounded.value = [](const Vec&) { return 1.0; };
    unbounded.gradient = [](const Vec&) { return Vec{0.0, 0.0}; };
    CHECK_THROWS(verify_coarea(unbounded, 2));
}

TEST_CASE("averaging pipeline reproduces the direct pairing (Euclidean)") {
    for (int n : {2, 3}) {
        Vec c1 = zeros(n), c2 = zeros(n);
        c2[0] = 0.3;
        VectorField f = poly_curl_field(c1, 1.0, 1.0);
        VectorField phi = poly_curl_field(c2, 0.8, 1.5);
        const double direct = pairing(f, phi, euclidean_space(n));
        const double averaged = averaged_pairing_euclidean(f, phi, 1e-7);
        CHECK(averaged == Catch::Approx(direct).margin(1e-6 * (std::abs(direct) + 1.0)));
    }
}

TEST_CASE("averaging pipeline reproduces the direct pairing (hyperbolic)") {
    for (int n : {2, 3}) {
        Vec c1 = zeros(n), c2 = zeros(n);
        c1.back() = 1.0;
        c2.back() = 1.1;
        c2[0] = 0.2;
        VectorField f = make_divfree_hyperbolic(poly_curl_field(c1, 0.7, 1.0));
        VectorField phi = make_divfree_hyperbolic(poly_curl_field(c2, 0.6, 1.2));
        const double direct = pairing(f, phi, hyperbolic_space(n));
        const double averaged = averaged_pairing_hyperbolic(f, phi, 1e-7);
        CHECK(averaged == Catch::Approx(direct).margin(1e-4 * (std::abs(direct) + 1.0)));
    }
}

TEST_CASE("phi_jacobian change of variables against the direction rule") {
    // int_{S_+} h(w) dsigma = int_{R^{n-1}} h(Phi_x(z)) Jac Phi_x(z) dz
    Point x = hyperbolic_point({0.4, 1.3});
    auto h = [](const Vec& w) { return w[1] * w[1] * (1.0 + 0.5 * w[0]); };
    QuadratureRule dirs = upper_direction_rule(2, 1e-9);
    const double lhs = dirs.integrate(h);
    const double cut = 0.5 * pi - 1e-9;
    const double rhs = adaptive_integrate_rel(
        [&](double t) {
            const double z = std::tan(t);
            const double jac_t = 1.0 + z * z;
            return h(phi_map(x, {z})) * phi_jacobian(x, {z}) * jac_t;
        },
        -cut, cut, 1e-9);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-6));
}
