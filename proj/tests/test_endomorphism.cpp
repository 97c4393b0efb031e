#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "pluridyn/endomorphism.hpp"
#include "pluridyn/rng.hpp"

using namespace pluridyn;

TEST_CASE("power map evaluation and iteration") {
    const ProjectiveMap f = ProjectiveMap::power_map(2, 2);
    auto y = evaluate(f, HomogeneousPoint(2.0, 1.0, 1.0));
    CHECK(proj_equal(y, HomogeneousPoint(4.0, 1.0, 1.0)));

    HomogeneousPoint x(cplx(0.3, 0.1), 1.0, cplx(-0.2, 0.4));
    CHECK(proj_equal(iterate(f, x, 0), normalize(x)));

    HomogeneousPoint fixed(1.0, 1.0, 1.0);
    for (int n : {1, 3, 7})
        CHECK(proj_equal(iterate(f, fixed, n), fixed));
}

TEST_CASE("composition law f^{m+n} = f^m . f^n") {
    const ProjectiveMap f = ProjectiveMap::perturbed_power(0.05);
    RngStream rng(3, 9);
    for (int i = 0; i < 20; ++i) {
        const V3 x = random_fs_point(rng);
        const V3 a = iterate3(f, x, 5);
        const V3 b = iterate3(f, iterate3(f, x, 3), 2);
        CHECK(fs_distance3(a, b) < kEpsProj);
    }
}

TEST_CASE("map file round trip and rejection of inhomogeneous input") {
    const ProjectiveMap f = ProjectiveMap::perturbed_power(0.05);
    std::ostringstream out;
    f.write(out);
    std::istringstream in(out.str());
    const ProjectiveMap g = ProjectiveMap::parse(in);
    CHECK(g.d == f.d);
    RngStream rng(4, 0);
    for (int i = 0; i < 10; ++i) {
        const V3 x = random_fs_point(rng);
        CHECK(fs_distance3(normalize3(f.eval3(x)), normalize3(g.eval3(x))) <
              1e-14);
    }

    std::istringstream bad("pmap k=2 d=2\n0 1 0 0 1 0\n1 0 2 0 1 0\n2 0 0 2 1 0\n");
    CHECK_THROWS_AS(ProjectiveMap::parse(bad), ParseError);
}

TEST_CASE("tangent pushforward: identity, chain rule, power-map stretch") {
    const ProjectiveMap f = ProjectiveMap::power_map(2, 2);
    RngStream rng(5, 2);
    const V3 x = random_fs_point(rng);
    const V3 v = random_fs_tangent(x, rng);

    auto tp0 = tangent_pushforward(f, x, v, 0);
    CHECK(tp0.log_stretch == 0.0);
    CHECK(fs_distance3(tp0.image_point, normalize3(x)) < 1e-14);

    // chain rule within 1e-8 relative
    const ProjectiveMap g = ProjectiveMap::perturbed_power(0.05);
    for (int i = 0; i < 20; ++i) {
        const V3 p = random_fs_point(rng);
        const V3 w = random_fs_tangent(p, rng);
        const auto two = tangent_pushforward(g, p, w, 2);
        const auto one = tangent_pushforward(g, p, w, 1);
        const auto one2 =
            tangent_pushforward(g, one.image_point, one.image_tangent, 1);
        CHECK(std::abs(two.log_stretch - (one.log_stretch + one2.log_stretch)) <
              1e-8 * (1.0 + std::abs(two.log_stretch)));
    }

    // power map at [1:t:1] along the t-direction: stretch -> 2|t| * metric
    for (double t : {1e-2, 1e-3}) {
        const V3 p(1.0, t, 1.0);
        const V3 dir(0.0, 1.0, 0.0);
        const auto tp = tangent_pushforward(f, p, dir, 1);
        const double stretch = std::exp(tp.log_stretch);
        // d/dt of t^2 is 2t; FS metric factors tend to 1 as t -> 0
        CHECK(stretch / (2.0 * t) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("projective jacobian chain rule") {
    const ProjectiveMap f = ProjectiveMap::perturbed_power(0.05);
    RngStream rng(6, 1);
    for (int i = 0; i < 10; ++i) {
        const V3 x = random_fs_point(rng);
        const V3 y = iterate3(f, x, 1);
        const double j1 = jacobian_data(f, x).projective_jacobian_modulus;
        const double j2 = jacobian_data(f, y).projective_jacobian_modulus;
        // |Jac f^2|(x) from the chained Gram
        auto [e1, e2] = fs_frame(x);
        const M3 J1 = f.jacobian3(normalize3(x));
        V3 raw1 = f.eval3(normalize3(x));
        const M3 J2 = f.jacobian3(normalize3(raw1));
        const double scale1 = 1.0 / raw1.cwiseAbs().maxCoeff();
        V3 u1 = J2 * (scale1 * (J1 * e1));
        V3 u2 = J2 * (scale1 * (J1 * e2));
        V3 raw2 = f.eval3(normalize3(raw1));
        Eigen::Matrix2cd G;
        G(0, 0) = 2.0 * fs_herm(raw2, u1, u1);
        G(0, 1) = 2.0 * fs_herm(raw2, u1, u2);
        G(1, 0) = std::conj(G(0, 1));
        G(1, 1) = 2.0 * fs_herm(raw2, u2, u2);
        const double j12 = std::abs(G.determinant().real());
        CHECK(j12 == doctest::Approx(j1 * j2).epsilon(1e-8));
    }
}

TEST_CASE("validation: power map ok, degenerate map rejected") {
    const ProjectiveMap f = ProjectiveMap::power_map(2, 2);
    const auto rep = validate(f, 2000, 1);
    CHECK(rep.ok);

    // [z0^2 : z0 z1 : z0 z2] vanishes on z0 = 0
    ProjectiveMap bad;
    bad.k = 2;
    bad.d = 2;
    bad.components.resize(3);
    auto mono = [](int a, int b, int c) {
        ProjectiveMap::Monomial m;
        m.exps = {a, b, c};
        m.coeff = 1.0;
        return m;
    };
    bad.components[0] = {mono(2, 0, 0)};
    bad.components[1] = {mono(1, 1, 0)};
    bad.components[2] = {mono(1, 0, 1)};
    bad.compile();
    CHECK_THROWS_AS(validate(bad, 500, 1), DegenerateMap);

    const ProjectiveMap pert = ProjectiveMap::perturbed_power(0.05);
    CHECK(validate(pert, 2000, 1).ok);
}

TEST_CASE("preimages of the power map") {
    const ProjectiveMap f = ProjectiveMap::power_map(2, 2);
    auto fiber = preimages(f, HomogeneousPoint(1.0, 1.0, 1.0), 1);
    CHECK(fiber.size() == 4);
    int mult = 0;
    for (const auto& p : fiber) {
        mult += p.multiplicity;
        // each preimage is [s0 : s1 : 1] with s_i = +-1
        const V3 v = normalize(p.point).v3();
        CHECK(std::abs(std::abs(v(0)) - 1.0) < 1e-9);
        CHECK(std::abs(std::abs(v(1)) - 1.0) < 1e-9);
    }
    CHECK(mult == 4);
}

TEST_CASE("preimage counts are d^{kn} and map back to the target") {
    const ProjectiveMap f = ProjectiveMap::perturbed_power(0.05);
    RngStream rng(8, 3);
    const V3 a = random_fs_point(rng);
    const HomogeneousPoint ha = HomogeneousPoint::from3(a);
    for (int n = 1; n <= 3; ++n) {
        auto fiber = preimages(f, ha, n);
        long long total = 0;
        for (const auto& p : fiber) {
            total += p.multiplicity;
            CHECK(fs_distance(iterate(f, p.point, n), normalize(ha)) < 1e-8);
        }
        CHECK(total == 1LL << (2 * n));
    }
}

TEST_CASE("critical value produces multiplicity clusters") {
    const ProjectiveMap f = ProjectiveMap::power_map(2, 2);
    // a = [0:1:1] has z0^2 = 0 double roots
    auto fiber = preimages(f, HomogeneousPoint(0.0, 1.0, 1.0), 1);
    long long total = 0;
    bool has_double = false;
    for (const auto& p : fiber) {
        total += p.multiplicity;
        if (p.multiplicity >= 2) has_double = true;
    }
    CHECK(total == 4);
    CHECK(has_double);

    PreimageOptions opts;
    opts.throw_on_critical = true;
    CHECK_THROWS_AS(preimages(f, HomogeneousPoint(0.0, 1.0, 1.0), 1, opts),
                    CriticalValue);
}

TEST_CASE("preimage ordering is deterministic") {
    const ProjectiveMap f = ProjectiveMap::perturbed_power(0.05);
    RngStream rng(9, 4);
    const HomogeneousPoint a = HomogeneousPoint::from3(random_fs_point(rng));
    auto f1 = preimages(f, a, 2);
    auto f2 = preimages(f, a, 2);
    REQUIRE(f1.size() == f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i)
        CHECK((f1[i].point.coords - f2[i].point.coords).norm() == 0.0);
}
