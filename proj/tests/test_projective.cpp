#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pluridyn/projective.hpp"
#include "pluridyn/rng.hpp"

using namespace pluridyn;

TEST_CASE("normalize scales to sup-norm one") {
    HomogeneousPoint p(2.0, 0.0, 0.0);
    auto q = normalize(p);
    CHECK(q.coords(0) == cplx(1.0, 0.0));
    CHECK(q.coords(1) == cplx(0.0, 0.0));

    HomogeneousPoint r(cplx(1, 1), cplx(1, -1), 0.0);
    auto s = normalize(r);
    double supn = 0.0;
    for (int i = 0; i < 3; ++i) supn = std::max(supn, std::abs(s.coords(i)));
    CHECK(supn == doctest::Approx(1.0).epsilon(1e-15));
    // projective ratio preserved
    CHECK(std::abs(s.coords(1) / s.coords(0) - r.coords(1) / r.coords(0)) <
          1e-15);

    CHECK_THROWS_AS(normalize(HomogeneousPoint(0.0, 0.0, 0.0)), ZeroVector);
}

TEST_CASE("fs_distance basics") {
    HomogeneousPoint x(1.0, 0.0, 0.0), y(0.0, 1.0, 0.0);
    CHECK(fs_distance(x, x) == 0.0);
    CHECK(fs_distance(x, y) == doctest::Approx(M_PI / 2));
    // small-separation first order: distance([1:0:0],[1:t:0]) ~ |t|
    for (double t : {1e-3, 1e-5, 1e-7}) {
        HomogeneousPoint z(1.0, t, 0.0);
        CHECK(std::abs(fs_distance(x, z) - t) < t * t);
    }
    // symmetry
    RngStream rng(2, 0);
    for (int i = 0; i < 50; ++i) {
        const V3 a = random_fs_point(rng), b = random_fs_point(rng);
        CHECK(fs_distance3(a, b) == doctest::Approx(fs_distance3(b, a)));
    }
}

TEST_CASE("fs_distance triangle inequality on 1000 random triples") {
    RngStream rng(7, 1);
    for (int i = 0; i < 1000; ++i) {
        const V3 a = random_fs_point(rng);
        const V3 b = random_fs_point(rng);
        const V3 c = random_fs_point(rng);
        const double ab = fs_distance3(a, b);
        const double bc = fs_distance3(b, c);
        const double ac = fs_distance3(a, c);
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("linear subspace invariants") {
    RngStream rng(3, 0);
    const V3 a = random_fs_point(rng), b = random_fs_point(rng);
    LinearSubspace L = line_through(a, b);
    CHECK(L.dimension == 1);
    CHECK(L.kernel_forms.rows() == 1); // k - dim = 1
    // basis vectors annihilated by all kernel forms
    CHECK((L.kernel_forms * L.basis).norm() < 1e-12);
    CHECK(L.contains(HomogeneousPoint::from3(a)));
    CHECK(L.contains(HomogeneousPoint::from3(b)));

    LinearSubspace P = point_subspace(V3(0, 0, 1));
    CHECK(P.dimension == 0);
    CHECK(P.kernel_forms.rows() == 2);
}

TEST_CASE("center projection: standard pair") {
    CenterProjection cp = standard_center_projection();

    // [3:4:5] -> [3:4:0]
    auto p = cp.project(HomogeneousPoint(3.0, 4.0, 5.0));
    CHECK(proj_equal(p, HomogeneousPoint(3.0, 4.0, 0.0)));

    // x in L is fixed
    HomogeneousPoint xl(1.0, cplx(0.3, 0.2), 0.0);
    CHECK(proj_equal(cp.project(xl), xl));

    // the center throws
    CHECK_THROWS_AS(cp.project(HomogeneousPoint(0.0, 0.0, 1.0)), PointInCenter);
}

TEST_CASE("fiber scaling A_theta") {
    CenterProjection cp = standard_center_projection();
    HomogeneousPoint x(1.0, 1.0, 2.0);

    // A_1 = id
    CHECK(proj_equal(cp.fiber_scale(1.0, x), normalize(x)));
    // A_0 = pi
    CHECK(proj_equal(cp.fiber_scale(0.0, x), cp.project(x)));
    // closed form for this (I, L): [1:1:2] -> [1:1:1] at theta = 1/2
    CHECK(proj_equal(cp.fiber_scale(0.5, x), HomogeneousPoint(1.0, 1.0, 1.0)));

    // semigroup property and fiber preservation on random samples
    RngStream rng(11, 0);
    for (int i = 0; i < 100; ++i) {
        const V3 v = random_fs_point(rng);
        if (std::abs(v(0)) < 0.05 && std::abs(v(1)) < 0.05) continue;
        HomogeneousPoint hp = HomogeneousPoint::from3(v);
        const cplx t1(0.3 + rng.next_double(), rng.next_signed() * 0.2);
        const cplx t2(0.3 + rng.next_double(), rng.next_signed() * 0.2);
        auto lhs = cp.fiber_scale(t1, cp.fiber_scale(t2, hp));
        auto rhs = cp.fiber_scale(t1 * t2, hp);
        CHECK(fs_distance(lhs, rhs) < kEpsProj);
        CHECK(fs_distance(cp.project(cp.fiber_scale(t1, hp)), cp.project(hp)) <
              kEpsProj);
    }
}

TEST_CASE("fs frames are orthonormal") {
    RngStream rng(5, 0);
    for (int i = 0; i < 20; ++i) {
        const V3 x = random_fs_point(rng);
        auto [e1, e2] = fs_frame(x);
        CHECK(std::abs(2.0 * fs_herm(x, e1, e1) - 1.0) < 1e-10);
        CHECK(std::abs(2.0 * fs_herm(x, e2, e2) - 1.0) < 1e-10);
        CHECK(std::abs(fs_herm(x, e1, e2)) < 1e-10);
    }
}
