#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "openmap/map_core.hpp"

using namespace openmap;

namespace {
const double kSqrt5 = std::sqrt(5.0);
}

TEST_CASE("eval: full quadratic basics") {
    UnimodalMap m(4.0, 2.0);
    CHECK(eval(m, 0.5, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval(m, 0.5, 2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(eval(m, 0.3, 1) == doctest::Approx(0.84).epsilon(1e-14));
    CHECK(eval(m, 0.3, 0) == 0.3);
    CHECK_THROWS_AS(eval(m, -0.1, 1), Error);
    CHECK_THROWS_AS(eval(m, 1.1, 1), Error);
}

TEST_CASE("deriv: closed-form chain rule") {
    UnimodalMap m(4.0, 2.0);
    CHECK(deriv(m, 0.0, 1) == doctest::Approx(4.0));
    CHECK(deriv(m, 0.75, 1) == doctest::Approx(-2.0));
    // exact period-2 orbit (5 +- sqrt5)/8 has Df^2 = -4
    double x = (5.0 - kSqrt5) / 8.0;
    CHECK(deriv(m, x, 2) == doctest::Approx(-4.0).epsilon(1e-12));
    // orbit through c gives 0
    CHECK(deriv(m, 0.5, 3) == 0.0);
}

TEST_CASE("deriv matches central finite differences away from c") {
    UnimodalMap m(4.0, 2.0);
    // deterministic pseudo-random xs whose orbits stay away from c
    int checked = 0;
    for (int i = 1; i <= 300 && checked < 100; ++i) {
        double x = std::fmod(0.61803398874989485 * i, 1.0);
        int n = 1 + i % 5;
        bool clear = true;
        double y = x;
        for (int k = 0; k < n; ++k) {
            if (std::fabs(y - 0.5) < 1e-3) clear = false;
            y = m(y);
        }
        if (!clear) continue;
        double hstep = 1e-7;
        if (x < hstep || x > 1 - hstep) continue;
        double fd = (eval(m, x + hstep, n) - eval(m, x - hstep, n)) / (2 * hstep);
        double an = deriv(m, x, n);
        if (std::fabs(an) < 1e-6) continue;
        CHECK(std::fabs(fd - an) / std::fabs(an) < 1e-5);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("critical_orbit: full quadratic has k0=2, p=1, lambda=4") {
    UnimodalMap m(4.0, 2.0);
    CriticalOrbitData od = critical_orbit(m);
    CHECK(od.k0 == 2);
    CHECK(od.p == 1);
    CHECK(od.lambda_tail == doctest::Approx(4.0));
    CHECK(od.point(1) == doctest::Approx(1.0));
    CHECK(od.point(2) == doctest::Approx(0.0));
}

TEST_CASE("critical_orbit: attracting cycle is rejected") {
    UnimodalMap m(3.5, 2.0);
    CHECK_THROWS_AS(critical_orbit(m), Error);
    try {
        critical_orbit(m);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotEventuallyPeriodic);
    }
}

TEST_CASE("find_mt_parameter: A=4 from (k0,p)=(2,1)") {
    UnimodalMap m = find_mt_parameter(2.0, 2, 1, Interval{3.9, 4.0});
    CHECK(m.A() == doctest::Approx(4.0).epsilon(1e-13));
    CriticalOrbitData od = critical_orbit(m);
    CHECK(od.k0 == 2);
    CHECK(od.p == 1);
}

TEST_CASE("find_mt_parameter: second map near 3.93344") {
    UnimodalMap m = find_mt_parameter(2.0, 3, 5, Interval{3.92, 3.94});
    CHECK(m.A() == doctest::Approx(3.9334240747966645).epsilon(1e-10));
    // residual of the defining equation at the returned parameter
    double g = eval(m, m.c(), 8) - eval(m, m.c(), 3);
    CHECK(std::fabs(g) < 1e-13);
    CriticalOrbitData od = critical_orbit(m);
    CHECK(od.k0 == 3);
    CHECK(od.p == 5);
    CHECK(od.lambda_tail > 1.0);
}

TEST_CASE("find_mt_parameter: no root in a bad bracket") {
    CHECK_THROWS_AS(find_mt_parameter(2.0, 2, 1, Interval{2.0, 2.5}), Error);
    try {
        find_mt_parameter(2.0, 2, 1, Interval{2.0, 2.5});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoRoot);
    }
}

TEST_CASE("find_periodic_points: fixed points of the full quadratic") {
    UnimodalMap m(4.0, 2.0);
    auto pts = find_periodic_points(m, 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(pts[0].multiplier == doctest::Approx(4.0));
    CHECK(pts[1].x == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(pts[1].multiplier == doctest::Approx(2.0));
    for (auto& p : pts) CHECK(p.multiplier > 1.0);
}

TEST_CASE("find_periodic_points: period-2 orbit appears at n=2") {
    UnimodalMap m(4.0, 2.0);
    auto pts = find_periodic_points(m, 2);
    REQUIRE(pts.size() == 4);
    int n_period2 = 0;
    for (auto& p : pts) {
        CHECK(std::fabs(eval(m, p.x, 2) - p.x) < 1e-9);
        CHECK(p.multiplier > 1.0);
        if (p.period == 2) {
            ++n_period2;
            CHECK(p.multiplier == doctest::Approx(4.0).epsilon(1e-9));
            bool lo = std::fabs(p.x - (5.0 - kSqrt5) / 8.0) < 1e-10;
            bool hi = std::fabs(p.x - (5.0 + kSqrt5) / 8.0) < 1e-10;
            CHECK((lo || hi));
        }
    }
    CHECK(n_period2 == 2);
}

TEST_CASE("find_mt_parameter then critical_orbit round-trips the combinatorics") {
    for (auto [k0, p, lo, hi] : {std::tuple{2, 1, 3.9, 4.0}, std::tuple{3, 5, 3.92, 3.94}}) {
        UnimodalMap m = find_mt_parameter(2.0, k0, p, Interval{lo, hi});
        CriticalOrbitData od = critical_orbit(m);
        CHECK(od.k0 == k0);
        CHECK(od.p == p);
    }
}

TEST_CASE("local scaling at the critical point (quadratic fold)") {
    // |x-c| ~ (|f^2(x)-z| / (A |Df(f(c))|))^{1/2} for A=4, z=0
    UnimodalMap m(4.0, 2.0);
    double denom = 4.0 * std::fabs(deriv(m, m(0.5), 1));  // A |Df(f(c))| = 16
    for (double d : {1e-5, 3e-5, 1e-4}) {
        double x = 0.5 + d;
        double lhs = std::fabs(x - 0.5);
        double rhs = std::pow(std::fabs(eval(m, x, 2) - 0.0) / denom, 0.5);
        CHECK(lhs / rhs == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("classify_point covers the trichotomy") {
    UnimodalMap m(4.0, 2.0);
    CriticalOrbitData od = critical_orbit(m);

    PointClass a = classify_point(m, od, 0.0);
    CHECK(a.tri_case == TrichotomyCase::periodic_in_orbit);
    CHECK(a.multiplier == doctest::Approx(4.0));
    CHECK(a.predicted_ratio(2.0) == doctest::Approx(0.5));

    PointClass b = classify_point(m, od, 0.75);
    CHECK(b.tri_case == TrichotomyCase::periodic_off_orbit);
    CHECK(b.predicted_ratio(2.0) == doctest::Approx(0.5));

    PointClass c = classify_point(m, od, (5.0 - kSqrt5) / 8.0);
    CHECK(c.tri_case == TrichotomyCase::periodic_off_orbit);
    CHECK(c.period == 2);
    CHECK(c.predicted_ratio(2.0) == doctest::Approx(0.75));

    PointClass d = classify_point(m, od, 0.3);
    CHECK(d.tri_case == TrichotomyCase::nonperiodic);
    CHECK(d.predicted_ratio(2.0) == 1.0);

    // preperiodic postcritical point: z = f(c) = 1 for A=4
    PointClass e = classify_point(m, od, 1.0);
    CHECK(e.tri_case == TrichotomyCase::nonperiodic);
    CHECK(e.orbit_index == 1);
}

TEST_CASE("core invariance") {
    for (double A : {4.0, 3.9334240747966645, 3.6}) {
        UnimodalMap m(A, 2.0);
        Interval core = m.core();
        // the core endpoints map into the core
        CHECK(m(core.lo) >= core.lo - 1e-12);
        CHECK(m(core.lo) <= core.hi + 1e-12);
        CHECK(m(core.hi) >= core.lo - 1e-12);
        CHECK(m(core.hi) <= core.hi + 1e-12);
    }
}

TEST_CASE("ell != 2 map evaluates and differentiates consistently") {
    UnimodalMap m(3.8, 3.0);
    CHECK(m(0.5) == doctest::Approx(3.8 / 4.0));
    double x = 0.31;
    double hstep = 1e-7;
    double fd = (m(x + hstep) - m(x - hstep)) / (2 * hstep);
    CHECK(fd == doctest::Approx(m.deriv1(x)).epsilon(1e-6));
}
