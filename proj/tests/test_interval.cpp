#include <doctest.h>

#include <oucl/common.hpp>
#include <oucl/interval_union.hpp>

#include <cmath>
#include <utility>
#include <vector>

using namespace oucl;

TEST_SUITE("interval") {

TEST_CASE("rational arithmetic is exact and normalized") {
    Rational a(1, 3), b(1, 6);
    CHECK((a + b) == Rational(1, 2));
    CHECK((a - b) == Rational(1, 6));
    CHECK((a * b) == Rational(1, 18));
    CHECK((a / b) == Rational(2, 1));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(2, -4) < Rational(0, 1));
    CHECK(Rational::from_decimal_string("0.1") == Rational(1, 10));
    CHECK(Rational::from_decimal_string("-0.25") == Rational(-1, 4));
    CHECK(Rational::from_decimal_string("1e-05") == Rational(1, 100000));
    CHECK(Rational::from_decimal_string("2.5e3") == Rational(2500, 1));
    CHECK_THROWS_AS(Rational::from_decimal_string("3/10"), ConfigError);
    CHECK_THROWS_AS(Rational::from_decimal_string("0.1x"), ConfigError);
    CHECK(Rational(3, 4).value() == doctest::Approx(0.75));
}

TEST_CASE("interval unions merge, intersect and subtract") {
    IntervalUnion u({{0.0, 1.0}, {0.5, 2.0}, {3.0, 4.0}});
    CHECK(u.size() == 2);
    CHECK(u.total_length() == doctest::Approx(3.0));
    CHECK(u.lo() == doctest::Approx(0.0));
    CHECK(u.hi() == doctest::Approx(4.0));
    CHECK(u.contains(1.7));
    CHECK(!u.contains(2.5));

    IntervalUnion v = u.shifted(1.0);
    CHECK(v.lo() == doctest::Approx(1.0));
    CHECK(v.hi() == doctest::Approx(5.0));

    IntervalUnion w = u.intersect(v);
    // [0,2]∩[1,3] = [1,2]; [0,2]∩[4,5] = {}; [3,4]∩[1,3] = {3}; [3,4]∩[4,5] = {4}
    CHECK(w.total_length() == doctest::Approx(1.0));
    CHECK(w.contains(1.5));
    CHECK(!w.contains(2.5));

    IntervalUnion s = u.subtract_open(0.25, 0.75);
    CHECK(s.total_length() == doctest::Approx(2.5));
    CHECK(s.contains(0.25));
    CHECK(s.contains(0.75));
    CHECK(!s.contains(0.5));
}

TEST_CASE("overlap of a union with its own shift") {
    IntervalUnion unit({{0.0, 1.0}});
    CHECK(interval_overlap(unit, 0.0) == doctest::Approx(1.0));
    CHECK(interval_overlap(unit, 0.3) == doctest::Approx(0.7));
    CHECK(interval_overlap(unit, -0.3) == doctest::Approx(0.7));
    CHECK(interval_overlap(unit, 1.5) == doctest::Approx(0.0));

    IntervalUnion two({{0.0, 1.0}, {2.0, 3.0}});
    // shift 2 maps the first interval onto the second
    CHECK(interval_overlap(two, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("svc construction matches hand-computed low levels") {
    SvcSet l1 = svc_set(1, Rational(1, 4));
    REQUIRE(l1.exact_intervals.size() == 2);
    CHECK(l1.exact_intervals[0].first == Rational(0, 1));
    CHECK(l1.exact_intervals[0].second == Rational(7, 16));
    CHECK(l1.exact_intervals[1].first == Rational(9, 16));
    CHECK(l1.exact_intervals[1].second == Rational(1, 1));
    CHECK(l1.exact_length == Rational(7, 8));

    SvcSet l2 = svc_set(2, Rational(1, 4));
    REQUIRE(l2.exact_intervals.size() == 4);
    CHECK(l2.exact_intervals[0].second == Rational(13, 64));
    CHECK(l2.exact_intervals[1].first == Rational(15, 64));
    CHECK(l2.exact_length == Rational(13, 16));

    SvcSet l10 = svc_set(10, Rational(1, 4));
    CHECK(l10.exact_intervals.size() == 1024);
    CHECK(l10.exact_length == Rational(3073, 4096));
    CHECK(l10.set.total_length() == doctest::Approx(3073.0 / 4096.0));

    // the double overload resolves through the same exact path
    SvcSet l10d = svc_set(10, 0.25);
    CHECK(l10d.exact_length == Rational(3073, 4096));
}

TEST_CASE("svc overlap stays above a quarter for small shifts") {
    SvcSet s = svc_set(10, Rational(1, 4));
    double worst = 2.0;
    for (int i = -100; i <= 100; ++i) {
        double z = 0.1 * i / 100.0;
        worst = std::min(worst, interval_overlap(s.set, z));
    }
    CHECK(worst >= 0.25);
    CHECK(interval_overlap(s.set, 0.0) == doctest::Approx(3073.0 / 4096.0));
}

}
