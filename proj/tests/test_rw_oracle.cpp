#include <doctest.h>

#include <oucl/common.hpp>
#include <oucl/rw_oracle.hpp>

#include <vector>

using namespace oucl;

namespace {

// Enumerates all 3^k step sequences with exact rational weights.
RwTailExact brute_force(int k, const Rational128& r, int a) {
    const Rational128 half_move = (Rational128(1) - r) / 2;
    RwTailExact out;
    std::vector<int> steps(k, -1);
    for (;;) {
        int s = 0, smax = -1000000;
        Rational128 w = 1;
        for (int i = 0; i < k; ++i) {
            s += steps[i];
            smax = std::max(smax, s);
            w *= steps[i] == 0 ? r : half_move;
        }
        if (smax >= a) out.max_ge += w;
        else out.max_lt += w;
        if (s >= a) out.end_ge += w;
        if (s > a) out.end_gt += w;
        if (s >= 0 && s <= a) out.mid_closed += w;
        if (s > 0 && s < a) out.mid_open += w;

        int i = 0;
        while (i < k && steps[i] == 1) steps[i++] = -1;
        if (i == k) break;
        ++steps[i];
    }
    return out;
}

}  // namespace

TEST_SUITE("rw_oracle") {

TEST_CASE("dynamic program agrees with full enumeration") {
    const std::vector<Rational128> rs = {Rational128(0), Rational128(3, 10), Rational128(3, 5)};
    for (int k = 1; k <= 8; ++k) {
        for (const Rational128& r : rs) {
            for (int a = 1; a <= k; ++a) {
                RwTailExact dp = rw_exact_tail(k, r, a);
                RwTailExact bf = brute_force(k, r, a);
                CHECK(dp.max_ge == bf.max_ge);
                CHECK(dp.end_ge == bf.end_ge);
                CHECK(dp.end_gt == bf.end_gt);
                CHECK(dp.max_lt == bf.max_lt);
                CHECK(dp.mid_closed == bf.mid_closed);
                CHECK(dp.mid_open == bf.mid_open);
            }
        }
    }
}

TEST_CASE("closed forms for the driftless one-step and two-step walks") {
    RwTailExact one = rw_exact_tail(1, Rational128(0), 1);
    CHECK(one.max_ge == Rational128(1, 2));
    CHECK(one.end_gt == Rational128(0));
    CHECK(one.max_lt == Rational128(1, 2));

    // P(max(S_1,S_2) >= 1) = 1 - P(down-down) - P(down-up) = 1/2 for r = 0
    RwTailExact two = rw_exact_tail(2, Rational128(0), 1);
    CHECK(two.max_ge == Rational128(1, 2));
    CHECK(two.end_ge == Rational128(1, 4));  // S_2 = 2
    CHECK(two.mid_closed == Rational128(1, 2));
}

TEST_CASE("probabilities are normalized and monotone in the level") {
    for (int k : {3, 7, 12}) {
        Rational128 prev_max = 2;
        for (int a = 1; a <= k; ++a) {
            RwTailExact t = rw_exact_tail(k, Rational128(3, 10), a);
            CHECK(t.max_ge + t.max_lt == Rational128(1));
            CHECK(t.max_ge < prev_max);
            CHECK(t.end_gt <= t.end_ge);
            CHECK(t.mid_open <= t.mid_closed);
            prev_max = t.max_ge;
        }
    }
}

TEST_CASE("reflection inequalities hold across the sweep") {
    for (int k = 1; k <= 12; ++k)
        for (const Rational128& r : {Rational128(0), Rational128(3, 10), Rational128(3, 5)})
            for (int a = 1; a <= k; ++a)
                CHECK(reflection_inequalities_hold(rw_exact_tail(k, r, a)));
}

TEST_CASE("rejects degenerate or oversized inputs") {
    CHECK_THROWS_AS(rw_exact_tail(4, Rational128(1), 1), PreconditionError);
    CHECK_THROWS_AS(rw_exact_tail(4, Rational128(-1, 10), 1), PreconditionError);
    CHECK_THROWS_AS(rw_exact_tail(0, Rational128(0), 1), PreconditionError);
    CHECK_THROWS_AS(rw_exact_tail(19, Rational128(0), 1), PreconditionError);
    CHECK_THROWS_AS(rw_exact_tail(4, Rational128(0), 0), PreconditionError);
}

TEST_CASE("doubles are read as their shortest decimal") {
    CHECK(rational_from_shortest_decimal(0.3) == Rational128(3, 10));
    CHECK(rational_from_shortest_decimal(0.6) == Rational128(3, 5));
    CHECK(rational_from_shortest_decimal(0.125) == Rational128(1, 8));
    CHECK(rational_from_shortest_decimal(0.09) == Rational128(9, 100));
    RwTailExact a = rw_exact_tail(6, 0.3, 2);
    RwTailExact b = rw_exact_tail(6, Rational128(3, 10), 2);
    CHECK(a.max_ge == b.max_ge);
}

}
