#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace oucl {

using Rational128 = boost::multiprecision::cpp_rational;

// Exact distribution functionals of the lazy symmetric walk on Z whose steps
// are -1, 0, +1 with probabilities (1-r)/2, r, (1-r)/2.  All values refer to
// the first k partial sums S_1, ..., S_k and a positive level a.
struct RwTailExact {
    Rational128 max_ge;      // P(max S_i >= a)
    Rational128 end_ge;      // P(S_k >= a)
    Rational128 end_gt;      // P(S_k > a)
    Rational128 max_lt;      // P(max S_i < a)
    Rational128 mid_closed;  // P(0 <= S_k <= a)
    Rational128 mid_open;    // P(0 < S_k < a)
};

// Dynamic program over (position, level-a hit flag); exact in the rationals.
RwTailExact rw_exact_tail(int k, const Rational128& r, int a);

// Convenience overload: r is read as its shortest decimal representation, so
// 0.3 means exactly 3/10.
RwTailExact rw_exact_tail(int k, double r, int a);

// The two-sided reflection bounds:
//   2 P(S_k > a) <= P(max >= a) <= 2 P(S_k >= a)
//   2 P(0 < S_k < a) <= P(max < a) <= 2 P(0 <= S_k <= a)
bool reflection_inequalities_hold(const RwTailExact& t);

Rational128 rational_from_shortest_decimal(double v);

}  // namespace oucl
