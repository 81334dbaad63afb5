#include "oucl/rw_oracle.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "oucl/common.hpp"

namespace oucl {

namespace {

using Int = boost::multiprecision::cpp_int;

Int pow10(int e) {
    Int v = 1;
    for (int i = 0; i < e; ++i) v *= 10;
    return v;
}

}  // namespace

Rational128 rational_from_shortest_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    const char* s = buf;
    bool neg = false;
    if (*s == '+' || *s == '-') neg = (*s++ == '-');
    std::string digits;
    int frac_len = 0;
    bool in_frac = false;
    int exp10 = 0;
    for (; *s; ++s) {
        if (std::isdigit(static_cast<unsigned char>(*s))) {
            digits.push_back(*s);
            if (in_frac) ++frac_len;
        } else if (*s == '.') {
            in_frac = true;
        } else if (*s == 'e' || *s == 'E') {
            exp10 = std::atoi(s + 1);
            break;
        } else {
            throw PreconditionError("value has no finite decimal representation");
        }
    }
    if (digits.empty()) throw PreconditionError("value has no finite decimal representation");
    const std::size_t nz = digits.find_first_not_of('0');  // cpp_int reads "0..." as octal
    Int num(nz == std::string::npos ? "0" : digits.substr(nz));
    if (neg) num = -num;
    Int den = pow10(frac_len);
    if (exp10 > 0)
        num *= pow10(exp10);
    else if (exp10 < 0)
        den *= pow10(-exp10);
    return Rational128(num, den);
}

RwTailExact rw_exact_tail(int k, const Rational128& r, int a) {
    if (k < 1) throw PreconditionError("step count must be positive");
    if (k > 18) throw PreconditionError("the exact walk oracle supports k <= 18");
    if (a < 1) throw PreconditionError("the level must be a positive integer");
    if (r < 0 || r >= 1) throw PreconditionError("the step law requires r in [0, 1)");

    const Rational128 p_stay = r;
    const Rational128 p_move = (Rational128(1) - r) / 2;

    // state[(pos + k) * 2 + hit]: probability of being at `pos` after i steps
    // with hit = 1 iff some earlier partial sum reached level a.
    const int width = 2 * k + 1;
    std::vector<Rational128> state(width * 2, Rational128(0));
    std::vector<Rational128> next(width * 2, Rational128(0));
    state[(0 + k) * 2 + 0] = 1;

    for (int i = 0; i < k; ++i) {
        for (auto& v : next) v = 0;
        for (int pos = -i; pos <= i; ++pos) {
            for (int hit = 0; hit < 2; ++hit) {
                const Rational128& cur = state[(pos + k) * 2 + hit];
                if (cur == 0) continue;
                for (int step = -1; step <= 1; ++step) {
                    const int npos = pos + step;
                    const int nhit = (hit == 1 || npos >= a) ? 1 : 0;
                    next[(npos + k) * 2 + nhit] += cur * (step == 0 ? p_stay : p_move);
                }
            }
        }
        state.swap(next);
    }

    RwTailExact out;
    for (int pos = -k; pos <= k; ++pos) {
        const Rational128 both = state[(pos + k) * 2 + 0] + state[(pos + k) * 2 + 1];
        out.max_ge += state[(pos + k) * 2 + 1];
        if (pos >= a) out.end_ge += both;
        if (pos > a) out.end_gt += both;
        if (pos >= 0 && pos <= a) out.mid_closed += both;
        if (pos > 0 && pos < a) out.mid_open += both;
    }
    out.max_lt = Rational128(1) - out.max_ge;
    return out;
}

RwTailExact rw_exact_tail(int k, double r, int a) {
    return rw_exact_tail(k, rational_from_shortest_decimal(r), a);
}

bool reflection_inequalities_hold(const RwTailExact& t) {
    return 2 * t.end_gt <= t.max_ge && t.max_ge <= 2 * t.end_ge && 2 * t.mid_open <= t.max_lt &&
           t.max_lt <= 2 * t.mid_closed;
}

}  // namespace oucl
