#include "oucl/interval_union.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <string>

#include "oucl/common.hpp"

namespace oucl {
namespace {

long long checked_narrow(__int128 v, const char* what) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw AccuracyError(std::string("rational overflow in ") + what);
    return static_cast<long long>(v);
}

Rational make_rational(__int128 n, __int128 d, const char* what) {
    if (d == 0) throw AccuracyError("rational division by zero");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a == 0) a = 1;
    Rational r;
    r.num = checked_narrow(n / a, what);
    r.den = checked_narrow(d / a, what);
    return r;
}

}  // namespace

Rational::Rational(long long n, long long d) { *this = make_rational(n, d, "ctor"); }

Rational Rational::from_decimal_string(const std::string& s) {
    static const std::regex pat(R"(([+-]?\d+)(?:\.(\d+))?(?:[eE]([+-]?\d{1,3}))?)");
    std::smatch m;
    if (!std::regex_match(s, m, pat)) throw ConfigError("not a decimal literal: " + s);
    const std::string whole = m[1].str();
    const std::string frac = m[2].matched ? m[2].str() : "";
    const long long exp10 = m[3].matched ? std::stoll(m[3].str()) : 0;
    if (whole.size() > 19 || frac.size() > 18)
        throw ConfigError("decimal literal too long: " + s);
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = whole[0] == '-';
    const long long w = std::stoll(whole);
    __int128 num = static_cast<__int128>(w) * den;
    const long long f = frac.empty() ? 0 : std::stoll(frac);
    num += neg ? -static_cast<__int128>(f) : static_cast<__int128>(f);
    __int128 d128 = den;
    constexpr __int128 lim = static_cast<__int128>(1) << 120;
    for (long long i = 0; i < exp10; ++i) {
        if (num > lim || num < -lim) throw ConfigError("decimal literal out of range: " + s);
        num *= 10;
    }
    for (long long i = 0; i < -exp10; ++i) {
        if (d128 > lim) throw ConfigError("decimal literal out of range: " + s);
        d128 *= 10;
    }
    return make_rational(num, d128, "decimal");
}

Rational Rational::operator+(const Rational& o) const {
    return make_rational(static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den,
                         static_cast<__int128>(den) * o.den, "add");
}

Rational Rational::operator-(const Rational& o) const {
    return make_rational(static_cast<__int128>(num) * o.den - static_cast<__int128>(o.num) * den,
                         static_cast<__int128>(den) * o.den, "sub");
}

Rational Rational::operator*(const Rational& o) const {
    return make_rational(static_cast<__int128>(num) * o.num,
                         static_cast<__int128>(den) * o.den, "mul");
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num == 0) throw AccuracyError("rational division by zero");
    return make_rational(static_cast<__int128>(num) * o.den,
                         static_cast<__int128>(den) * o.num, "div");
}

bool Rational::operator<(const Rational& o) const {
    return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

IntervalUnion::IntervalUnion(std::vector<std::pair<double, double>> intervals) {
    for (auto& iv : intervals) {
        if (!(iv.first <= iv.second))
            throw ConfigError("interval with negative length");
    }
    std::sort(intervals.begin(), intervals.end());
    for (const auto& iv : intervals) {
        if (iv.second == iv.first) continue;
        if (!ivs_.empty() && iv.first <= ivs_.back().second)
            ivs_.back().second = std::max(ivs_.back().second, iv.second);
        else
            ivs_.push_back(iv);
    }
}

double IntervalUnion::total_length() const {
    double s = 0.0;
    for (const auto& iv : ivs_) s += iv.second - iv.first;
    return s;
}

double IntervalUnion::lo() const {
    if (ivs_.empty()) throw PreconditionError("empty interval union");
    return ivs_.front().first;
}

double IntervalUnion::hi() const {
    if (ivs_.empty()) throw PreconditionError("empty interval union");
    return ivs_.back().second;
}

bool IntervalUnion::contains(double z) const {
    auto it = std::upper_bound(ivs_.begin(), ivs_.end(), z,
                               [](double v, const auto& iv) { return v < iv.first; });
    if (it == ivs_.begin()) return false;
    --it;
    return z >= it->first && z <= it->second;
}

IntervalUnion IntervalUnion::shifted(double z) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(ivs_.size());
    for (const auto& iv : ivs_) out.emplace_back(iv.first + z, iv.second + z);
    IntervalUnion u;
    u.ivs_ = std::move(out);
    return u;
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
    std::vector<std::pair<double, double>> out;
    std::size_t i = 0, j = 0;
    while (i < ivs_.size() && j < other.ivs_.size()) {
        const double a = std::max(ivs_[i].first, other.ivs_[j].first);
        const double b = std::min(ivs_[i].second, other.ivs_[j].second);
        if (a < b) out.emplace_back(a, b);
        if (ivs_[i].second < other.ivs_[j].second)
            ++i;
        else
            ++j;
    }
    IntervalUnion u;
    u.ivs_ = std::move(out);
    return u;
}

IntervalUnion IntervalUnion::subtract_open(double a, double b) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& iv : ivs_) {
        if (iv.second <= a || iv.first >= b) {
            out.push_back(iv);
            continue;
        }
        if (iv.first < a) out.emplace_back(iv.first, std::min(a, iv.second));
        if (iv.second > b) out.emplace_back(std::max(b, iv.first), iv.second);
    }
    IntervalUnion u;
    u.ivs_ = std::move(out);
    return u;
}

double interval_overlap(const IntervalUnion& u, double z) {
    const auto& a = u.intervals();
    double total = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < a.size()) {
        const double lo = std::max(a[i].first, a[j].first + z);
        const double hi = std::min(a[i].second, a[j].second + z);
        if (lo < hi) total += hi - lo;
        if (a[i].second < a[j].second + z)
            ++i;
        else
            ++j;
    }
    return total;
}

SvcSet svc_set(int level, const Rational& removed_total) {
    if (level < 0) throw ConfigError("svc level must be nonnegative");
    if (!(Rational(0, 1) < removed_total) || !(removed_total < Rational(1, 1)))
        throw ConfigError("svc removed_total must lie in (0,1)");
    if (level > 18) throw ConfigError("svc level capped at 18: interval endpoints would overflow");

    std::vector<std::pair<Rational, Rational>> ivs{{Rational(0, 1), Rational(1, 1)}};
    const Rational half(1, 2);
    for (int k = 1; k <= level; ++k) {
        // Per-interval removed length: removed_total * 2^{-k} / 2^{k-1}.
        Rational lk = removed_total;
        for (int j = 0; j < 2 * k - 1; ++j) lk = lk * half;
        std::vector<std::pair<Rational, Rational>> next;
        next.reserve(ivs.size() * 2);
        for (const auto& iv : ivs) {
            const Rational mid = (iv.first + iv.second) * half;
            const Rational hl = lk * half;
            next.emplace_back(iv.first, mid - hl);
            next.emplace_back(mid + hl, iv.second);
        }
        ivs = std::move(next);
    }

    Rational len(0, 1);
    std::vector<std::pair<double, double>> dbl;
    dbl.reserve(ivs.size());
    for (const auto& iv : ivs) {
        len = len + (iv.second - iv.first);
        dbl.emplace_back(iv.first.value(), iv.second.value());
    }
    return SvcSet{IntervalUnion(std::move(dbl)), len, std::move(ivs)};
}

SvcSet svc_set(int level, double removed_total) {
    // Go through a decimal literal so common inputs like 0.25 stay exact.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", removed_total);
    return svc_set(level, Rational::from_decimal_string(std::string(buf)));
}

}  // namespace oucl
