#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oucl {

// Exact rational with 64-bit numerator/denominator (128-bit intermediates).
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d);
    static Rational from_decimal_string(const std::string& s);

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator<(const Rational& o) const;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Disjoint finite union of closed intervals [a_i, b_i], kept sorted and merged.
class IntervalUnion {
public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<std::pair<double, double>> intervals);

    const std::vector<std::pair<double, double>>& intervals() const { return ivs_; }
    std::size_t size() const { return ivs_.size(); }
    bool empty() const { return ivs_.empty(); }

    double total_length() const;
    double lo() const;
    double hi() const;
    bool contains(double z) const;

    IntervalUnion shifted(double z) const;
    IntervalUnion intersect(const IntervalUnion& other) const;
    // Removes the open interval (a, b) from the union.
    IntervalUnion subtract_open(double a, double b) const;

private:
    std::vector<std::pair<double, double>> ivs_;
};

// Length of u ∩ (u + z), computed by a sorted sweep (no quadrature).
double interval_overlap(const IntervalUnion& u, double z);

// Smith-Volterra-Cantor set approximant.  Level n removes, at each step k ≤ n,
// the middle open interval of total length removed_total * 2^{-k} from the
// 2^{k-1} surviving intervals, so the level-n length is
// 1 - removed_total * (1 - 2^{-n}), held exactly in rational arithmetic.
struct SvcSet {
    IntervalUnion set;
    Rational exact_length;
    std::vector<std::pair<Rational, Rational>> exact_intervals;
};

SvcSet svc_set(int level, const Rational& removed_total);
SvcSet svc_set(int level, double removed_total);

}  // namespace oucl
