#pragma once

// Independent oracle for the pooled t-test: the statistic is recomputed in
// extended precision, and the two-sided p-value comes from adaptive
// Simpson quadrature over the Student density rather than the incomplete
// beta route used by the implementation.

#include <cmath>
#include <vector>

namespace ordermill::testing {

struct TOracleResult {
    long double t;
    int df;
    bool significant;
    long double p;
};

inline long double student_density(long double x, long double df) {
    long double c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                    0.5L * std::log(df * std::acos(-1.0L));
    return std::exp(c - ((df + 1) / 2) * std::log1p(x * x / df));
}

inline long double simpson(long double a, long double b, long double fa, long double fm,
                           long double fb, long double df, long double eps, int depth) {
    long double m = (a + b) / 2;
    long double lm = (a + m) / 2, rm = (m + b) / 2;
    long double flm = student_density(lm, df), frm = student_density(rm, df);
    long double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    long double left = (m - a) / 6 * (fa + 4 * flm + fm);
    long double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15 * eps)
        return left + right + (left + right - whole) / 15;
    return simpson(a, m, fa, flm, fm, df, eps / 2, depth - 1) +
           simpson(m, b, fm, frm, fb, df, eps / 2, depth - 1);
}

// P(T > t) for t >= 0 by integrating the density from 0 to t and using
// symmetry: P(T > t) = 1/2 - integral.
inline long double upper_tail(long double t, long double df) {
    if (t == 0) return 0.5L;
    long double fa = student_density(0, df);
    long double fb = student_density(t, df);
    long double fm = student_density(t / 2, df);
    long double integral = simpson(0, t, fa, fm, fb, df, 1e-16L, 60);
    return 0.5L - integral;
}

inline TOracleResult t_oracle(const std::vector<double>& a, const std::vector<double>& b,
                              double confidence) {
    long double n1 = static_cast<long double>(a.size());
    long double n2 = static_cast<long double>(b.size());
    long double m1 = 0, m2 = 0;
    for (double x : a) m1 += x;
    for (double x : b) m2 += x;
    m1 /= n1;
    m2 /= n2;
    long double ss1 = 0, ss2 = 0;
    for (double x : a) ss1 += (x - m1) * (x - m1);
    for (double x : b) ss2 += (x - m2) * (x - m2);
    int df = static_cast<int>(a.size() + b.size()) - 2;
    TOracleResult r{0.0L, df, false, 1.0L};
    long double pooled = (ss1 + ss2) / df;
    if (pooled == 0) {
        if (m1 == m2) return r;
        r.t = m1 < m2 ? -INFINITY : INFINITY;
        r.significant = true;
        r.p = 0;
        return r;
    }
    long double se = std::sqrt(pooled * (1 / n1 + 1 / n2));
    r.t = (m1 - m2) / se;
    r.p = 2 * upper_tail(std::fabs(r.t), static_cast<long double>(df));
    r.significant = r.p < 1.0L - static_cast<long double>(confidence);
    return r;
}

}  // namespace ordermill::testing
