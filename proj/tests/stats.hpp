#pragma once

// Small hypothesis-test helpers for the acceptance suite.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace riskrl::stats {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean of an empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
}

// One-sided p-value for H1: mean > 0 given a t statistic. A zero standard
// error is decided by the sign of the mean alone.
inline double upper_p(double m, double se, double dof) {
    if (se == 0.0) return m > 0.0 ? 0.0 : 1.0;
    const boost::math::students_t dist(dof);
    return boost::math::cdf(boost::math::complement(dist, m / se));
}

/// Paired one-sided t-test, H1: mean(a - b) > 0.
inline double paired_greater(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired test needs matching samples");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double n = static_cast<double>(d.size());
    return upper_p(mean(d), std::sqrt(variance(d) / n), n - 1.0);
}

/// Welch one-sided t-test, H1: mean(a) > mean(b).
inline double welch_greater(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch test needs two samples of size >= 2");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = variance(a) / na;
    const double vb = variance(b) / nb;
    const double se = std::sqrt(va + vb);
    const double dof = se == 0.0 ? na + nb - 2.0
                                 : (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    return upper_p(mean(a) - mean(b), se, dof);
}

/// Chi-square test of homogeneity on a rows x cols table of counts.
inline double chi_square_homogeneity(const std::vector<std::vector<double>>& table) {
    const std::size_t r = table.size();
    const std::size_t c = table.at(0).size();
    std::vector<double> row(r, 0.0), col(c, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            row[i] += table[i][j];
            col[j] += table[i][j];
            total += table[i][j];
        }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double e = row[i] * col[j] / total;
            if (e > 0.0) chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
        }
    const boost::math::chi_squared dist(static_cast<double>((r - 1) * (c - 1)));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace riskrl::stats
