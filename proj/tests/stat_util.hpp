#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace testutil {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double s2 = 0.0;
    for (double v : x) s2 += (v - m) * (v - m);
    return {m, std::sqrt(s2 / (n - 1.0) / n)};
}

/// p-value of the chi-square homogeneity test for two samples of small integers.
/// Cells with fewer than 10 pooled counts are merged into the top cell.
inline double two_sample_chi2_pvalue(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<int, std::pair<double, double>> cells;
    for (int v : a) cells[v].first += 1.0;
    for (int v : b) cells[v].second += 1.0;
    std::vector<std::pair<double, double>> merged;
    std::pair<double, double> acc{0.0, 0.0};
    for (const auto& [k, c] : cells) {
        acc.first += c.first;
        acc.second += c.second;
        if (acc.first + acc.second >= 10.0) {
            merged.push_back(acc);
            acc = {0.0, 0.0};
        }
    }
    if (acc.first + acc.second > 0.0) {
        if (merged.empty())
            merged.push_back(acc);
        else {
            merged.back().first += acc.first;
            merged.back().second += acc.second;
        }
    }
    if (merged.size() < 2) return 1.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double chi2 = 0.0;
    for (const auto& [ca, cb] : merged) {
        const double tot = ca + cb;
        const double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
        chi2 += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    boost::math::chi_squared dist(static_cast<double>(merged.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

/// p-value of the chi-square goodness-of-fit test of counts against probabilities.
/// Cells with expected count below 5 are pooled into one cell.
inline double chi2_gof_pvalue(const std::vector<double>& counts, const std::vector<double>& probs) {
    double n = 0.0;
    for (double c : counts) n += c;
    double chi2 = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    int cells = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = n * probs[k];
        if (e < 5.0) {
            pooled_obs += counts[k];
            pooled_exp += e;
            continue;
        }
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
        ++cells;
    }
    if (pooled_exp > 0.0) {
        chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++cells;
    }
    if (cells < 2) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(cells - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace testutil
