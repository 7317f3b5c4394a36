#pragma once

// Diagonal coherence summaries B (per-row maximum) and C (support average)
// and the coherence functionals built on them.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <span>
#include <sstream>

#include "transforms.hpp"

namespace vdsopt {

enum class DiagonalKind { max_row, support_avg };

inline const char* to_string(DiagonalKind k) { return k == DiagonalKind::max_row ? "max_row" : "support_avg"; }

struct CoherenceDiagonal {
    rvec values;
    DiagonalKind kind = DiagonalKind::max_row;
    std::string pair_descriptor;
    // Number of entries raised to `zero_floor`.
    std::size_t floored = 0;

    std::size_t size() const { return values.size(); }
};

// Entries below this are raised to it so 1/q stays finite in the optimizer.
inline constexpr double zero_floor = 1e-15;

namespace detail {

inline std::size_t apply_floor(rvec& v)
{
    std::size_t count = 0;
    for (auto& x : v) {
        if (x < zero_floor) {
            x = zero_floor;
            ++count;
        }
    }
    if (count > 0) {
        std::clog << "vdsopt: warning: " << count << " coherence diagonal entries floored to " << zero_floor
                  << "\n";
    }
    return count;
}

} // namespace detail

inline CoherenceDiagonal build_B(const BasisPair& pair)
{
    pair.validate();
    CoherenceDiagonal d;
    d.kind = DiagonalKind::max_row;
    d.pair_descriptor = pair.describe();
    d.values.resize(pair.n);
    cvec work;
    for (index_t i = 0; i < pair.n; ++i) {
        const cvec row = gram_row(pair, i, work);
        double best = 0.0;
        for (const auto& a : row) best = std::max(best, std::norm(a));
        d.values[i] = best;
    }
    d.floored = detail::apply_floor(d.values);
    return d;
}

// Mean over the dataset of s^{-1} sum_{j in S} |A_ij|^2.
inline CoherenceDiagonal build_C(const BasisPair& pair, std::span<const index_set> supports, std::size_t s)
{
    pair.validate();
    if (supports.empty()) throw DomainError("build_C: empty support dataset");
    if (s == 0) throw DomainError("build_C: sparsity must be positive");
    for (const auto& S : supports) {
        if (S.size() != s) {
            throw DomainError("build_C: support of size " + std::to_string(S.size()) + ", expected "
                              + std::to_string(s));
        }
        for (auto j : S) {
            if (j >= pair.n) throw DimensionError("build_C: support index " + std::to_string(j) + " out of range");
        }
    }
    // Support-count weights w_j = (#supports containing j); C_ii = sum_j w_j |A_ij|^2 / (K s).
    rvec weight(pair.n, 0.0);
    for (const auto& S : supports) {
        for (auto j : S) weight[j] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(supports.size()) * static_cast<double>(s));

    CoherenceDiagonal d;
    d.kind = DiagonalKind::support_avg;
    d.pair_descriptor = pair.describe() + ";supports=" + std::to_string(supports.size()) + ";s=" + std::to_string(s);
    d.values.resize(pair.n);
    cvec work;
    for (index_t i = 0; i < pair.n; ++i) {
        const cvec row = gram_row(pair, i, work);
        double acc = 0.0;
        for (index_t j = 0; j < pair.n; ++j) {
            if (weight[j] != 0.0) acc += weight[j] * std::norm(row[j]);
        }
        d.values[i] = acc * norm;
    }
    d.floored = detail::apply_floor(d.values);
    return d;
}

inline CoherenceDiagonal build_C(const BasisPair& pair, const index_set& support)
{
    return build_C(pair, std::span<const index_set>(&support, 1), support.size());
}

namespace detail {

inline double max_abs_gram(const BasisPair& pair, std::span<const double> weights_inv_sqrt)
{
    cvec work;
    double best = 0.0;
    for (index_t i = 0; i < pair.n; ++i) {
        const cvec row = gram_row(pair, i, work);
        double rmax = 0.0;
        for (const auto& a : row) rmax = std::max(rmax, std::abs(a));
        best = std::max(best, rmax * weights_inv_sqrt[i]);
    }
    return best;
}

} // namespace detail

// mu(p) = (m/N)^{1/2} max_{i,j} |<phi_i, psi_j>| / p_i^{1/2}, with m = sum p.
inline double mu_profile(std::span<const double> p, const BasisPair& pair)
{
    pair.validate();
    if (p.size() != pair.n) throw DimensionError("mu_profile: profile length mismatch");
    double m = 0.0;
    rvec w(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0)) throw DomainError("mu_profile: profile entries must be positive");
        m += p[i];
        w[i] = 1.0 / std::sqrt(p[i]);
    }
    return std::sqrt(m / static_cast<double>(pair.n)) * detail::max_abs_gram(pair, w);
}

// mu(p, S) = ((m/N) max_i C_ii / p_i)^{1/2}.
inline double mu_profile_support(std::span<const double> p, const CoherenceDiagonal& C)
{
    if (C.kind != DiagonalKind::support_avg) throw DomainError("mu_profile_support: requires a support_avg diagonal");
    if (p.size() != C.size()) throw DimensionError("mu_profile_support: length mismatch");
    double m = 0.0, best = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0)) throw DomainError("mu_profile_support: profile entries must be positive");
        m += p[i];
        best = std::max(best, C.values[i] / p[i]);
    }
    return std::sqrt(m / static_cast<double>(p.size()) * best);
}

// mu(P) = N^{-1/2} max_{i,j} |<phi_i, psi_j>| / P(i)^{1/2}.
inline double mu_measure(std::span<const double> P, const BasisPair& pair)
{
    pair.validate();
    if (P.size() != pair.n) throw DimensionError("mu_measure: length mismatch");
    double total = 0.0;
    rvec w(P.size());
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (!(P[i] > 0.0)) throw DomainError("mu_measure: probabilities must be positive");
        total += P[i];
        w[i] = 1.0 / std::sqrt(P[i]);
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("mu_measure: probabilities must sum to 1");
    return detail::max_abs_gram(pair, w) / std::sqrt(static_cast<double>(pair.n));
}

inline void write_diagonal_csv(std::ostream& os, const CoherenceDiagonal& d)
{
    os << "index,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < d.size(); ++i) os << i << "," << d.values[i] << "\n";
}

inline void write_diagonal_csv(const std::string& path, const CoherenceDiagonal& d)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_diagonal_csv(os, d);
    if (!os) throw Error("write failed for '" + path + "'");
}

} // namespace vdsopt
