#pragma once

// Equality-constrained basis pursuit
//
//   minimize ||alpha||_1  subject to  y = A_Omega alpha
//
// by Douglas-Rachford splitting. Rows of A_Omega are orthonormal, so the
// projection onto the constraint set is alpha + A^H (y - A alpha).

#include <algorithm>
#include <cmath>
#include <span>

#include "sampling.hpp"
#include "transforms.hpp"

namespace vdsopt {

struct BPConfig {
    std::size_t max_iters = 20000;
    double tol = 1e-8;
    // Relaxation of the Douglas-Rachford update, in (0, 2).
    double relaxation = 1.8;
    // Threshold of the l1 prox; 0 selects 0.1 * max_j |(A^H y)_j|.
    double gamma = 0.0;

    void validate() const
    {
        if (!(tol > 0.0)) throw DomainError("BPConfig: tol must be positive");
        if (max_iters < 1) throw DomainError("BPConfig: max_iters must be at least 1");
        if (!(relaxation > 0.0 && relaxation < 2.0)) throw DomainError("BPConfig: relaxation must lie in (0, 2)");
        if (gamma < 0.0) throw DomainError("BPConfig: gamma must be nonnegative");
    }
};

struct BPResult {
    cvec alpha;
    std::size_t iterations = 0;
    bool converged = false;
    // ||A alpha - y|| / ||y||
    double constraint_residual = 0.0;
    // Final ||prox_l1 - proj_affine|| / ||alpha||
    double split_gap = 0.0;
};

// Phase-preserving shrinkage of every entry's magnitude by t.
inline void soft_threshold_inplace(std::span<complex_t> v, double t)
{
    for (auto& z : v) {
        const double a = std::abs(z);
        z = a > t ? z * ((a - t) / a) : complex_t{};
    }
}

inline double l1_norm(std::span<const complex_t> v)
{
    double s = 0.0;
    for (const auto& z : v) s += std::abs(z);
    return s;
}

inline double l2_norm(std::span<const complex_t> v)
{
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// Closed-form projection onto {alpha : A alpha = y}, in place.
inline void project_affine_inplace(MaskedOperator& op, std::span<const complex_t> y, std::span<complex_t> alpha,
                                   cvec& rows, cvec& corr)
{
    rows.resize(op.rows());
    corr.resize(op.n());
    op.apply(alpha, rows);
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = y[k] - rows[k];
    op.adjoint(rows, corr);
    for (std::size_t j = 0; j < alpha.size(); ++j) alpha[j] += corr[j];
}

inline BPResult basis_pursuit(std::span<const complex_t> y, MaskedOperator& op, const BPConfig& cfg = {})
{
    cfg.validate();
    if (y.size() != op.rows()) throw DimensionError("basis_pursuit: measurement length mismatch");
    const std::size_t n = op.n();
    BPResult res;
    res.alpha.assign(n, complex_t{});

    const double ynorm = l2_norm(y);
    if (op.rows() == 0 || ynorm == 0.0) {
        res.converged = true;
        return res;
    }

    cvec z = op.adjoint(y);
    double gamma = cfg.gamma;
    if (gamma == 0.0) {
        double amax = 0.0;
        for (const auto& v : z) amax = std::max(amax, std::abs(v));
        gamma = 0.1 * amax;
    }

    cvec x(n), w(n), rows, corr;
    for (res.iterations = 1; res.iterations <= cfg.max_iters; ++res.iterations) {
        std::copy(z.begin(), z.end(), x.begin());
        project_affine_inplace(op, y, x, rows, corr);
        for (std::size_t j = 0; j < n; ++j) w[j] = 2.0 * x[j] - z[j];
        soft_threshold_inplace(w, gamma);
        double gap = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const complex_t d = w[j] - x[j];
            gap += std::norm(d);
            z[j] += cfg.relaxation * d;
        }
        res.split_gap = std::sqrt(gap) / std::max(l2_norm(x), 1e-300);
        if (res.split_gap <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    if (res.iterations > cfg.max_iters) res.iterations = cfg.max_iters;
    // The affine projection of the last z is feasible to rounding.
    std::copy(z.begin(), z.end(), x.begin());
    project_affine_inplace(op, y, x, rows, corr);
    res.alpha = x;
    op.apply(res.alpha, rows);
    double r = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) r += std::norm(rows[k] - y[k]);
    res.constraint_residual = std::sqrt(r) / ynorm;
    return res;
}

// Deduplicates omega (iid draws) before solving; repeated rows carry the same
// constraint, so the feasible set is unchanged.
inline BPResult basis_pursuit(const MeasurementSet& ms, const BasisPair& pair, const BPConfig& cfg = {})
{
    if (ms.model == SamplingModel::bernoulli) {
        MaskedOperator op(pair, ms.omega);
        return basis_pursuit(ms.y, op, cfg);
    }
    index_set uniq;
    cvec y;
    std::vector<char> seen(pair.n, 0);
    for (std::size_t k = 0; k < ms.omega.size(); ++k) {
        const auto i = ms.omega[k];
        if (i >= pair.n) throw DimensionError("basis_pursuit: index out of range");
        if (seen[i]) continue;
        seen[i] = 1;
        uniq.push_back(i);
        y.push_back(ms.y[k]);
    }
    MaskedOperator op(pair, std::move(uniq));
    return basis_pursuit(y, op, cfg);
}

inline constexpr double recovery_threshold = 1e-3;

// ||alpha - alpha_hat||_2 <= 1e-3 ||alpha||_2 (inclusive).
inline bool is_recovered(std::span<const complex_t> alpha, std::span<const complex_t> alpha_hat)
{
    if (alpha.size() != alpha_hat.size()) throw DimensionError("is_recovered: length mismatch");
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        err += std::norm(alpha[j] - alpha_hat[j]);
        ref += std::norm(alpha[j]);
    }
    if (ref == 0.0) return err == 0.0;
    return std::sqrt(err) <= recovery_threshold * std::sqrt(ref);
}

} // namespace vdsopt
