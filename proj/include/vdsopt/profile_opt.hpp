#pragma once

// Sampling-profile optimization:
//
//   minimize_{p, q}  ||B q||_inf + lambda ||p.q - 1||_2^2   s.t. p in K_tau
//
// solved by alternating exact minimization in q (forward-backward) and in p
// (projected gradient onto K_tau), starting from the uniform profile m/N.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <span>
#include <string>

#include "coherence.hpp"
#include "prox.hpp"

namespace vdsopt {

// Metric of the forward-backward / projected-gradient steps. `scalar` uses
// the global Lipschitz constant (step 1/L); `curvature` uses the diagonal
// Hessian of the smooth term, which is exact for these separable quadratics.
enum class StepMetric { curvature, scalar };

struct OptConfig {
    double lambda = 0.05;
    double tau = 1e-3;
    double m = 0.0;
    std::size_t max_outer = 200;
    double outer_tol = 1e-6;
    std::size_t max_inner = 5000;
    double inner_tol = 1e-10;
    StepMetric metric = StepMetric::curvature;
    // Rescale the final profile onto the admissible set P(m).
    bool strict_admissible = false;

    void validate(std::size_t n) const
    {
        if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
        if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("tau must lie in (0, 1]");
        if (!(m > 0.0)) throw DomainError("budget m must be positive");
        if (m > static_cast<double>(n)) throw DomainError("budget m exceeds N");
        if (static_cast<double>(n) * tau > m) throw InfeasibleError("N*tau exceeds budget m");
        if (max_outer == 0 || max_inner == 0) throw DomainError("iteration caps must be positive");
        if (!(outer_tol > 0.0 && inner_tol > 0.0)) throw DomainError("tolerances must be positive");
    }
};

struct SamplingProfile {
    rvec p;
    double m = 0.0;

    std::size_t size() const { return p.size(); }
    double sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

    static SamplingProfile uniform(std::size_t n, double m)
    {
        return {rvec(n, m / static_cast<double>(n)), m};
    }
};

inline bool is_admissible(const SamplingProfile& prof, double tol = 1e-9)
{
    for (double v : prof.p) {
        if (!(v > 0.0 && v <= 1.0)) return false;
    }
    return std::abs(prof.sum() - prof.m) <= tol * std::max(1.0, prof.m);
}

// Scales p and clips to (0, 1] until ||p||_1 = m. The scale factor c solves
// sum_i min(1, c p_i) = m, found exactly over the sorted clipping breakpoints.
inline SamplingProfile normalize_to_budget(std::span<const double> p, double m)
{
    const std::size_t n = p.size();
    if (!(m > 0.0)) throw DomainError("normalize_to_budget: budget must be positive");
    if (m > static_cast<double>(n) + 1e-12) throw InfeasibleError("normalize_to_budget: budget m exceeds N");
    for (double v : p) {
        if (!(v > 0.0)) throw DomainError("normalize_to_budget: entries must be positive");
    }
    SamplingProfile out{rvec(p.begin(), p.end()), m};
    if (m >= static_cast<double>(n)) {
        std::fill(out.p.begin(), out.p.end(), 1.0);
        return out;
    }
    rvec sorted(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // With the k largest entries clipped, c = (m - k) / sum_{rest}.
    double rest = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        c = (m - static_cast<double>(k)) / rest;
        if (c * sorted[k] <= 1.0) break;
        rest -= sorted[k];
    }
    for (auto& v : out.p) v = std::min(1.0, c * v);
    // One correction pass absorbs rounding in the breakpoint sums.
    double s = 0.0, free_sum = 0.0;
    for (double v : out.p) {
        s += v;
        if (v < 1.0) free_sum += v;
    }
    if (free_sum > 0.0) {
        const double f = 1.0 + (m - s) / free_sum;
        for (auto& v : out.p) {
            if (v < 1.0) v = std::min(1.0, v * f);
        }
    }
    return out;
}

inline double joint_objective(std::span<const double> p, std::span<const double> q, std::span<const double> d,
                              double lambda)
{
    double linf = 0.0, fit = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        linf = std::max(linf, d[i] * std::abs(q[i]));
        const double r = p[i] * q[i] - 1.0;
        fit += r * r;
    }
    return linf + lambda * fit;
}

struct StepResult {
    rvec x;
    std::size_t iterations = 0;
    double objective = 0.0;
};

// argmin_q ||D q||_inf + lambda ||p.q - 1||^2 by forward-backward splitting.
inline StepResult q_step(std::span<const double> p, const CoherenceDiagonal& D, const OptConfig& cfg,
                         std::span<const double> q_init = {})
{
    const std::size_t n = p.size();
    if (D.size() != n) throw DimensionError("q_step: diagonal length mismatch");
    if (!(cfg.lambda > 0.0)) throw DomainError("q_step: lambda must be positive");
    for (double v : p) {
        if (!(v > 0.0)) throw DomainError("q_step: profile entries must be positive");
    }
    const double lam = cfg.lambda;
    const double pmax = *std::max_element(p.begin(), p.end());

    // Metric weights d_i; the prox in that metric is the Euclidean prox of
    // ||(B / sqrt(d)) u||_inf on u = sqrt(d) q with unit step.
    rvec sqrt_d(n), b_scaled(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = cfg.metric == StepMetric::curvature ? 2.0 * lam * p[i] * p[i] : 2.0 * lam * pmax * pmax;
        sqrt_d[i] = std::sqrt(d);
        b_scaled[i] = D.values[i] / sqrt_d[i];
    }

    StepResult res;
    res.x = q_init.size() == n ? rvec(q_init.begin(), q_init.end()) : rvec(n, 0.0);
    res.objective = joint_objective(p, res.x, D.values, lam);
    rvec v(n);
    double residual = 0.0;
    for (res.iterations = 1; res.iterations <= cfg.max_inner; ++res.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            const double grad = 2.0 * lam * p[i] * (p[i] * res.x[i] - 1.0);
            v[i] = sqrt_d[i] * (res.x[i] - grad / (sqrt_d[i] * sqrt_d[i]));
        }
        rvec u = prox_weighted_linf(v, 1.0, b_scaled);
        double change = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            u[i] /= sqrt_d[i];
            change = std::max(change, std::abs(u[i] - res.x[i]));
            scale = std::max(scale, std::abs(u[i]));
        }
        res.x = std::move(u);
        const double obj = joint_objective(p, res.x, D.values, lam);
        const double obj_change = std::abs(res.objective - obj) / std::max(std::abs(obj), 1.0);
        res.objective = obj;
        residual = change / std::max(scale, 1e-300);
        if (residual <= cfg.inner_tol && obj_change <= cfg.inner_tol) return res;
    }
    throw ConvergenceError("q_step: no convergence within max_inner", residual);
}

// argmin_p ||p.q - 1||^2 over K_tau by projected gradient.
inline StepResult p_step(std::span<const double> q, const OptConfig& cfg, std::span<const double> p_init = {})
{
    const std::size_t n = q.size();
    if (static_cast<double>(n) * cfg.tau > cfg.m) throw InfeasibleError("p_step: K_tau is empty (N*tau > m)");

    double qmax2 = 0.0;
    for (double v : q) qmax2 = std::max(qmax2, v * v);
    if (qmax2 == 0.0) {
        // Objective is constant; any feasible point is optimal.
        StepResult res;
        res.x = p_init.size() == n ? rvec(p_init.begin(), p_init.end())
                                   : rvec(n, cfg.m / static_cast<double>(n));
        res.x = project_K_tau(res.x, cfg.tau, cfg.m);
        res.objective = static_cast<double>(n);
        return res;
    }
    rvec metric(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = cfg.metric == StepMetric::curvature ? 2.0 * q[i] * q[i] : 2.0 * qmax2;
        // Zero curvature: the coordinate does not enter the objective.
        metric[i] = std::max(d, 2.0 * qmax2 * 1e-14);
    }
    auto objective = [&](const rvec& p) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = p[i] * q[i] - 1.0;
            f += r * r;
        }
        return f;
    };

    StepResult res;
    res.x = p_init.size() == n ? rvec(p_init.begin(), p_init.end()) : rvec(n, cfg.m / static_cast<double>(n));
    res.x = project_K_tau(res.x, cfg.tau, cfg.m);
    res.objective = objective(res.x);
    rvec v(n);
    double residual = 0.0;
    for (res.iterations = 1; res.iterations <= cfg.max_inner; ++res.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            const double grad = 2.0 * q[i] * (res.x[i] * q[i] - 1.0);
            v[i] = res.x[i] - grad / metric[i];
        }
        rvec next = project_K_tau(v, cfg.tau, cfg.m, metric);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - res.x[i]));
        res.x = std::move(next);
        const double obj = objective(res.x);
        const double obj_change = std::abs(res.objective - obj) / std::max(std::abs(obj), 1.0);
        res.objective = obj;
        residual = change;
        if (change <= cfg.inner_tol && obj_change <= cfg.inner_tol) return res;
    }
    throw ConvergenceError("p_step: no convergence within max_inner", residual);
}

struct TraceRecord {
    std::size_t iteration = 0;
    double objective = 0.0;
    double linf_term = 0.0;
    // ||p.q - 1||_2
    double residual = 0.0;
    double p_sum = 0.0;
    // max_i |p_i(t) - p_i(t-1)|
    double change = 0.0;
    std::size_t q_iters = 0;
    std::size_t p_iters = 0;
};

struct OptTrace {
    std::vector<TraceRecord> records;
    std::vector<std::string> warnings;
    bool converged = false;
    // ||p||_1 before any strict-admissibility rescaling.
    double raw_sum = 0.0;
};

struct OptResult {
    SamplingProfile profile;
    rvec q;
    OptTrace trace;
};

namespace detail {

inline TraceRecord make_record(std::size_t it, const rvec& p, const rvec& q, const CoherenceDiagonal& D,
                               double lambda)
{
    TraceRecord r;
    r.iteration = it;
    double fit = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        r.linf_term = std::max(r.linf_term, D.values[i] * std::abs(q[i]));
        const double e = p[i] * q[i] - 1.0;
        fit += e * e;
    }
    r.residual = std::sqrt(fit);
    r.objective = r.linf_term + lambda * fit;
    r.p_sum = std::accumulate(p.begin(), p.end(), 0.0);
    return r;
}

} // namespace detail

// Called with (outer iteration, p, q) after every outer step, including the start point.
using IterateObserver = std::function<void(std::size_t, const rvec&, const rvec&)>;

inline OptResult optimize_profile(const CoherenceDiagonal& D, const OptConfig& cfg,
                                  const IterateObserver& observe = {})
{
    const std::size_t n = D.size();
    cfg.validate(n);
    for (double v : D.values) {
        if (!(v > 0.0)) throw DomainError("optimize_profile: diagonal entries must be positive");
    }

    OptResult out;
    rvec p(n, cfg.m / static_cast<double>(n));
    StepResult qs = q_step(p, D, cfg);
    rvec q = std::move(qs.x);
    TraceRecord rec = detail::make_record(0, p, q, D, cfg.lambda);
    rec.q_iters = qs.iterations;
    out.trace.records.push_back(rec);
    if (observe) observe(0, p, q);

    for (std::size_t t = 1; t <= cfg.max_outer; ++t) {
        StepResult ps = p_step(q, cfg, p);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(ps.x[i] - p[i]));
        p = std::move(ps.x);
        qs = q_step(p, D, cfg, q);
        q = std::move(qs.x);

        const double prev = out.trace.records.back().objective;
        rec = detail::make_record(t, p, q, D, cfg.lambda);
        rec.change = change;
        rec.q_iters = qs.iterations;
        rec.p_iters = ps.iterations;
        out.trace.records.push_back(rec);
        if (observe) observe(t, p, q);
        if (std::abs(prev - rec.objective) <= cfg.outer_tol * std::abs(prev)) {
            out.trace.converged = true;
            break;
        }
    }
    if (!out.trace.converged) out.trace.warnings.push_back("outer iteration cap reached");

    out.trace.raw_sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (out.trace.raw_sum < cfg.m - 1e-6) {
        out.trace.warnings.push_back("budget not saturated: ||p||_1 = " + std::to_string(out.trace.raw_sum)
                                     + " < m = " + std::to_string(cfg.m));
    }
    out.q = std::move(q);
    out.profile = cfg.strict_admissible ? normalize_to_budget(p, cfg.m) : SamplingProfile{std::move(p), cfg.m};
    return out;
}

// Same problem with the support-averaged diagonal C in place of B.
inline OptResult optimize_profile_with_prior(const CoherenceDiagonal& C, const OptConfig& cfg,
                                            const IterateObserver& observe = {})
{
    if (C.kind != DiagonalKind::support_avg) {
        throw DomainError("optimize_profile_with_prior: requires a support_avg diagonal");
    }
    return optimize_profile(C, cfg, observe);
}

} // namespace vdsopt
