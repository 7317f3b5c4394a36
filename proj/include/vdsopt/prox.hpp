#pragma once

// Projections and proximity operators used by the sampling-profile optimizer.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "common.hpp"

namespace vdsopt {

// {x : sum_i weights_i |x_i| <= radius}
struct WeightedL1Ball {
    rvec weights;
    double radius = 1.0;

    void validate() const
    {
        if (!(radius > 0.0)) throw DomainError("weighted l1 ball: radius must be positive");
        for (double w : weights) {
            if (!(w > 0.0)) throw DomainError("weighted l1 ball: weights must be positive");
        }
    }
};

inline double l1_norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
}

inline rvec project_l1_ball(std::span<const double> x, double radius)
{
    if (!(radius > 0.0)) throw DomainError("project_l1_ball: radius must be positive");
    rvec out(x.begin(), x.end());
    if (l1_norm(x) <= radius) return out;

    rvec u(x.size());
    std::transform(x.begin(), x.end(), u.begin(), [](double v) { return std::abs(v); });
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumsum += u[k];
        const double t = (cumsum - radius) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) theta = t;
        else break;
    }
    for (auto& v : out) v = std::copysign(std::max(std::abs(v) - theta, 0.0), v);
    return out;
}

// Euclidean projection onto a weighted l1 ball. The solution is
// sign(x_i) max(|x_i| - theta w_i, 0); theta is found from the sorted
// breakpoints |x_i| / w_i.
inline rvec project_weighted_l1_ball(std::span<const double> x, const WeightedL1Ball& ball)
{
    ball.validate();
    if (ball.weights.size() != x.size()) throw DimensionError("project_weighted_l1_ball: weight length mismatch");
    rvec out(x.begin(), x.end());
    double wsum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) wsum += ball.weights[i] * std::abs(x[i]);
    if (wsum <= ball.radius) return out;

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto bp = [&](std::size_t i) { return std::abs(x[i]) / ball.weights[i]; };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bp(a) > bp(b); });

    double num = 0.0, den = 0.0, theta = 0.0;
    for (std::size_t i : order) {
        const double w = ball.weights[i];
        num += w * std::abs(x[i]);
        den += w * w;
        const double t = (num - ball.radius) / den;
        if (bp(i) > t) theta = t;
        else break;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::copysign(std::max(std::abs(x[i]) - theta * ball.weights[i], 0.0), x[i]);
    }
    return out;
}

// prox of gamma ||B x||_inf for diagonal B > 0, by Moreau decomposition:
// q - gamma proj_C(q / gamma) with C = {x : sum_i |x_i| / B_ii <= 1}.
inline rvec prox_weighted_linf(std::span<const double> q, double gamma, std::span<const double> b_diag)
{
    if (!(gamma > 0.0)) throw DomainError("prox_weighted_linf: gamma must be positive");
    if (b_diag.size() != q.size()) throw DimensionError("prox_weighted_linf: diagonal length mismatch");
    WeightedL1Ball ball;
    ball.radius = 1.0;
    ball.weights.resize(q.size());
    rvec scaled(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(b_diag[i] > 0.0)) throw DomainError("prox_weighted_linf: diagonal entries must be positive");
        ball.weights[i] = 1.0 / b_diag[i];
        scaled[i] = q[i] / gamma;
    }
    rvec proj = project_weighted_l1_ball(scaled, ball);
    rvec out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = q[i] - gamma * proj[i];
    return out;
}

inline rvec project_box(std::span<const double> x, double lo, double hi)
{
    if (lo > hi) throw DomainError("project_box: empty box");
    rvec out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [=](double v) { return std::clamp(v, lo, hi); });
    return out;
}

namespace detail {

inline void check_K_tau(std::size_t n, double tau, double m, std::span<const double> metric)
{
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("project_K_tau: tau must lie in (0, 1]");
    if (static_cast<double>(n) * tau > m) {
        throw InfeasibleError("project_K_tau: N*tau = " + std::to_string(static_cast<double>(n) * tau)
                              + " exceeds budget m = " + std::to_string(m));
    }
    if (!metric.empty() && metric.size() != n) throw DimensionError("project_K_tau: metric length mismatch");
    for (double d : metric) {
        if (!(d > 0.0)) throw DomainError("project_K_tau: metric must be positive");
    }
}

} // namespace detail

// Projection onto K_tau = {p in [tau, 1]^N : ||p||_1 <= m} in the metric
// sum_i d_i (p_i - x_i)^2 (Euclidean when `metric` is empty).
// On the box, ||p||_1 = sum p, so the solution is clamp(x_i - nu / d_i, tau, 1)
// with the multiplier nu >= 0 located exactly among the sorted breakpoints.
inline rvec project_K_tau(std::span<const double> x, double tau, double m, std::span<const double> metric = {})
{
    const std::size_t n = x.size();
    detail::check_K_tau(n, tau, m, metric);
    auto d = [&](std::size_t i) { return metric.empty() ? 1.0 : metric[i]; };

    rvec out(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::clamp(x[i], tau, 1.0);
        total += out[i];
    }
    if (total <= m) return out;

    // Entry i is at 1 for nu <= d_i (x_i - 1), free until d_i (x_i - tau),
    // then at tau. g(nu) = sum_i p_i(nu) is continuous and nonincreasing.
    struct Breakpoint {
        double nu;
        std::size_t i;
        bool enters; // true: leaves the upper bound, false: hits the lower bound
    };
    std::vector<Breakpoint> bps;
    bps.reserve(2 * n);
    double fixed = 0.0;   // contribution of clamped entries at nu = 0
    double offset = 0.0;  // sum of x_i over free entries
    double slope = 0.0;   // sum of 1/d_i over free entries
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = d(i) * (x[i] - 1.0);
        const double lo = d(i) * (x[i] - tau);
        if (lo <= 0.0) {
            fixed += tau;
            continue;
        }
        if (hi > 0.0) {
            fixed += 1.0;
            bps.push_back({hi, i, true});
        } else {
            offset += x[i];
            slope += 1.0 / d(i);
        }
        bps.push_back({lo, i, false});
    }
    std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.nu < b.nu; });

    // g(nu) = fixed + offset - nu * slope between consecutive breakpoints.
    double nu = 0.0;
    bool found = false;
    for (const auto& bp : bps) {
        const double g_at = fixed + offset - bp.nu * slope;
        if (g_at <= m) {
            nu = slope > 0.0 ? (fixed + offset - m) / slope : bp.nu;
            found = true;
            break;
        }
        const double inv = 1.0 / d(bp.i);
        if (bp.enters) {
            fixed -= 1.0;
            offset += x[bp.i];
            slope += inv;
        } else {
            fixed += tau;
            offset -= x[bp.i];
            slope -= inv;
        }
    }
    if (!found) nu = bps.empty() ? 0.0 : bps.back().nu;
    for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(x[i] - nu / d(i), tau, 1.0);
    return out;
}

struct DykstraOptions {
    double tol = 1e-9;
    std::size_t max_iters = 10000;
};

struct DykstraReport {
    std::size_t iterations = 0;
    bool converged = false;
};

// Same projection by Dykstra's alternating corrections between the box and
// the l1 ball. Independent of the multiplier search above.
inline rvec project_K_tau_dykstra(std::span<const double> x, double tau, double m, std::span<const double> metric = {},
                                  const DykstraOptions& opt = {}, DykstraReport* report = nullptr)
{
    const std::size_t n = x.size();
    detail::check_K_tau(n, tau, m, metric);

    rvec sqrt_d(n, 1.0);
    WeightedL1Ball ball;
    ball.radius = m;
    ball.weights.assign(n, 1.0);
    for (std::size_t i = 0; i < metric.size(); ++i) {
        sqrt_d[i] = std::sqrt(metric[i]);
        ball.weights[i] = 1.0 / sqrt_d[i];
    }
    auto proj_ball = [&](const rvec& v) {
        rvec u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = sqrt_d[i] * v[i];
        u = project_weighted_l1_ball(u, ball);
        for (std::size_t i = 0; i < n; ++i) u[i] /= sqrt_d[i];
        return u;
    };

    rvec cur(x.begin(), x.end());
    rvec y(n), p_corr(n, 0.0), q_corr(n, 0.0), tmp(n);
    DykstraReport rep;
    for (rep.iterations = 1; rep.iterations <= opt.max_iters; ++rep.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = cur[i] + p_corr[i];
            y[i] = std::clamp(tmp[i], tau, 1.0);
            p_corr[i] = tmp[i] - y[i];
            tmp[i] = y[i] + q_corr[i];
        }
        rvec next = proj_ball(tmp);
        double change = 0.0, gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            q_corr[i] = tmp[i] - next[i];
            change += (next[i] - cur[i]) * (next[i] - cur[i]);
            gap += std::abs(next[i] - y[i]);
        }
        cur = std::move(next);
        if (std::sqrt(change) <= opt.tol && gap <= opt.tol) {
            rep.converged = true;
            break;
        }
    }
    if (rep.iterations > opt.max_iters) rep.iterations = opt.max_iters;
    if (report) *report = rep;
    for (auto& v : cur) v = std::clamp(v, tau, 1.0);
    return cur;
}

} // namespace vdsopt
