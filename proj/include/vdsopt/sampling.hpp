#pragma once

// Random index selection (Bernoulli and i.i.d. models), synthetic sparse
// signals with Steinhaus phases, and measurement.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>

#include "rng.hpp"
#include "transforms.hpp"

namespace vdsopt {

enum class SamplingModel { bernoulli, iid };

struct SparseSignal {
    cvec alpha;
    index_set support;

    std::size_t n() const { return alpha.size(); }
    std::size_t sparsity() const { return support.size(); }
};

struct MeasurementSet {
    // Sorted and duplicate-free under the Bernoulli model; draw order under iid.
    index_set omega;
    cvec y;
    SamplingModel model = SamplingModel::bernoulli;
};

// Omega = {l : delta_l = 1} with independent delta_l ~ Bernoulli(p_l). Sorted.
inline index_set bernoulli_select(std::span<const double> p, CounterRng& rng)
{
    index_set omega;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DomainError("bernoulli_select: probabilities must lie in [0, 1]");
        if (rng.uniform() < p[i]) omega.push_back(i);
    }
    return omega;
}

inline index_set bernoulli_select(std::span<const double> p, RngSeed seed)
{
    CounterRng rng(seed);
    return bernoulli_select(p, rng);
}

// m draws with replacement from the discrete measure P, in draw order.
inline index_set iid_select(std::span<const double> P, std::size_t m, CounterRng& rng)
{
    rvec cdf(P.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (!(P[i] >= 0.0)) throw DomainError("iid_select: probabilities must be nonnegative");
        acc += P[i];
        cdf[i] = acc;
    }
    if (P.empty() || std::abs(acc - 1.0) > 1e-9) throw DomainError("iid_select: probabilities must sum to 1");
    index_set draws(m);
    for (auto& d : draws) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        d = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), P.size() - 1);
        // Skip zero-probability cells that share the cumulative value.
        while (P[d] == 0.0 && d + 1 < P.size()) ++d;
    }
    return draws;
}

inline index_set iid_select(std::span<const double> P, std::size_t m, RngSeed seed)
{
    CounterRng rng(seed);
    return iid_select(P, m, rng);
}

// Nonzero entry a e^{i theta}, a ~ U(0, 1], theta ~ U[0, 2 pi).
inline complex_t steinhaus_entry(CounterRng& rng)
{
    const double amp = rng.uniform_open_closed();
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return std::polar(amp, theta);
}

inline SparseSignal signal_on_support(std::size_t n, index_set support, CounterRng& rng)
{
    std::sort(support.begin(), support.end());
    SparseSignal sig{cvec(n, complex_t{}), std::move(support)};
    for (auto j : sig.support) {
        if (j >= n) throw DimensionError("signal support index out of range");
        sig.alpha[j] = steinhaus_entry(rng);
    }
    return sig;
}

// s-sparse signal with support drawn uniformly without replacement.
inline SparseSignal gen_sparse_signal(std::size_t n, std::size_t s, CounterRng& rng)
{
    if (s > n) throw DomainError("gen_sparse_signal: sparsity exceeds N");
    index_set idx(n);
    std::iota(idx.begin(), idx.end(), index_t{0});
    for (std::size_t k = 0; k < s; ++k) {
        const auto j = k + rng.below(n - k);
        std::swap(idx[k], idx[j]);
    }
    idx.resize(s);
    return signal_on_support(n, std::move(idx), rng);
}

inline SparseSignal gen_sparse_signal(std::size_t n, std::size_t s, RngSeed seed)
{
    CounterRng rng(seed);
    return gen_sparse_signal(n, s, rng);
}

// y = A_Omega alpha. Under the iid model duplicate indices give repeated rows.
inline MeasurementSet measure(const SparseSignal& signal, index_set omega, const BasisPair& pair,
                              SamplingModel model = SamplingModel::bernoulli)
{
    if (signal.n() != pair.n) throw DimensionError("measure: signal length mismatch");
    MeasurementSet ms;
    ms.model = model;
    if (model == SamplingModel::bernoulli) {
        ms.y = apply_A_masked(pair, omega, signal.alpha);
        ms.omega = std::move(omega);
        return ms;
    }
    const cvec full = apply_A_masked(pair, full_mask(pair.n), signal.alpha);
    ms.y.reserve(omega.size());
    for (auto i : omega) {
        if (i >= pair.n) throw DimensionError("measure: index out of range");
        ms.y.push_back(full[i]);
    }
    ms.omega = std::move(omega);
    return ms;
}

inline void write_complex_csv(std::ostream& os, std::span<const index_t> index, std::span<const complex_t> v)
{
    os << "index,re,im\n" << std::setprecision(17);
    for (std::size_t k = 0; k < v.size(); ++k) os << index[k] << "," << v[k].real() << "," << v[k].imag() << "\n";
}

inline void write_signal_csv(std::ostream& os, const SparseSignal& s)
{
    const auto idx = full_mask(s.n());
    write_complex_csv(os, idx, s.alpha);
}

inline void write_measurements_csv(std::ostream& os, const MeasurementSet& ms)
{
    write_complex_csv(os, ms.omega, ms.y);
}

} // namespace vdsopt
