#pragma once

// Matrix-free orthonormal bases. A basis is represented by its synthesis
// matrix (columns are basis vectors); `analyze` applies the adjoint and
// `synthesize` applies the matrix itself. All transforms are unitary.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>

#include "common.hpp"

namespace vdsopt {

enum class BasisTag { dirac, fourier, hadamard, haar, daubechies4, modulated_fourier };

inline const char* to_string(BasisTag t)
{
    switch (t) {
    case BasisTag::dirac: return "dirac";
    case BasisTag::fourier: return "fourier";
    case BasisTag::hadamard: return "hadamard";
    case BasisTag::haar: return "haar";
    case BasisTag::daubechies4: return "daubechies4";
    case BasisTag::modulated_fourier: return "modulated_fourier";
    }
    return "?";
}

inline BasisTag basis_tag_from_string(const std::string& s)
{
    static const std::pair<const char*, BasisTag> table[] = {
        {"dirac", BasisTag::dirac},
        {"fourier", BasisTag::fourier},
        {"hadamard", BasisTag::hadamard},
        {"haar", BasisTag::haar},
        {"daubechies4", BasisTag::daubechies4},
        {"db4", BasisTag::daubechies4},
        {"modulated_fourier", BasisTag::modulated_fourier},
    };
    for (const auto& [name, tag] : table) {
        if (s == name) return tag;
    }
    throw DomainError("unknown basis kind '" + s + "'");
}

struct BasisKind {
    BasisTag tag = BasisTag::dirac;
    // Decomposition depth for wavelet kinds; 0 means full depth log2(N).
    std::size_t levels = 0;
    // Unit-magnitude pre-modulation, modulated_fourier only.
    cvec modulation;

    static BasisKind dirac() { return {BasisTag::dirac, 0, {}}; }
    static BasisKind fourier() { return {BasisTag::fourier, 0, {}}; }
    static BasisKind hadamard() { return {BasisTag::hadamard, 0, {}}; }
    static BasisKind haar(std::size_t levels = 0) { return {BasisTag::haar, levels, {}}; }
    static BasisKind daubechies4(std::size_t levels = 0) { return {BasisTag::daubechies4, levels, {}}; }
    static BasisKind modulated_fourier(cvec modulation)
    {
        return {BasisTag::modulated_fourier, 0, std::move(modulation)};
    }

    bool is_wavelet() const { return tag == BasisTag::haar || tag == BasisTag::daubechies4; }

    // Depth actually used for a signal of length n.
    std::size_t depth(std::size_t n) const { return levels == 0 ? ilog2(n) : levels; }

    std::string describe() const
    {
        std::string s = to_string(tag);
        if (is_wavelet() && levels != 0) s += ":" + std::to_string(levels);
        return s;
    }
};

// Throws if `n` is not a valid dimension for `basis`.
inline void validate_basis(const BasisKind& basis, std::size_t n)
{
    if (n == 0) throw DimensionError("dimension must be positive");
    if (basis.tag != BasisTag::dirac && !is_power_of_two(n)) {
        throw DimensionError(std::string(to_string(basis.tag)) + " requires a power-of-two length, got "
                             + std::to_string(n));
    }
    if (basis.is_wavelet()) {
        const auto d = basis.depth(n);
        if (d < 1 || d > ilog2(n)) {
            throw DomainError("wavelet levels must lie in [1, log2(N)], got " + std::to_string(d));
        }
    }
    if (basis.tag == BasisTag::modulated_fourier) {
        if (basis.modulation.size() != n) throw DimensionError("modulation length must equal N");
        for (const auto& v : basis.modulation) {
            if (std::abs(std::abs(v) - 1.0) > 1e-12) throw DomainError("modulation entries must have magnitude 1");
        }
    }
}

namespace detail {

// Twiddle table e^{-2 pi i k / n}, k < n/2, cached per thread.
inline const cvec& twiddles(std::size_t n)
{
    thread_local std::unordered_map<std::size_t, cvec> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    cvec w(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        w[k] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

// Unitary radix-2 DFT, kernel e^{-2 pi i kn/N}/sqrt(N) (inverse when `inverse`).
inline void fft_inplace(std::span<complex_t> x, bool inverse)
{
    const std::size_t n = x.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const cvec& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                complex_t tw = w[k * stride];
                if (inverse) tw = std::conj(tw);
                const complex_t u = x[start + k];
                const complex_t v = x[start + k + half] * tw;
                x[start + k] = u + v;
                x[start + k + half] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= scale;
}

// Sylvester-ordered Walsh-Hadamard, normalized by 1/sqrt(N). Self-inverse.
inline void hadamard_inplace(std::span<complex_t> x)
{
    const std::size_t n = x.size();
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t start = 0; start < n; start += 2 * len) {
            for (std::size_t k = start; k < start + len; ++k) {
                const complex_t u = x[k];
                const complex_t v = x[k + len];
                x[k] = u + v;
                x[k + len] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= scale;
}

struct Filter {
    std::span<const double> low;
    double high(std::size_t k) const
    {
        // Quadrature mirror: g_k = (-1)^k h_{L-1-k}
        const double h = low[low.size() - 1 - k];
        return (k % 2 == 0) ? h : -h;
    }
};

inline Filter haar_filter()
{
    static const double h[] = {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};
    return {h};
}

inline Filter daubechies4_filter()
{
    static const double h[] = {
        (1.0 + std::numbers::sqrt3) / (4.0 * std::numbers::sqrt2),
        (3.0 + std::numbers::sqrt3) / (4.0 * std::numbers::sqrt2),
        (3.0 - std::numbers::sqrt3) / (4.0 * std::numbers::sqrt2),
        (1.0 - std::numbers::sqrt3) / (4.0 * std::numbers::sqrt2),
    };
    return {h};
}

// Periodized multi-level DWT. Output layout: [a_J | d_J | d_{J-1} | ... | d_1].
inline void dwt_inplace(std::span<complex_t> x, const Filter& f, std::size_t levels, cvec& work)
{
    const std::size_t taps = f.low.size();
    work.resize(x.size());
    for (std::size_t len = x.size(), lev = 0; lev < levels; ++lev, len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            complex_t a{}, d{};
            for (std::size_t t = 0; t < taps; ++t) {
                const complex_t v = x[(2 * k + t) % len];
                a += f.low[t] * v;
                d += f.high(t) * v;
            }
            work[k] = a;
            work[half + k] = d;
        }
        std::copy_n(work.begin(), len, x.begin());
    }
}

inline void idwt_inplace(std::span<complex_t> x, const Filter& f, std::size_t levels, cvec& work)
{
    const std::size_t taps = f.low.size();
    work.resize(x.size());
    std::size_t len = x.size() >> (levels - 1);
    for (std::size_t lev = 0; lev < levels; ++lev, len *= 2) {
        const std::size_t half = len / 2;
        std::fill_n(work.begin(), len, complex_t{});
        for (std::size_t k = 0; k < half; ++k) {
            const complex_t a = x[k];
            const complex_t d = x[half + k];
            for (std::size_t t = 0; t < taps; ++t) {
                work[(2 * k + t) % len] += f.low[t] * a + f.high(t) * d;
            }
        }
        std::copy_n(work.begin(), len, x.begin());
    }
}

} // namespace detail

// Applies the adjoint of `basis` in place (basis coefficients of x).
inline void analyze_inplace(const BasisKind& basis, std::span<complex_t> x, cvec& work)
{
    switch (basis.tag) {
    case BasisTag::dirac: return;
    case BasisTag::fourier: detail::fft_inplace(x, false); return;
    case BasisTag::hadamard: detail::hadamard_inplace(x); return;
    case BasisTag::haar: detail::dwt_inplace(x, detail::haar_filter(), basis.depth(x.size()), work); return;
    case BasisTag::daubechies4:
        detail::dwt_inplace(x, detail::daubechies4_filter(), basis.depth(x.size()), work);
        return;
    case BasisTag::modulated_fourier:
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= basis.modulation[i];
        detail::fft_inplace(x, false);
        return;
    }
}

// Applies `basis` in place (signal from coefficients).
inline void synthesize_inplace(const BasisKind& basis, std::span<complex_t> c, cvec& work)
{
    switch (basis.tag) {
    case BasisTag::dirac: return;
    case BasisTag::fourier: detail::fft_inplace(c, true); return;
    case BasisTag::hadamard: detail::hadamard_inplace(c); return;
    case BasisTag::haar: detail::idwt_inplace(c, detail::haar_filter(), basis.depth(c.size()), work); return;
    case BasisTag::daubechies4:
        detail::idwt_inplace(c, detail::daubechies4_filter(), basis.depth(c.size()), work);
        return;
    case BasisTag::modulated_fourier:
        detail::fft_inplace(c, true);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::conj(basis.modulation[i]);
        return;
    }
}

inline cvec analyze(const BasisKind& basis, std::span<const complex_t> x)
{
    validate_basis(basis, x.size());
    cvec out(x.begin(), x.end()), work;
    analyze_inplace(basis, out, work);
    return out;
}

inline cvec synthesize(const BasisKind& basis, std::span<const complex_t> c)
{
    validate_basis(basis, c.size());
    cvec out(c.begin(), c.end()), work;
    synthesize_inplace(basis, out, work);
    return out;
}

// Sensing basis Phi and sparsity basis Psi on dimension n. A = Phi^H Psi.
struct BasisPair {
    BasisKind sensing;
    BasisKind sparsity;
    std::size_t n = 0;

    void validate() const
    {
        validate_basis(sensing, n);
        validate_basis(sparsity, n);
    }

    std::string describe() const
    {
        return sensing.describe() + "/" + sparsity.describe() + "/N=" + std::to_string(n);
    }
};

// Row i of A: entries <phi_i, psi_j> = phi_i^H psi_j for all j.
inline cvec gram_row(const BasisPair& pair, index_t i, cvec& work)
{
    if (i >= pair.n) throw DimensionError("gram_row index " + std::to_string(i) + " out of range");
    cvec v(pair.n, complex_t{});
    v[i] = 1.0;
    synthesize_inplace(pair.sensing, v, work);
    analyze_inplace(pair.sparsity, v, work);
    for (auto& e : v) e = std::conj(e);
    return v;
}

inline cvec gram_row(const BasisPair& pair, index_t i)
{
    pair.validate();
    cvec work;
    return gram_row(pair, i, work);
}

inline void validate_mask(std::span<const index_t> omega, std::size_t n)
{
    std::vector<char> seen(n, 0);
    for (auto i : omega) {
        if (i >= n) throw DimensionError("mask index " + std::to_string(i) + " out of range");
        if (seen[i]) throw DomainError("duplicate index " + std::to_string(i) + " in mask");
        seen[i] = 1;
    }
}

// A_Omega = Phi_Omega^H Psi as an operator with reusable workspace.
// Not thread-safe; use one instance per thread.
class MaskedOperator {
public:
    MaskedOperator(BasisPair pair, index_set omega) : pair_(std::move(pair)), omega_(std::move(omega))
    {
        pair_.validate();
        validate_mask(omega_, pair_.n);
        buf_.resize(pair_.n);
    }

    std::size_t n() const { return pair_.n; }
    std::size_t rows() const { return omega_.size(); }
    const index_set& omega() const { return omega_; }
    const BasisPair& pair() const { return pair_; }

    void apply(std::span<const complex_t> alpha, std::span<complex_t> y)
    {
        if (alpha.size() != pair_.n || y.size() != omega_.size()) throw DimensionError("apply: size mismatch");
        std::copy(alpha.begin(), alpha.end(), buf_.begin());
        synthesize_inplace(pair_.sparsity, buf_, work_);
        analyze_inplace(pair_.sensing, buf_, work_);
        for (std::size_t k = 0; k < omega_.size(); ++k) y[k] = buf_[omega_[k]];
    }

    void adjoint(std::span<const complex_t> y, std::span<complex_t> alpha)
    {
        if (alpha.size() != pair_.n || y.size() != omega_.size()) throw DimensionError("adjoint: size mismatch");
        std::fill(buf_.begin(), buf_.end(), complex_t{});
        for (std::size_t k = 0; k < omega_.size(); ++k) buf_[omega_[k]] = y[k];
        synthesize_inplace(pair_.sensing, buf_, work_);
        analyze_inplace(pair_.sparsity, buf_, work_);
        std::copy(buf_.begin(), buf_.end(), alpha.begin());
    }

    cvec apply(std::span<const complex_t> alpha)
    {
        cvec y(omega_.size());
        apply(alpha, y);
        return y;
    }

    cvec adjoint(std::span<const complex_t> y)
    {
        cvec a(pair_.n);
        adjoint(y, a);
        return a;
    }

private:
    BasisPair pair_;
    index_set omega_;
    cvec buf_;
    cvec work_;
};

inline cvec apply_A_masked(const BasisPair& pair, const index_set& omega, std::span<const complex_t> alpha)
{
    return MaskedOperator(pair, omega).apply(alpha);
}

inline cvec apply_A_masked_adjoint(const BasisPair& pair, const index_set& omega, std::span<const complex_t> y)
{
    return MaskedOperator(pair, omega).adjoint(y);
}

inline index_set full_mask(std::size_t n)
{
    index_set o(n);
    for (std::size_t i = 0; i < n; ++i) o[i] = i;
    return o;
}

} // namespace vdsopt
