#pragma once

// Support-prior datasets: ingestion from text files and a synthetic
// generator of wavelet-sparse lines with coarse-scale-biased supports.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "io.hpp"
#include "sampling.hpp"

namespace vdsopt {

struct SupportDataset {
    std::vector<index_set> supports;
    std::size_t s = 0;
    std::size_t n = 0;
    std::string provenance;

    void validate() const
    {
        if (supports.empty()) throw DomainError("support dataset is empty");
        for (const auto& S : supports) {
            if (S.size() != s) throw DomainError("support dataset has ragged cardinalities");
            for (auto j : S) {
                if (j >= n) throw DimensionError("support index " + std::to_string(j) + " out of range");
            }
        }
    }
};

// Indices of the s largest magnitudes (ties broken by lower index), sorted.
inline index_set hard_threshold_support(std::span<const complex_t> c, std::size_t s)
{
    if (s > c.size()) throw DomainError("hard threshold level exceeds vector length");
    index_set idx(c.size());
    std::iota(idx.begin(), idx.end(), index_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](index_t a, index_t b) { return std::abs(c[a]) > std::abs(c[b]); });
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace detail {

inline std::vector<std::vector<std::string>> read_rows(const std::string& path)
{
    auto is = open_input(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto toks = split(line, ", \t");
        if (!toks.empty()) rows.push_back(std::move(toks));
    }
    if (rows.empty()) throw Error("'" + path + "' contains no data");
    return rows;
}

} // namespace detail

// One support per line: whitespace- or comma-separated 0-based indices.
inline SupportDataset ingest_support_dataset(const std::string& path, std::size_t n)
{
    SupportDataset ds;
    ds.n = n;
    ds.provenance = "supports:" + path;
    std::size_t lineno = 0;
    for (const auto& row : detail::read_rows(path)) {
        ++lineno;
        index_set S;
        for (const auto& tok : row) S.push_back(parse_uint(tok, "support index (row " + std::to_string(lineno) + ")"));
        std::sort(S.begin(), S.end());
        if (std::adjacent_find(S.begin(), S.end()) != S.end()) {
            throw DomainError("duplicate index in support row " + std::to_string(lineno));
        }
        ds.supports.push_back(std::move(S));
    }
    ds.s = ds.supports.front().size();
    ds.validate();
    return ds;
}

// One real coefficient vector per line, hard-thresholded at s.
inline SupportDataset ingest_coefficient_dataset(const std::string& path, std::size_t s)
{
    SupportDataset ds;
    ds.s = s;
    ds.provenance = "coefficients:" + path;
    for (const auto& row : detail::read_rows(path)) {
        cvec c;
        for (const auto& tok : row) c.emplace_back(parse_double(tok, "coefficient"), 0.0);
        if (ds.n == 0) ds.n = c.size();
        if (c.size() != ds.n) throw DomainError("coefficient rows have different lengths");
        ds.supports.push_back(hard_threshold_support(c, s));
    }
    ds.validate();
    return ds;
}

// One real signal line per row; each is decomposed in `basis` and thresholded.
inline SupportDataset ingest_signal_dataset(const std::string& path, std::size_t s, const BasisKind& basis)
{
    SupportDataset ds;
    ds.s = s;
    ds.provenance = "signals:" + path + ";basis=" + basis.describe();
    for (const auto& row : detail::read_rows(path)) {
        cvec x;
        for (const auto& tok : row) x.emplace_back(parse_double(tok, "sample"), 0.0);
        if (ds.n == 0) ds.n = x.size();
        if (x.size() != ds.n) throw DomainError("signal rows have different lengths");
        ds.supports.push_back(hard_threshold_support(analyze(basis, x), s));
    }
    ds.validate();
    return ds;
}

inline void write_support_dataset(std::ostream& os, const SupportDataset& ds)
{
    os << "# " << ds.provenance << "\n";
    for (const auto& S : ds.supports) {
        for (std::size_t k = 0; k < S.size(); ++k) os << (k ? " " : "") << S[k];
        os << "\n";
    }
}

// Scale of wavelet coefficient j in the [a_J | d_J | ... | d_1] layout with
// full depth: 0 for the scaling coefficient and the coarsest detail, then
// floor(log2 j).
inline std::size_t wavelet_scale(index_t j) { return j == 0 ? 0 : ilog2(j); }

// Synthetic "MRI-like" lines. Supports of size s are drawn without
// replacement with per-coefficient weight decay^scale, so coarse scales are
// favoured; nonzeros carry Steinhaus phases. Labelled synthetic.
struct SyntheticLineModel {
    std::size_t n = 256;
    std::size_t s = 12;
    double decay = 0.5;

    rvec weights() const
    {
        rvec w(n);
        for (std::size_t j = 0; j < n; ++j) w[j] = std::pow(decay, static_cast<double>(wavelet_scale(j)));
        return w;
    }

    // Weighted sampling without replacement: the s largest keys log(u) / w_j.
    index_set draw_support(CounterRng& rng) const
    {
        if (s > n) throw DomainError("synthetic lines: s exceeds N");
        const rvec w = weights();
        std::vector<std::pair<double, index_t>> keys(n);
        for (std::size_t j = 0; j < n; ++j) keys[j] = {std::log(rng.uniform_open_closed()) / w[j], j};
        std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(s), keys.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        index_set S(s);
        for (std::size_t k = 0; k < s; ++k) S[k] = keys[k].second;
        std::sort(S.begin(), S.end());
        return S;
    }

    SparseSignal draw_signal(CounterRng& rng) const { return signal_on_support(n, draw_support(rng), rng); }

    SupportDataset dataset(std::size_t count, RngSeed seed) const
    {
        SupportDataset ds;
        ds.n = n;
        ds.s = s;
        ds.provenance = "synthetic-mri-like;decay=" + format_double(decay) + ";count=" + std::to_string(count);
        CounterRng rng(seed);
        for (std::size_t k = 0; k < count; ++k) ds.supports.push_back(draw_support(rng));
        return ds;
    }
};

} // namespace vdsopt
