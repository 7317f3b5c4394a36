#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace vdsopt;

namespace {

const std::vector<BasisTag> real_kinds = {BasisTag::dirac, BasisTag::fourier, BasisTag::hadamard, BasisTag::haar,
                                          BasisTag::daubechies4};

BasisKind kind_of(BasisTag t) { return {t, 0, {}}; }

cvec random_vector(std::size_t n, std::uint64_t seed)
{
    CounterRng rng({seed, 7});
    cvec v(n);
    for (auto& z : v) z = {rng.uniform() - 0.5, rng.uniform() - 0.5};
    return v;
}

double max_diff(const cvec& a, const cvec& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TEST(Transforms, FourierMatchesDenseDft)
{
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 64u}) {
        const cvec x = random_vector(n, n);
        const auto F = oracle::dft_matrix(n);
        cvec ref(n);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t t = 0; t < n; ++t) ref[k] += F[k][t] * x[t];
        }
        EXPECT_LT(max_diff(analyze(BasisKind::fourier(), x), ref), 1e-12) << n;
    }
}

TEST(Transforms, ImpulseAndConstant)
{
    const std::size_t n = 16;
    cvec e(n);
    e[0] = 1.0;
    for (const auto& v : analyze(BasisKind::fourier(), e)) EXPECT_NEAR(std::abs(v - 0.25), 0.0, 1e-14);
    for (const auto& v : analyze(BasisKind::hadamard(), e)) EXPECT_NEAR(std::abs(v - 0.25), 0.0, 1e-14);
    // The constant signal has only the scaling coefficient under full-depth wavelets.
    cvec ones(n, complex_t{1.0});
    for (auto t : {BasisTag::haar, BasisTag::daubechies4}) {
        const cvec c = analyze(kind_of(t), ones);
        EXPECT_NEAR(c[0].real(), 4.0, 1e-12);
        for (std::size_t j = 1; j < n; ++j) EXPECT_NEAR(std::abs(c[j]), 0.0, 1e-12) << to_string(t) << " " << j;
    }
}

TEST(Transforms, HaarOneLevelPair)
{
    const cvec x = {1.0, 3.0};
    const cvec c = analyze(BasisKind::haar(), x);
    EXPECT_NEAR(c[0].real(), 4.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(std::abs(c[1]), 2.0 / std::sqrt(2.0), 1e-14);
}

TEST(Transforms, Daubechies4AnnihilatesLinearRamps)
{
    // Two vanishing moments: interior detail coefficients of a ramp vanish.
    const std::size_t n = 32;
    cvec x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = static_cast<double>(t);
    const cvec c = analyze(BasisKind::daubechies4(1), x);
    for (std::size_t k = n / 2; k + 1 < n; ++k) EXPECT_NEAR(std::abs(c[k]), 0.0, 1e-10) << k;
}

TEST(Transforms, DenseMatricesAreUnitary)
{
    for (auto t : real_kinds) {
        for (std::size_t n : {2u, 4u, 8u, 16u}) {
            const auto M = oracle::basis_matrix(kind_of(t), n);
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    complex_t s{};
                    for (std::size_t k = 0; k < n; ++k) s += std::conj(M[a][k]) * M[b][k];
                    EXPECT_NEAR(std::abs(s - (a == b ? 1.0 : 0.0)), 0.0, 1e-10) << to_string(t) << n;
                }
            }
        }
    }
}

TEST(Transforms, RoundTripAllKinds)
{
    for (auto t : real_kinds) {
        for (std::size_t n : {16u, 256u}) {
            const cvec x = random_vector(n, 3);
            EXPECT_LT(max_diff(synthesize(kind_of(t), analyze(kind_of(t), x)), x), 1e-10) << to_string(t);
            EXPECT_LT(max_diff(analyze(kind_of(t), synthesize(kind_of(t), x)), x), 1e-10) << to_string(t);
        }
    }
    CounterRng rng({1, 1});
    cvec mod(64);
    for (auto& v : mod) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const BasisKind mf = BasisKind::modulated_fourier(mod);
    const cvec x = random_vector(64, 4);
    EXPECT_LT(max_diff(synthesize(mf, analyze(mf, x)), x), 1e-10);
}

TEST(Transforms, PartialDepthRoundTrip)
{
    for (std::size_t levels : {1u, 2u, 3u}) {
        for (auto b : {BasisKind::haar(levels), BasisKind::daubechies4(levels)}) {
            const cvec x = random_vector(32, levels);
            EXPECT_LT(max_diff(synthesize(b, analyze(b, x)), x), 1e-12);
        }
    }
}

TEST(Transforms, GramRowMatchesDenseGram)
{
    for (auto s : real_kinds) {
        for (auto p : real_kinds) {
            for (std::size_t n : {4u, 8u, 16u}) {
                const BasisPair pair{kind_of(s), kind_of(p), n};
                const auto A = oracle::dense_gram(pair);
                for (std::size_t i = 0; i < n; ++i) {
                    EXPECT_LT(max_diff(gram_row(pair, i), A[i]), 1e-10) << pair.describe() << " row " << i;
                }
            }
        }
    }
}

TEST(Transforms, MaskedOperatorMatchesDenseRows)
{
    const BasisPair pair{BasisKind::fourier(), BasisKind::daubechies4(), 16};
    const auto A = oracle::dense_gram(pair);
    const index_set omega = {0, 3, 5, 11};
    MaskedOperator op(pair, omega);
    const cvec alpha = random_vector(16, 9);
    const cvec y = op.apply(alpha);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        complex_t s{};
        for (std::size_t j = 0; j < 16; ++j) s += A[omega[k]][j] * alpha[j];
        EXPECT_NEAR(std::abs(y[k] - s), 0.0, 1e-12);
    }
    // <A a, y> = <a, A^H y>
    const cvec yy = random_vector(omega.size(), 10);
    const cvec back = op.adjoint(yy);
    complex_t lhs{}, rhs{};
    for (std::size_t k = 0; k < omega.size(); ++k) lhs += std::conj(yy[k]) * y[k];
    for (std::size_t j = 0; j < 16; ++j) rhs += std::conj(back[j]) * alpha[j];
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
}

TEST(Transforms, Errors)
{
    EXPECT_THROW(analyze(BasisKind::fourier(), cvec(12)), DimensionError);
    EXPECT_THROW(analyze(BasisKind::haar(5), cvec(16)), DomainError);
    EXPECT_THROW(analyze(BasisKind::modulated_fourier(cvec(8, 2.0)), cvec(8)), DomainError);
    EXPECT_THROW(basis_tag_from_string("wavelet"), DomainError);
    const BasisPair pair{BasisKind::fourier(), BasisKind::haar(), 8};
    EXPECT_THROW(MaskedOperator(pair, {1, 1}), DomainError);
    EXPECT_THROW(MaskedOperator(pair, {8}), DimensionError);
    EXPECT_THROW(gram_row(pair, 8), DimensionError);
}

TEST(Transforms, TagNamesRoundTrip)
{
    for (auto t : real_kinds) EXPECT_EQ(basis_tag_from_string(to_string(t)), t);
    EXPECT_EQ(basis_tag_from_string("db4"), BasisTag::daubechies4);
}
