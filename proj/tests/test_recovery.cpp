#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace vdsopt;

namespace {

double rel_err(const cvec& a, const cvec& b)
{
    double e = 0.0, r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        e += std::norm(a[i] - b[i]);
        r += std::norm(a[i]);
    }
    return std::sqrt(e / r);
}

} // namespace

TEST(Recovery, FullSamplingIsExact)
{
    for (auto sparsity : {BasisKind::haar(), BasisKind::daubechies4(), BasisKind::dirac()}) {
        const BasisPair pair{BasisKind::fourier(), sparsity, 128};
        CounterRng rng({31, 0});
        const auto sig = gen_sparse_signal(128, 10, rng);
        const auto ms = measure(sig, full_mask(128), pair);
        const auto r = basis_pursuit(ms, pair);
        EXPECT_LE(rel_err(sig.alpha, r.alpha), 1e-10) << sparsity.describe();
        EXPECT_TRUE(r.converged);
    }
}

TEST(Recovery, RecoversSparseSignalFromFewMeasurements)
{
    const BasisPair pair{BasisKind::fourier(), BasisKind::dirac(), 128};
    CounterRng rng({32, 0});
    const auto sig = gen_sparse_signal(128, 5, rng);
    const auto omega = bernoulli_select(SamplingProfile::uniform(128, 60).p, rng);
    const auto r = basis_pursuit(measure(sig, omega, pair), pair);
    EXPECT_TRUE(is_recovered(sig.alpha, r.alpha));
    EXPECT_LT(r.constraint_residual, 1e-10);
}

TEST(Recovery, MatchesConvexOracleObjective)
{
    CounterRng rng({33, 0});
    for (int t = 0; t < 12; ++t) {
        const std::size_t n = t % 2 ? 8 : 4;
        const BasisPair pair{BasisKind::fourier(), t % 3 ? BasisKind::haar() : BasisKind::dirac(), n};
        const auto sig = gen_sparse_signal(n, n / 2, rng);
        index_set omega;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.6 || omega.empty()) omega.push_back(i);
        }
        const auto ms = measure(sig, omega, pair);
        BPConfig cfg;
        cfg.tol = 1e-12;
        cfg.max_iters = 200000;
        const auto r = basis_pursuit(ms, pair, cfg);
        const auto A = oracle::dense_gram(pair);
        std::vector<cvec> M;
        for (auto i : omega) M.push_back(A[i]);
        const cvec ref = oracle::basis_pursuit_cp(M, ms.y, 100000);
        EXPECT_NEAR(l1_norm(std::span<const complex_t>(r.alpha)), l1_norm(std::span<const complex_t>(ref)), 1e-5);
        EXPECT_LT(r.constraint_residual, 1e-9);
    }
}

TEST(Recovery, RecoveryPredicateIsInclusive)
{
    // ||alpha|| = 4 exactly, so the threshold is 1e-3 * 4 and an error
    // orthogonal to alpha of exactly that size sits on the boundary.
    const cvec b = {4.0, 0.0};
    const double at = recovery_threshold * 4.0;
    EXPECT_TRUE(is_recovered(b, cvec{4.0, at}));
    EXPECT_FALSE(is_recovered(b, cvec{4.0, std::nextafter(at, 1.0)}));
    EXPECT_TRUE(is_recovered(b, cvec{4.0, std::nextafter(at, 0.0)}));
    EXPECT_TRUE(is_recovered(cvec(3), cvec(3)));
    EXPECT_FALSE(is_recovered(cvec(3), cvec{0.0, 1e-20, 0.0}));
    EXPECT_THROW(is_recovered(cvec(2), cvec(3)), DimensionError);
}

TEST(Recovery, DegenerateInputs)
{
    const BasisPair pair{BasisKind::fourier(), BasisKind::haar(), 16};
    MaskedOperator empty(pair, {});
    const auto r0 = basis_pursuit(cvec{}, empty);
    EXPECT_TRUE(r0.converged);
    for (const auto& v : r0.alpha) EXPECT_EQ(v, complex_t{});
    MaskedOperator op(pair, {1, 2});
    const auto r1 = basis_pursuit(cvec(2), op);
    for (const auto& v : r1.alpha) EXPECT_EQ(v, complex_t{});
    EXPECT_THROW(basis_pursuit(cvec(3), op), DimensionError);
    BPConfig bad;
    bad.relaxation = 2.0;
    EXPECT_THROW(basis_pursuit(cvec(2), op, bad), DomainError);
}

TEST(Recovery, IidDuplicatesAreHarmless)
{
    const BasisPair pair{BasisKind::fourier(), BasisKind::dirac(), 64};
    CounterRng rng({34, 0});
    const auto sig = gen_sparse_signal(64, 3, rng);
    index_set draws = iid_select(rvec(64, 1.0 / 64), 50, rng);
    const auto ms = measure(sig, draws, pair, SamplingModel::iid);
    const auto r = basis_pursuit(ms, pair);
    EXPECT_LT(r.constraint_residual, 1e-9);
}

TEST(Recovery, SoftThresholdPreservesPhase)
{
    cvec v = {std::polar(2.0, 0.7), std::polar(0.5, -1.0)};
    soft_threshold_inplace(v, 1.0);
    EXPECT_NEAR(std::abs(v[0]), 1.0, 1e-15);
    EXPECT_NEAR(std::arg(v[0]), 0.7, 1e-15);
    EXPECT_EQ(v[1], complex_t{});
}
