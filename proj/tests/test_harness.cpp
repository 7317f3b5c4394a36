#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"

using namespace vdsopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("vdsopt_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path);
    os << text;
}

std::string slurp(const fs::path& path)
{
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ExperimentSpec small_spec()
{
    ExperimentSpec e;
    e.n = 32;
    e.s = 3;
    e.m_grid = {8, 16, 24};
    e.trials = 10;
    e.arms = {ArmSpec::parse("uniform"), ArmSpec::parse("optimized_B"), ArmSpec::parse("spread_spectrum")};
    e.workers = 1;
    e.plot = false;
    return e;
}

} // namespace

TEST(Io, KeyValues)
{
    std::stringstream ss("# comment\n a = 1 \nb=two words # trailing\n\n");
    const auto kv = parse_key_values(ss);
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two words");
    std::stringstream bad("novalue\n");
    EXPECT_THROW(parse_key_values(bad), Error);
}

TEST(Io, ProfileRoundTripIsBitwise)
{
    CounterRng rng({41, 0});
    rvec p(100);
    for (auto& v : p) v = rng.uniform() * std::pow(10.0, -static_cast<double>(rng.below(12)));
    std::stringstream ss;
    write_profile_csv(ss, p);
    EXPECT_EQ(ss.str().substr(0, 8), "index,p\n");
    const rvec back = read_indexed_csv(ss);
    ASSERT_EQ(back.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(back[i], p[i]);
}

TEST(Io, IndexedCsvErrors)
{
    std::stringstream gap("index,p\n0,0.5\n2,0.5\n");
    EXPECT_THROW(read_indexed_csv(gap), Error);
    std::stringstream empty("index,p\n");
    EXPECT_THROW(read_indexed_csv(empty), Error);
    std::stringstream junk("index,p\n0,abc\n");
    EXPECT_THROW(read_indexed_csv(junk), Error);
}

TEST(Datasets, IngestSupports)
{
    const auto dir = scratch("supports");
    write_text(dir / "ok.txt", "# two rows\n0 3 5\n1, 2, 7\n");
    const auto ds = ingest_support_dataset((dir / "ok.txt").string(), 8);
    EXPECT_EQ(ds.s, 3u);
    EXPECT_EQ(ds.supports.size(), 2u);
    EXPECT_EQ(ds.supports[1], (index_set{1, 2, 7}));

    write_text(dir / "empty.txt", "");
    EXPECT_THROW(ingest_support_dataset((dir / "empty.txt").string(), 8), Error);
    write_text(dir / "ragged.txt", "0 1\n2\n");
    EXPECT_THROW(ingest_support_dataset((dir / "ragged.txt").string(), 8), DomainError);
    write_text(dir / "range.txt", "0 8\n");
    EXPECT_THROW(ingest_support_dataset((dir / "range.txt").string(), 8), DimensionError);
    write_text(dir / "junk.txt", "0 x\n");
    EXPECT_THROW(ingest_support_dataset((dir / "junk.txt").string(), 8), Error);
    EXPECT_THROW(ingest_support_dataset((dir / "missing.txt").string(), 8), Error);
}

TEST(Datasets, IdenticalSupportsGiveSingleSupportC)
{
    const auto dir = scratch("identical");
    write_text(dir / "same.txt", "1 4 6\n1 4 6\n1 4 6\n");
    const auto ds = ingest_support_dataset((dir / "same.txt").string(), 16);
    const BasisPair pair{BasisKind::fourier(), BasisKind::haar(), 16};
    const auto a = build_C(pair, ds.supports, ds.s);
    const auto b = build_C(pair, index_set{1, 4, 6});
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-15);
}

TEST(Datasets, CoefficientAndSignalModes)
{
    const auto dir = scratch("coeffs");
    write_text(dir / "c.txt", "0.1 -5 0.2 3\n1 1 1 1\n");
    const auto ds = ingest_coefficient_dataset((dir / "c.txt").string(), 2);
    EXPECT_EQ(ds.supports[0], (index_set{1, 3}));
    EXPECT_EQ(ds.supports[1], (index_set{0, 1}));
    const auto all = ingest_coefficient_dataset((dir / "c.txt").string(), 4);
    EXPECT_EQ(all.supports[0], full_mask(4));

    // A constant line is a single scaling coefficient under full-depth Haar.
    write_text(dir / "s.txt", "2 2 2 2 2 2 2 2\n");
    const auto sig = ingest_signal_dataset((dir / "s.txt").string(), 1, BasisKind::haar());
    EXPECT_EQ(sig.supports[0], (index_set{0}));
}

TEST(Datasets, SyntheticLinesFavourCoarseScales)
{
    const SyntheticLineModel model{256, 12, 0.5};
    const auto ds = model.dataset(300, {1, 2});
    ds.validate();
    std::size_t coarse = 0, fine = 0;
    for (const auto& S : ds.supports) {
        for (auto j : S) (j < 32 ? coarse : fine) += 1;
    }
    // Coarse indices are 1/8 of the range but should take most of the mass.
    EXPECT_GT(coarse, fine);
    EXPECT_EQ(wavelet_scale(0), 0u);
    EXPECT_EQ(wavelet_scale(1), 0u);
    EXPECT_EQ(wavelet_scale(2), 1u);
    EXPECT_EQ(wavelet_scale(255), 7u);
}

TEST(Harness, PowerlawProfile)
{
    const BasisKind f = BasisKind::fourier();
    const auto flat = powerlaw_profile(64, 20, 0.0, f);
    for (double v : flat.p) EXPECT_NEAR(v, 20.0 / 64.0, 1e-12);
    for (double d : {0.5, 1.0, 3.0, 12.0}) {
        const auto prof = powerlaw_profile(64, 20, d, f);
        EXPECT_NEAR(prof.sum(), 20.0, 1e-9);
        EXPECT_EQ(*std::max_element(prof.p.begin(), prof.p.end()), prof.p[0]);
        EXPECT_NEAR(prof.p[5], prof.p[64 - 5], 1e-15);
    }
    EXPECT_THROW(powerlaw_profile(64, 65, 1.0, f), InfeasibleError);
    EXPECT_THROW(powerlaw_profile(64, 20, -1.0, f), DomainError);
}

TEST(Harness, HadamardSequency)
{
    // Row i of the Sylvester matrix has sequency(i) sign changes.
    const std::size_t n = 16;
    for (std::size_t i = 0; i < n; ++i) {
        cvec e(n);
        e[i] = 1.0;
        const cvec row = synthesize(BasisKind::hadamard(), e);
        std::size_t changes = 0;
        for (std::size_t k = 1; k < n; ++k) changes += (row[k].real() > 0) != (row[k - 1].real() > 0);
        EXPECT_EQ(frequency_distance(BasisKind::hadamard(), n, i).first, static_cast<double>(changes)) << i;
    }
}

TEST(Harness, ArmParsing)
{
    EXPECT_EQ(ArmSpec::parse("powerlaw:2").name(), "powerlaw_2");
    EXPECT_EQ(ArmSpec::parse("powerlaw:1.5").spec(), "powerlaw:1.5");
    EXPECT_EQ(ArmSpec::parse("file:/tmp/prof.csv").name(), "file_prof");
    EXPECT_THROW(ArmSpec::parse("bogus"), DomainError);
    EXPECT_THROW(ArmSpec::parse("file"), DomainError);
    EXPECT_THROW(ArmSpec::parse("uniform:3"), DomainError);
}

TEST(Harness, SpecRoundTripAndValidation)
{
    auto e = small_spec();
    e.lambda = 0.1234567890123;
    const auto back = ExperimentSpec::from_key_values(e.to_key_values());
    EXPECT_EQ(back.to_key_values(), e.to_key_values());
    EXPECT_EQ(back.lambda, e.lambda);

    auto bad = small_spec();
    bad.trials = 0;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = small_spec();
    bad.m_grid = {16, 8};
    EXPECT_THROW(bad.validate(), DomainError);
    bad = small_spec();
    bad.tau = 0.5;
    EXPECT_THROW(bad.validate(), InfeasibleError);
    bad = small_spec();
    bad.arms.push_back(ArmSpec::parse("optimized_C"));
    EXPECT_THROW(bad.validate(), DomainError);
    KeyValues kv{{"nonsense", "1"}};
    EXPECT_THROW(ExperimentSpec::from_key_values(kv), Error);
}

TEST(Harness, WilsonInterval)
{
    const auto [lo, hi] = wilson_interval(50, 100);
    EXPECT_NEAR(lo, 0.4038, 1e-4);
    EXPECT_NEAR(hi, 0.5962, 1e-4);
    const auto [l0, h0] = wilson_interval(0, 20);
    EXPECT_EQ(l0, 0.0);
    EXPECT_GT(h0, 0.0);
    const auto [l1, h1] = wilson_interval(20, 20);
    EXPECT_LT(l1, 1.0);
    EXPECT_EQ(h1, 1.0);
}

TEST(Harness, ZeroSparsityAlwaysRecovers)
{
    auto e = small_spec();
    e.s = 0;
    const auto res = run_phase_transition(e);
    for (const auto& c : res.curves) {
        for (const auto& r : c.rows) EXPECT_EQ(r.probability, 1.0);
    }
}

TEST(Harness, FullSamplingAlwaysRecovers)
{
    auto e = small_spec();
    e.m_grid = {32};
    e.arms = {ArmSpec::parse("uniform"), ArmSpec::parse("powerlaw:2"), ArmSpec::parse("spread_spectrum")};
    const auto res = run_phase_transition(e);
    for (const auto& c : res.curves) EXPECT_EQ(c.rows[0].probability, 1.0) << c.arm;
}

TEST(Harness, UniformCurveIsMonotoneUpToNoise)
{
    ExperimentSpec e;
    e.sensing = BasisKind::dirac();
    e.sparsity = BasisKind::fourier();
    e.n = 64;
    e.s = 4;
    e.m_grid = {8, 12, 16, 20, 24, 32, 40};
    e.trials = 200;
    e.arms = {ArmSpec::parse("uniform")};
    e.workers = 1;
    const auto res = run_phase_transition(e);
    const auto& rows = res.curves[0].rows;
    int violations = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double drop = rows[k - 1].probability - rows[k].probability;
        if (drop > 0) {
            ++violations;
            const double se = std::hypot(rows[k - 1].standard_error(), rows[k].standard_error());
            EXPECT_LE(drop, 2.0 * se);
        }
    }
    EXPECT_LE(violations, 1);
    EXPECT_GT(rows.back().probability, rows.front().probability);
}

TEST(Harness, ResultsIndependentOfWorkerCount)
{
    auto e = small_spec();
    const auto a = run_phase_transition(e);
    e.workers = 4;
    const auto b = run_phase_transition(e);
    for (std::size_t k = 0; k < a.curves.size(); ++k) {
        for (std::size_t r = 0; r < a.curves[k].rows.size(); ++r) {
            EXPECT_EQ(a.curves[k].rows[r].successes, b.curves[k].rows[r].successes);
        }
    }
    for (std::size_t k = 0; k < a.profiles.size(); ++k) EXPECT_EQ(a.profiles[k].profile.p, b.profiles[k].profile.p);
}

TEST(Harness, SharedSeedsGiveIdenticalArmsForIdenticalProfiles)
{
    auto e = small_spec();
    e.arms = {ArmSpec::parse("uniform"), ArmSpec::parse("powerlaw:0")};
    e.shared_seeds = true;
    const auto res = run_phase_transition(e);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(res.curves[0].rows[r].successes, res.curves[1].rows[r].successes);
}

TEST(Harness, PriorArmsAndHoldout)
{
    auto e = small_spec();
    e.n = 64;
    e.s = 4;
    e.m_grid = {16, 32};
    e.prior = "synthetic";
    e.prior_count = 30;
    e.signal_model = "prior";
    e.arms = {ArmSpec::parse("optimized_C"), ArmSpec::parse("optimized_B")};
    const auto res = run_phase_transition(e);
    ASSERT_TRUE(res.diag_C.has_value());
    EXPECT_EQ(res.prior->supports.size(), 30u);

    const auto dir = scratch("holdout");
    write_text(dir / "d.txt", "0 1 2 3\n0 1 2 5\n0 2 3 9\n");
    e.prior = (dir / "d.txt").string();
    e.signal_model = "holdout";
    const auto res2 = run_phase_transition(e);
    EXPECT_EQ(res2.prior->supports.size(), 2u);
}

TEST(Harness, FileArmNormalizesToBudget)
{
    const auto dir = scratch("filearm");
    rvec raw(32);
    for (std::size_t i = 0; i < 32; ++i) raw[i] = 1.0 + static_cast<double>(i % 4);
    write_profile_csv((dir / "p.csv").string(), raw);
    auto e = small_spec();
    e.arms = {ArmSpec::parse("file:" + (dir / "p.csv").string())};
    const auto res = run_phase_transition(e);
    for (const auto& ap : res.profiles) EXPECT_NEAR(ap.profile.sum(), ap.m, 1e-9);
}

TEST(Harness, EmitOutputs)
{
    auto e = small_spec();
    e.outdir = scratch("emit").string();
    e.plot = true;
    const auto res = run_phase_transition(e);
    const auto files = emit_outputs(e, res);
    for (const char* name : {"curve_uniform.csv", "curve_optimized_B.csv", "curve_spread_spectrum.csv", "trace.csv",
                             "manifest.txt", "curves.svg", "profile_optimized_B_m16.csv", "diag_B.csv"}) {
        EXPECT_TRUE(fs::exists(fs::path(e.outdir) / name)) << name;
    }
    EXPECT_EQ(slurp(fs::path(e.outdir) / "curve_uniform.csv").substr(0, 14), "m,probability,");
    // The manifest lists every spec key and reloads to the same spec.
    const auto kv = read_key_values((fs::path(e.outdir) / "manifest.txt").string());
    EXPECT_EQ(kv, e.to_key_values());
    EXPECT_NE(slurp(fs::path(e.outdir) / "curves.svg").find("<svg"), std::string::npos);
}

TEST(Harness, ParallelForPropagatesErrors)
{
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t k) {
                                  if (k == 7) throw DomainError("boom");
                              }),
                 DomainError);
    std::vector<int> hit(50, 0);
    parallel_for(50, 4, [&](std::size_t k) { hit[k] = 1; });
    EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
}
