#pragma once

// Monte-Carlo phase-transition experiments: per arm (profile source) and per
// budget m, draw signals and Bernoulli masks, solve basis pursuit, and count
// exact recoveries.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <thread>

#include "datasets.hpp"
#include "io.hpp"
#include "profile_opt.hpp"
#include "recovery.hpp"

namespace vdsopt {

enum class ArmKind { uniform, optimized_B, optimized_C, file, powerlaw, spread_spectrum };

struct ArmSpec {
    ArmKind kind = ArmKind::uniform;
    double exponent = 0.0; // powerlaw
    std::string path;      // file

    static ArmSpec parse(const std::string& text)
    {
        const auto colon = text.find(':');
        const std::string head = text.substr(0, colon);
        const std::string arg = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
        ArmSpec a;
        if (head == "uniform") a.kind = ArmKind::uniform;
        else if (head == "optimized_B") a.kind = ArmKind::optimized_B;
        else if (head == "optimized_C") a.kind = ArmKind::optimized_C;
        else if (head == "spread_spectrum") a.kind = ArmKind::spread_spectrum;
        else if (head == "powerlaw") {
            a.kind = ArmKind::powerlaw;
            a.exponent = parse_double(arg, "powerlaw exponent");
            if (a.exponent < 0.0) throw DomainError("powerlaw exponent must be nonnegative");
        } else if (head == "file") {
            a.kind = ArmKind::file;
            if (arg.empty()) throw DomainError("file arm needs a path: file:<path>");
            a.path = arg;
        } else {
            throw DomainError("unknown arm '" + text + "'");
        }
        if (arg.size() && a.kind != ArmKind::powerlaw && a.kind != ArmKind::file) {
            throw DomainError("arm '" + head + "' takes no argument");
        }
        return a;
    }

    // Round-trips through parse().
    std::string spec() const
    {
        switch (kind) {
        case ArmKind::uniform: return "uniform";
        case ArmKind::optimized_B: return "optimized_B";
        case ArmKind::optimized_C: return "optimized_C";
        case ArmKind::spread_spectrum: return "spread_spectrum";
        case ArmKind::powerlaw: return "powerlaw:" + format_double(exponent);
        case ArmKind::file: return "file:" + path;
        }
        return "?";
    }

    // Filesystem-safe label.
    std::string name() const
    {
        switch (kind) {
        case ArmKind::powerlaw: {
            std::string e = format_double(exponent);
            std::replace(e.begin(), e.end(), '.', 'p');
            return "powerlaw_" + e;
        }
        case ArmKind::file: return "file_" + std::filesystem::path(path).stem().string();
        default: return spec();
        }
    }

    bool optimized() const { return kind == ArmKind::optimized_B || kind == ArmKind::optimized_C; }
};

// Frequency distance of sensing index i from DC: circular for Fourier kinds,
// sequency for Hadamard (Sylvester order), the index itself otherwise.
inline std::pair<double, double> frequency_distance(const BasisKind& sensing, std::size_t n, index_t i)
{
    switch (sensing.tag) {
    case BasisTag::fourier:
    case BasisTag::modulated_fourier:
        return {static_cast<double>(std::min(i, n - i)), static_cast<double>(n / 2)};
    case BasisTag::hadamard: {
        // Sequency of Sylvester row i: Gray-decode of the bit-reversed index.
        const std::size_t bits = ilog2(n);
        std::size_t rev = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            if (i & (std::size_t{1} << b)) rev |= std::size_t{1} << (bits - 1 - b);
        }
        std::size_t seq = rev;
        for (std::size_t shift = 1; shift < bits; shift <<= 1) seq ^= seq >> shift;
        return {static_cast<double>(seq), static_cast<double>(n - 1)};
    }
    default: return {static_cast<double>(i), static_cast<double>(n > 1 ? n - 1 : 1)};
    }
}

// p_i proportional to (1 - dist(i)/dist_max)^d, floored at `floor`, rescaled to budget m.
inline SamplingProfile powerlaw_profile(std::size_t n, double m, double d, const BasisKind& sensing,
                                        double floor = 1e-3)
{
    if (d < 0.0) throw DomainError("powerlaw_profile: exponent must be nonnegative");
    if (m > static_cast<double>(n)) throw InfeasibleError("powerlaw_profile: budget m exceeds N");
    rvec p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [dist, dmax] = frequency_distance(sensing, n, i);
        p[i] = std::max(std::pow(std::max(0.0, 1.0 - dist / dmax), d), floor);
    }
    return normalize_to_budget(p, m);
}

struct ExperimentSpec {
    BasisKind sensing = BasisKind::fourier();
    BasisKind sparsity = BasisKind::haar();
    std::size_t n = 256;
    std::size_t s = 12;
    rvec m_grid;
    std::size_t trials = 200;
    std::vector<ArmSpec> arms;
    std::uint64_t seed = 1;
    bool shared_seeds = false;

    double lambda = 0.05;
    double tau = 1e-3;
    // Rescale optimized profiles onto P(m) before sampling.
    bool normalize_optimized = true;

    // Test signals: "uniform" (uniform random support), "prior" (drawn from
    // the synthetic line model), "holdout" (last row of the prior dataset).
    std::string signal_model = "uniform";
    // Prior dataset: "" (none), "synthetic", or a path.
    std::string prior;
    std::string prior_mode = "supports"; // supports | coefficients | signals
    std::size_t prior_count = 150;
    double prior_decay = 0.5;

    BPConfig bp;
    std::size_t workers = 0; // 0: hardware concurrency
    std::string outdir = "out";
    bool plot = true;

    BasisPair pair() const { return {sensing, sparsity, n}; }

    SyntheticLineModel line_model() const { return {n, s, prior_decay}; }

    void validate() const
    {
        pair().validate();
        if (trials < 1) throw DomainError("trials must be at least 1");
        if (m_grid.empty()) throw DomainError("m grid is empty");
        for (std::size_t k = 0; k < m_grid.size(); ++k) {
            if (!(m_grid[k] > 0.0) || m_grid[k] > static_cast<double>(n)) throw DomainError("m must lie in (0, N]");
            if (k > 0 && !(m_grid[k] > m_grid[k - 1])) throw DomainError("m grid must be strictly increasing");
        }
        if (arms.empty()) throw DomainError("no arms given");
        if (s > n) throw DomainError("sparsity exceeds N");
        for (const auto& a : arms) {
            if (a.optimized()) {
                for (double m : m_grid) {
                    if (static_cast<double>(n) * tau > m) {
                        throw InfeasibleError("m = " + format_double(m) + " is below N*tau for arm " + a.name());
                    }
                }
            }
            if (a.kind == ArmKind::optimized_C && prior.empty()) throw DomainError("optimized_C arm needs a prior");
        }
        if (signal_model != "uniform" && signal_model != "prior" && signal_model != "holdout") {
            throw DomainError("signal_model must be uniform, prior, or holdout");
        }
        if (signal_model == "prior" && prior != "synthetic") throw DomainError("signal_model=prior needs prior=synthetic");
        if (signal_model == "holdout" && prior.empty()) throw DomainError("signal_model=holdout needs a prior dataset");
    }

    // Every field, in the same key = value form parse() accepts.
    KeyValues to_key_values() const
    {
        KeyValues kv;
        kv["sensing"] = to_string(sensing.tag);
        kv["sparsity"] = to_string(sparsity.tag);
        kv["levels"] = std::to_string(sparsity.levels);
        kv["n"] = std::to_string(n);
        kv["s"] = std::to_string(s);
        std::string grid, arm_list;
        for (double m : m_grid) grid += (grid.empty() ? "" : ",") + format_double(m);
        for (const auto& a : arms) arm_list += (arm_list.empty() ? "" : ",") + a.spec();
        kv["m_grid"] = grid;
        kv["arms"] = arm_list;
        kv["trials"] = std::to_string(trials);
        kv["seed"] = std::to_string(seed);
        kv["shared_seeds"] = shared_seeds ? "true" : "false";
        kv["lambda"] = format_double(lambda);
        kv["tau"] = format_double(tau);
        kv["normalize_optimized"] = normalize_optimized ? "true" : "false";
        kv["signal_model"] = signal_model;
        kv["prior"] = prior;
        kv["prior_mode"] = prior_mode;
        kv["prior_count"] = std::to_string(prior_count);
        kv["prior_decay"] = format_double(prior_decay);
        kv["bp_tol"] = format_double(bp.tol);
        kv["bp_max_iters"] = std::to_string(bp.max_iters);
        kv["bp_relaxation"] = format_double(bp.relaxation);
        kv["bp_gamma"] = format_double(bp.gamma);
        kv["workers"] = std::to_string(workers);
        kv["outdir"] = outdir;
        kv["plot"] = plot ? "true" : "false";
        return kv;
    }

    static ExperimentSpec from_key_values(const KeyValues& kv)
    {
        ExperimentSpec e;
        auto get = [&](const char* key) -> const std::string* {
            auto it = kv.find(key);
            return it == kv.end() ? nullptr : &it->second;
        };
        auto boolean = [](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw Error("cannot parse boolean '" + v + "'");
        };
        static const char* known[] = {"sensing", "sparsity", "levels", "n", "s", "m_grid", "arms", "trials", "seed",
                                      "shared_seeds", "lambda", "tau", "normalize_optimized", "signal_model", "prior",
                                      "prior_mode", "prior_count", "prior_decay", "bp_tol", "bp_max_iters",
                                      "bp_relaxation", "bp_gamma", "workers", "outdir", "plot"};
        for (const auto& [k, v] : kv) {
            if (std::find_if(std::begin(known), std::end(known), [&](const char* x) { return k == x; })
                == std::end(known)) {
                throw Error("unknown experiment key '" + k + "'");
            }
        }
        if (auto v = get("sensing")) e.sensing.tag = basis_tag_from_string(*v);
        if (auto v = get("sparsity")) e.sparsity.tag = basis_tag_from_string(*v);
        if (auto v = get("levels")) e.sparsity.levels = parse_uint(*v, "levels");
        if (auto v = get("n")) e.n = parse_uint(*v, "n");
        if (auto v = get("s")) e.s = parse_uint(*v, "s");
        if (auto v = get("m_grid")) {
            for (const auto& tok : split(*v, ", ")) e.m_grid.push_back(parse_double(tok, "m"));
        }
        if (auto v = get("arms")) {
            for (const auto& tok : split(*v, ", ")) e.arms.push_back(ArmSpec::parse(tok));
        }
        if (auto v = get("trials")) e.trials = parse_uint(*v, "trials");
        if (auto v = get("seed")) e.seed = parse_uint(*v, "seed");
        if (auto v = get("shared_seeds")) e.shared_seeds = boolean(*v);
        if (auto v = get("lambda")) e.lambda = parse_double(*v, "lambda");
        if (auto v = get("tau")) e.tau = parse_double(*v, "tau");
        if (auto v = get("normalize_optimized")) e.normalize_optimized = boolean(*v);
        if (auto v = get("signal_model")) e.signal_model = *v;
        if (auto v = get("prior")) e.prior = *v;
        if (auto v = get("prior_mode")) e.prior_mode = *v;
        if (auto v = get("prior_count")) e.prior_count = parse_uint(*v, "prior_count");
        if (auto v = get("prior_decay")) e.prior_decay = parse_double(*v, "prior_decay");
        if (auto v = get("bp_tol")) e.bp.tol = parse_double(*v, "bp_tol");
        if (auto v = get("bp_max_iters")) e.bp.max_iters = parse_uint(*v, "bp_max_iters");
        if (auto v = get("bp_relaxation")) e.bp.relaxation = parse_double(*v, "bp_relaxation");
        if (auto v = get("bp_gamma")) e.bp.gamma = parse_double(*v, "bp_gamma");
        if (auto v = get("workers")) e.workers = parse_uint(*v, "workers");
        if (auto v = get("outdir")) e.outdir = *v;
        if (auto v = get("plot")) e.plot = boolean(*v);
        return e;
    }
};

// Seed override read by the CLI and the harness.
inline constexpr const char* seed_env_var = "VDSOPT_SEED";

inline std::optional<std::uint64_t> seed_from_env()
{
    const char* v = std::getenv(seed_env_var);
    if (!v || !*v) return std::nullopt;
    return parse_uint(v, seed_env_var);
}

struct CurveRow {
    double m = 0.0;
    std::size_t successes = 0;
    std::size_t trials = 0;
    std::size_t solver_failures = 0;
    double probability = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_measurements = 0.0;

    double standard_error() const
    {
        return trials ? std::sqrt(probability * (1.0 - probability) / static_cast<double>(trials)) : 0.0;
    }
};

struct RecoveryCurve {
    std::string arm;
    std::vector<CurveRow> rows;
};

// Wilson score interval at 95%.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054)
{
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(k) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (ph + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct ArmProfile {
    std::string arm;
    double m = 0.0;
    SamplingProfile profile;
    std::optional<OptTrace> trace;
};

struct ExperimentResult {
    std::vector<RecoveryCurve> curves;
    std::vector<ArmProfile> profiles;
    std::optional<CoherenceDiagonal> diag_B;
    std::optional<CoherenceDiagonal> diag_C;
    std::optional<SupportDataset> prior;

    const RecoveryCurve& curve(const std::string& arm) const
    {
        for (const auto& c : curves) {
            if (c.arm == arm) return c;
        }
        throw Error("no curve for arm '" + arm + "'");
    }
};

// Runs fn(k) for k in [0, count) on a bounded pool. Results must be written
// to per-k slots; the schedule does not affect them.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn)
{
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count && !failed; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        if (!failed.exchange(true)) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

namespace detail {

enum StreamTag : std::uint64_t { signal_stream = 1, mask_stream = 2, prior_stream = 3, modulation_stream = 4 };

struct TrialOutcome {
    bool recovered = false;
    bool solver_failed = false;
    std::size_t measurements = 0;
};

} // namespace detail

inline SupportDataset load_prior(const ExperimentSpec& spec)
{
    if (spec.prior == "synthetic") {
        return spec.line_model().dataset(spec.prior_count, {spec.seed, derive_stream({detail::prior_stream})});
    }
    if (spec.prior_mode == "supports") return ingest_support_dataset(spec.prior, spec.n);
    if (spec.prior_mode == "coefficients") return ingest_coefficient_dataset(spec.prior, spec.s);
    if (spec.prior_mode == "signals") return ingest_signal_dataset(spec.prior, spec.s, spec.sparsity);
    throw DomainError("prior_mode must be supports, coefficients, or signals");
}

inline ExperimentResult run_phase_transition(const ExperimentSpec& spec)
{
    spec.validate();
    const BasisPair pair = spec.pair();
    const std::size_t n = spec.n;
    ExperimentResult result;

    // Support prior. Under the holdout model the last row is the test support
    // and C is built from the remaining rows.
    index_set holdout;
    if (!spec.prior.empty()) {
        SupportDataset ds = load_prior(spec);
        if (ds.n != n) throw DimensionError("prior dataset dimension does not match N");
        if (ds.s != spec.s) throw DomainError("prior dataset sparsity does not match s");
        if (spec.signal_model == "holdout") {
            if (ds.supports.size() < 2) throw DomainError("holdout needs at least two dataset rows");
            holdout = ds.supports.back();
            ds.supports.pop_back();
        }
        result.prior = std::move(ds);
    }
    const bool need_B = std::any_of(spec.arms.begin(), spec.arms.end(),
                                    [](const ArmSpec& a) { return a.kind == ArmKind::optimized_B; });
    const bool need_C = std::any_of(spec.arms.begin(), spec.arms.end(),
                                    [](const ArmSpec& a) { return a.kind == ArmKind::optimized_C; });
    if (need_B) result.diag_B = build_B(pair);
    if (need_C) result.diag_C = build_C(pair, result.prior->supports, result.prior->s);

    // Profiles, one per (arm, m).
    const std::size_t n_arms = spec.arms.size(), n_m = spec.m_grid.size();
    result.profiles.resize(n_arms * n_m);
    std::vector<rvec> file_profiles(n_arms);
    for (std::size_t a = 0; a < n_arms; ++a) {
        if (spec.arms[a].kind == ArmKind::file) {
            file_profiles[a] = read_profile_csv(spec.arms[a].path);
            if (file_profiles[a].size() != n) throw DimensionError("profile file length does not match N");
        }
    }
    parallel_for(n_arms * n_m, spec.workers, [&](std::size_t k) {
        const ArmSpec& arm = spec.arms[k / n_m];
        const double m = spec.m_grid[k % n_m];
        ArmProfile ap;
        ap.arm = arm.name();
        ap.m = m;
        switch (arm.kind) {
        case ArmKind::uniform:
        case ArmKind::spread_spectrum: ap.profile = SamplingProfile::uniform(n, m); break;
        case ArmKind::powerlaw: ap.profile = powerlaw_profile(n, m, arm.exponent, spec.sensing); break;
        case ArmKind::file: ap.profile = normalize_to_budget(file_profiles[k / n_m], m); break;
        case ArmKind::optimized_B:
        case ArmKind::optimized_C: {
            OptConfig cfg;
            cfg.lambda = spec.lambda;
            cfg.tau = spec.tau;
            cfg.m = m;
            cfg.strict_admissible = spec.normalize_optimized;
            OptResult r = arm.kind == ArmKind::optimized_B ? optimize_profile(*result.diag_B, cfg)
                                                           : optimize_profile_with_prior(*result.diag_C, cfg);
            ap.profile = std::move(r.profile);
            ap.trace = std::move(r.trace);
            break;
        }
        }
        result.profiles[k] = std::move(ap);
    });

    // Trials.
    const std::size_t T = spec.trials;
    std::vector<detail::TrialOutcome> outcomes(n_arms * n_m * T);
    const SyntheticLineModel lines = spec.line_model();
    parallel_for(outcomes.size(), spec.workers, [&](std::size_t k) {
        const std::size_t a = k / (n_m * T), mi = (k / T) % n_m, t = k % T;
        const ArmSpec& arm = spec.arms[a];
        const std::uint64_t arm_key = spec.shared_seeds ? 0 : a + 1;

        CounterRng sig_rng({spec.seed, derive_stream({detail::signal_stream, arm_key, mi, t})});
        SparseSignal signal;
        if (spec.signal_model == "uniform") signal = gen_sparse_signal(n, spec.s, sig_rng);
        else if (spec.signal_model == "prior") signal = lines.draw_signal(sig_rng);
        else signal = signal_on_support(n, holdout, sig_rng);

        BasisPair trial_pair = pair;
        if (arm.kind == ArmKind::spread_spectrum) {
            CounterRng mod_rng({spec.seed, derive_stream({detail::modulation_stream, arm_key, mi, t})});
            cvec mod(n);
            for (auto& v : mod) v = mod_rng.uniform() < 0.5 ? -1.0 : 1.0;
            trial_pair.sensing = BasisKind::modulated_fourier(std::move(mod));
        }

        CounterRng mask_rng({spec.seed, derive_stream({detail::mask_stream, arm_key, mi, t})});
        const auto& prof = result.profiles[a * n_m + mi].profile;
        index_set omega = bernoulli_select(prof.p, mask_rng);

        detail::TrialOutcome out;
        out.measurements = omega.size();
        if (spec.s == 0) {
            out.recovered = true;
        } else if (!omega.empty()) {
            MeasurementSet ms = measure(signal, std::move(omega), trial_pair);
            BPResult bp = basis_pursuit(ms, trial_pair, spec.bp);
            out.solver_failed = !bp.converged;
            out.recovered = is_recovered(signal.alpha, bp.alpha);
        }
        outcomes[k] = out;
    });

    for (std::size_t a = 0; a < n_arms; ++a) {
        RecoveryCurve curve;
        curve.arm = spec.arms[a].name();
        for (std::size_t mi = 0; mi < n_m; ++mi) {
            CurveRow row;
            row.m = spec.m_grid[mi];
            row.trials = T;
            double meas = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const auto& o = outcomes[(a * n_m + mi) * T + t];
                row.successes += o.recovered;
                row.solver_failures += o.solver_failed;
                meas += static_cast<double>(o.measurements);
            }
            row.probability = static_cast<double>(row.successes) / static_cast<double>(T);
            std::tie(row.ci_low, row.ci_high) = wilson_interval(row.successes, T);
            row.mean_measurements = meas / static_cast<double>(T);
            curve.rows.push_back(row);
        }
        result.curves.push_back(std::move(curve));
    }
    return result;
}

} // namespace vdsopt
