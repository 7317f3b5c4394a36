// vdsopt command-line front end.

#include <CLI11.hpp>

#include <iostream>

#include "vdsopt/vdsopt.hpp"

using namespace vdsopt;

namespace {

// Key = value options shared by a config file and command-line flags. Flags
// named --key (underscores or hyphens) override the file; the seed
// environment variable sits between the two.
class KeyOptions {
public:
    KeyOptions(CLI::App* app, std::vector<std::string> keys) : app_(app), keys_(std::move(keys))
    {
        app_->add_option("--config", config_, "key = value spec file");
        values_.resize(keys_.size());
        for (std::size_t k = 0; k < keys_.size(); ++k) {
            std::string dashed = keys_[k];
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            std::string names = "--" + keys_[k];
            if (dashed != keys_[k]) names += ",--" + dashed;
            options_.push_back(app_->add_option(names, values_[k]));
        }
    }

    KeyValues collect() const
    {
        KeyValues kv;
        if (!config_.empty()) kv = read_key_values(config_);
        if (std::find(keys_.begin(), keys_.end(), "seed") != keys_.end()) {
            if (auto env = seed_from_env()) kv["seed"] = std::to_string(*env);
        }
        for (std::size_t k = 0; k < keys_.size(); ++k) {
            if (options_[k]->count()) kv[keys_[k]] = values_[k];
        }
        return kv;
    }

private:
    CLI::App* app_;
    std::vector<std::string> keys_;
    std::string config_;
    std::vector<std::string> values_;
    std::vector<CLI::Option*> options_;
};

std::string get(const KeyValues& kv, const std::string& key, const std::string& fallback)
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double get_double(const KeyValues& kv, const std::string& key, double fallback)
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_double(it->second, key);
}

std::uint64_t get_uint(const KeyValues& kv, const std::string& key, std::uint64_t fallback)
{
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_uint(it->second, key);
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback)
{
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw Error("cannot parse boolean " + key + " '" + it->second + "'");
}

void check_keys(const KeyValues& kv, const std::vector<std::string>& keys)
{
    for (const auto& [k, v] : kv) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw Error("unknown key '" + k + "'");
    }
}

BasisPair pair_from(const KeyValues& kv)
{
    BasisPair pair{BasisKind::fourier(), BasisKind::haar(), 256};
    pair.sensing.tag = basis_tag_from_string(get(kv, "sensing", "fourier"));
    pair.sparsity.tag = basis_tag_from_string(get(kv, "sparsity", "haar"));
    pair.sparsity.levels = get_uint(kv, "levels", 0);
    pair.n = get_uint(kv, "n", 256);
    if (pair.sensing.tag == BasisTag::modulated_fourier || pair.sparsity.tag == BasisTag::modulated_fourier) {
        throw DomainError("modulated_fourier is only available as the spread_spectrum experiment arm");
    }
    pair.validate();
    return pair;
}

std::uint64_t effective_seed(const KeyValues& kv, std::uint64_t fallback) { return get_uint(kv, "seed", fallback); }

SupportDataset load_dataset(const KeyValues& kv, const BasisPair& pair)
{
    const std::string prior = get(kv, "prior", "");
    const std::string mode = get(kv, "prior_mode", "supports");
    const std::size_t s = get_uint(kv, "s", 12);
    if (prior == "synthetic") {
        SyntheticLineModel model{pair.n, s, get_double(kv, "prior_decay", 0.5)};
        const RngSeed seed{effective_seed(kv, 1), derive_stream({detail::prior_stream})};
        return model.dataset(get_uint(kv, "prior_count", 150), seed);
    }
    if (mode == "supports") return ingest_support_dataset(prior, pair.n);
    if (mode == "coefficients") return ingest_coefficient_dataset(prior, s);
    if (mode == "signals") return ingest_signal_dataset(prior, s, pair.sparsity);
    throw DomainError("prior_mode must be supports, coefficients, or signals");
}

OptConfig opt_config_from(const KeyValues& kv)
{
    OptConfig cfg;
    cfg.lambda = get_double(kv, "lambda", cfg.lambda);
    cfg.tau = get_double(kv, "tau", cfg.tau);
    cfg.m = get_double(kv, "m", 0.0);
    cfg.max_outer = get_uint(kv, "max_outer", cfg.max_outer);
    cfg.outer_tol = get_double(kv, "outer_tol", cfg.outer_tol);
    cfg.max_inner = get_uint(kv, "max_inner", cfg.max_inner);
    cfg.inner_tol = get_double(kv, "inner_tol", cfg.inner_tol);
    const std::string metric = get(kv, "metric", "curvature");
    if (metric == "curvature") cfg.metric = StepMetric::curvature;
    else if (metric == "scalar") cfg.metric = StepMetric::scalar;
    else throw DomainError("metric must be curvature or scalar");
    cfg.strict_admissible = get_bool(kv, "strict", false);
    return cfg;
}

void report_opt(const OptResult& r, const CoherenceDiagonal& D, double m)
{
    const auto& last = r.trace.records.back();
    std::cerr << "outer iterations: " << last.iteration << (r.trace.converged ? " (converged)" : "") << "\n"
              << "objective: " << format_double(last.objective) << "\n"
              << "sum p: " << format_double(r.profile.sum()) << " (m = " << m << ")\n"
              << "mu^2 proxy max D_i/p_i: ";
    double worst = 0.0;
    for (std::size_t i = 0; i < D.size(); ++i) worst = std::max(worst, D.values[i] / r.profile.p[i]);
    std::cerr << format_double(worst) << "\n";
    for (const auto& w : r.trace.warnings) std::cerr << "warning: " << w << "\n";
}

void write_trace_file(const std::string& path, const OptTrace& trace)
{
    auto os = open_output(path);
    os << trace_csv_header() << "\n";
    write_trace_csv(os, trace);
}

std::ostream& out_stream(const std::string& path, std::ofstream& file)
{
    if (path.empty() || path == "-") return std::cout;
    file = open_output(path);
    return file;
}

const std::vector<std::string> pair_keys = {"sensing", "sparsity", "levels", "n"};

std::vector<std::string> with(std::vector<std::string> base, std::initializer_list<std::string> extra)
{
    base.insert(base.end(), extra);
    return base;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable-density sampling profile optimization and compressed-sensing experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    // coherence
    auto* coh = app.add_subcommand("coherence", "Emit the B (and optionally C) coherence diagonals");
    const auto coh_keys = with(pair_keys, {"prior", "prior_mode", "s", "prior_count", "prior_decay", "seed", "out",
                                           "out_c", "profile"});
    KeyOptions coh_opts(coh, coh_keys);

    // optimize
    auto* opt = app.add_subcommand("optimize", "Solve the coherence-minimization problem for a sampling profile");
    const auto opt_keys = with(pair_keys, {"m", "lambda", "tau", "max_outer", "outer_tol", "max_inner", "inner_tol",
                                           "metric", "strict", "prior", "prior_mode", "s", "prior_count",
                                           "prior_decay", "seed", "out", "trace"});
    KeyOptions opt_opts(opt, opt_keys);

    // sample
    auto* smp = app.add_subcommand("sample", "Draw a measurement index set from a profile");
    const auto smp_keys = std::vector<std::string>{"profile", "n", "m", "model", "seed", "out"};
    KeyOptions smp_opts(smp, smp_keys);

    // recover
    auto* rec = app.add_subcommand("recover", "Generate one sparse instance, sample, and solve basis pursuit");
    const auto rec_keys = with(pair_keys, {"s", "m", "profile", "seed", "bp_tol", "bp_max_iters", "bp_relaxation",
                                           "bp_gamma", "out"});
    KeyOptions rec_opts(rec, rec_keys);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a Monte-Carlo phase-transition experiment");
    const auto exp_keys = ExperimentSpec{}.to_key_values();
    std::vector<std::string> exp_key_names;
    for (const auto& [k, v] : exp_keys) exp_key_names.push_back(k);
    KeyOptions exp_opts(exp, exp_key_names);

    // mri-prior
    auto* mri = app.add_subcommand("mri-prior", "Ingest a support-prior dataset, build C, and optimize a profile");
    const auto mri_keys = with(pair_keys, {"prior", "prior_mode", "s", "prior_count", "prior_decay", "seed", "m",
                                           "lambda", "tau", "max_outer", "metric", "strict", "outdir"});
    KeyOptions mri_opts(mri, mri_keys);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*coh) {
            const auto kv = coh_opts.collect();
            check_keys(kv, coh_keys);
            const BasisPair pair = pair_from(kv);
            const auto B = build_B(pair);
            std::ofstream f;
            write_diagonal_csv(out_stream(get(kv, "out", ""), f), B);
            if (B.floored) std::cerr << "warning: " << B.floored << " entries floored at " << zero_floor << "\n";
            if (kv.count("prior")) {
                const auto ds = load_dataset(kv, pair);
                const auto C = build_C(pair, ds.supports, ds.s);
                const std::string out_c = get(kv, "out_c", "");
                if (out_c.empty()) throw Error("--out-c is required with --prior");
                write_diagonal_csv(out_c, C);
            }
            if (kv.count("profile")) {
                const rvec p = read_profile_csv(get(kv, "profile", ""));
                std::cerr << "mu(p) = " << format_double(mu_profile(p, pair)) << "\n";
            }
        } else if (*opt) {
            const auto kv = opt_opts.collect();
            check_keys(kv, opt_keys);
            const BasisPair pair = pair_from(kv);
            const OptConfig cfg = opt_config_from(kv);
            CoherenceDiagonal D;
            if (kv.count("prior")) {
                const auto ds = load_dataset(kv, pair);
                D = build_C(pair, ds.supports, ds.s);
            } else {
                D = build_B(pair);
            }
            const OptResult r = optimize_profile(D, cfg);
            std::ofstream f;
            write_profile_csv(out_stream(get(kv, "out", ""), f), r.profile.p);
            if (kv.count("trace")) write_trace_file(get(kv, "trace", ""), r.trace);
            report_opt(r, D, cfg.m);
        } else if (*smp) {
            const auto kv = smp_opts.collect();
            check_keys(kv, smp_keys);
            rvec p;
            if (kv.count("profile")) p = read_profile_csv(get(kv, "profile", ""));
            else p = SamplingProfile::uniform(get_uint(kv, "n", 256), get_double(kv, "m", 64)).p;
            CounterRng rng({effective_seed(kv, 1), 0});
            index_set omega;
            const std::string model = get(kv, "model", "bernoulli");
            if (model == "bernoulli") {
                omega = bernoulli_select(p, rng);
            } else if (model == "iid") {
                const double total = std::accumulate(p.begin(), p.end(), 0.0);
                rvec P(p.size());
                for (std::size_t i = 0; i < p.size(); ++i) P[i] = p[i] / total;
                omega = iid_select(P, static_cast<std::size_t>(std::llround(get_double(kv, "m", total))), rng);
            } else {
                throw DomainError("model must be bernoulli or iid");
            }
            std::ofstream f;
            auto& os = out_stream(get(kv, "out", ""), f);
            os << "index\n";
            for (auto i : omega) os << i << "\n";
            std::cerr << "|Omega| = " << omega.size() << "\n";
        } else if (*rec) {
            const auto kv = rec_opts.collect();
            check_keys(kv, rec_keys);
            const BasisPair pair = pair_from(kv);
            BPConfig bp;
            bp.tol = get_double(kv, "bp_tol", bp.tol);
            bp.max_iters = get_uint(kv, "bp_max_iters", bp.max_iters);
            bp.relaxation = get_double(kv, "bp_relaxation", bp.relaxation);
            bp.gamma = get_double(kv, "bp_gamma", bp.gamma);
            rvec p = kv.count("profile") ? read_profile_csv(get(kv, "profile", ""))
                                         : SamplingProfile::uniform(pair.n, get_double(kv, "m", 64)).p;
            if (p.size() != pair.n) throw DimensionError("profile length does not match N");
            const std::uint64_t seed = effective_seed(kv, 1);
            CounterRng sig_rng({seed, 1}), mask_rng({seed, 2});
            const SparseSignal sig = gen_sparse_signal(pair.n, get_uint(kv, "s", 12), sig_rng);
            const MeasurementSet ms = measure(sig, bernoulli_select(p, mask_rng), pair);
            const BPResult r = basis_pursuit(ms, pair, bp);
            double err = 0.0, ref = 0.0;
            for (std::size_t j = 0; j < pair.n; ++j) {
                err += std::norm(r.alpha[j] - sig.alpha[j]);
                ref += std::norm(sig.alpha[j]);
            }
            std::ofstream f;
            auto& os = out_stream(get(kv, "out", ""), f);
            os << "index,true_re,true_im,est_re,est_im\n" << std::setprecision(17);
            for (std::size_t j = 0; j < pair.n; ++j) {
                os << j << "," << sig.alpha[j].real() << "," << sig.alpha[j].imag() << "," << r.alpha[j].real() << ","
                   << r.alpha[j].imag() << "\n";
            }
            std::cerr << "measurements: " << ms.omega.size() << "\n"
                      << "iterations: " << r.iterations << (r.converged ? " (converged)" : " (not converged)") << "\n"
                      << "relative error: " << format_double(ref > 0 ? std::sqrt(err / ref) : std::sqrt(err)) << "\n"
                      << "recovered: " << (is_recovered(sig.alpha, r.alpha) ? "yes" : "no") << "\n";
        } else if (*exp) {
            const KeyValues kv = exp_opts.collect();
            const ExperimentSpec spec = ExperimentSpec::from_key_values(kv);
            const ExperimentResult res = run_phase_transition(spec);
            const auto files = emit_outputs(spec, res);
            for (const auto& c : res.curves) {
                std::cout << c.arm << "\n";
                for (const auto& r : c.rows) {
                    std::cout << "  m=" << r.m << "  eps=" << r.probability << "  [" << r.ci_low << ", " << r.ci_high
                              << "]" << (r.solver_failures ? "  solver_failures=" + std::to_string(r.solver_failures) : "")
                              << "\n";
                }
            }
            std::cerr << files.size() << " files written to " << spec.outdir << "\n";
        } else if (*mri) {
            const auto kv = mri_opts.collect();
            check_keys(kv, mri_keys);
            const BasisPair pair = pair_from(kv);
            if (!kv.count("prior")) throw Error("--prior <file> or --prior synthetic is required");
            const auto ds = load_dataset(kv, pair);
            const auto C = build_C(pair, ds.supports, ds.s);
            const OptResult r = optimize_profile_with_prior(C, opt_config_from(kv));
            namespace fs = std::filesystem;
            const fs::path dir(get(kv, "outdir", "mri_prior_out"));
            fs::create_directories(dir);
            write_diagonal_csv((dir / "diag_C.csv").string(), C);
            write_profile_csv((dir / "profile_optimized_C.csv").string(), r.profile.p);
            write_trace_file((dir / "trace.csv").string(), r.trace);
            {
                auto os = open_output((dir / "dataset.txt").string());
                write_support_dataset(os, ds);
            }
            {
                auto os = open_output((dir / "manifest.txt").string());
                os << "# vdsopt " << version << " mri-prior manifest\n";
                KeyValues m = kv;
                m["seed"] = std::to_string(effective_seed(kv, 1));
                write_key_values(os, m);
            }
            std::cerr << "dataset: " << ds.supports.size() << " supports (" << ds.provenance << ")\n";
            report_opt(r, C, get_double(kv, "m", 0.0));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
