#include "uhmc/experiments.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "uhmc/chain.hpp"
#include "uhmc/stats.hpp"

namespace uhmc {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    out << content;
}

ordered_json config_echo(const Config& cfg, const char* experiment) {
    ordered_json j;
    j["experiment"] = experiment;
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

void parallel_replicas(int replicas, int threads, const std::function<void(int)>& work) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int r = 0; r < replicas; ++r) work(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int r = next.fetch_add(1); r < replicas; r = next.fetch_add(1)) work(r);
        });
    for (auto& th : pool) th.join();
}

ordered_json report_json(const BoundReport& r) {
    ordered_json j;
    j["name"] = r.name;
    j["value"] = r.value;
    ordered_json inputs;
    for (const auto& [k, v] : r.inputs) inputs[k] = v;
    j["inputs"] = inputs;
    ordered_json flags;
    for (const auto& [k, v] : r.constraint_flags) flags[k] = v;
    j["flags"] = flags;
    return j;
}

// Monte-Carlo target moments from a long chain, inflated 20% as a
// conservative stand-in when analytic values are unavailable.
TargetMoments estimated_moments(const Potential& U, const IntegratorParams& p, std::uint64_t seed) {
    ChainConfig cc{U, p, seed, 0x4D4D, false};
    const int burn = 200, keep = 2000;
    Vec x = Vec::Zero(U.dim());
    RngStream rng(seed, 0x6060);
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < burn + keep; ++i) {
        RngStream sr = rng.fork(i);
        x = uhmc_step(x, cc, sr);
        if (i >= burn) {
            const double n2 = x.squaredNorm();
            m2 += n2;
            m4 += n2 * n2;
        }
    }
    TargetMoments m;
    m.m2 = 1.2 * m2 / keep;
    m.m4 = 1.2 * m4 / keep;
    m.source = TargetMoments::Source::monte_carlo;
    return m;
}

}  // namespace

Potential model_from_config(const Config& cfg) {
    const std::string model = cfg.get_string("model");
    if (model == "gaussian")
        return make_gaussian(static_cast<int>(cfg.get_int("dim")), cfg.get_double("omega2"));
    if (model == "double_well")
        return make_double_well_tail_convex(static_cast<int>(cfg.get_int("dim")), cfg.get_double("a"));
    if (model == "mean_field") return mf_assemble(*mean_field_from_config(cfg));
    throw config_error("unknown model: " + model);
}

std::optional<MeanFieldPotential> mean_field_from_config(const Config& cfg) {
    if (cfg.get_string("model") != "mean_field") return std::nullopt;
    MeanFieldPotential mfp;
    mfp.n = static_cast<int>(cfg.get_int("n"));
    mfp.k = static_cast<int>(cfg.get_int("k"));
    mfp.eps = cfg.get_double("eps");
    const std::string vm = cfg.get_string("v_model");
    if (vm == "gaussian")
        mfp.V = make_gaussian(mfp.k, cfg.get_double("v_omega2"));
    else if (vm == "double_well")
        mfp.V = make_double_well_tail_convex(mfp.k, cfg.get_double("v_a"));
    else
        throw config_error("unknown v_model: " + vm);
    mfp.W = make_gaussian(mfp.k, cfg.get_double("w_omega2"));
    return mfp;
}

IntegratorParams params_from_config(const Config& cfg) {
    return IntegratorParams(cfg.get_double("T"), static_cast<int>(cfg.get_int("N")));
}

GaussianKernelOracle gaussian_kernel_oracle(double omega2, const IntegratorParams& p) {
    const double h = p.h();
    // one-step matrix of Verlet on U = omega2 x^2 / 2
    double a = 1.0 - 0.5 * omega2 * h * h;
    double b = h;
    double c = -omega2 * h * (1.0 - 0.25 * omega2 * h * h);
    double d = a;
    double A = 1.0, B = 0.0, C = 0.0, D = 1.0;  // accumulated power
    for (int i = 0; i < p.N; ++i) {
        const double A1 = a * A + b * C, B1 = a * B + b * D;
        const double C1 = c * A + d * C, D1 = c * B + d * D;
        A = A1;
        B = B1;
        C = C1;
        D = D1;
    }
    return {A, B};
}

ExperimentResult run_sample(const Config& cfg) {
    const Potential U = model_from_config(cfg);
    const IntegratorParams p = params_from_config(cfg);
    const int replicas = static_cast<int>(cfg.get_int("replicas"));
    const int steps = static_cast<int>(cfg.get_int("steps"));
    const int burn = std::min<int>(static_cast<int>(cfg.get_int("burn_in")), steps / 2);
    const std::uint64_t seed = cfg.get_u64("seed");
    const int d = U.dim();

    Vec x0 = Vec::Zero(d);
    x0[0] = cfg.get_double("x0_norm");

    U.reset_gradient_evals();
    struct Row {
        double mean_x1, var_x1, mean_norm2;
    };
    std::vector<Row> rows(replicas);
    parallel_replicas(replicas, static_cast<int>(cfg.get_int("threads")), [&](int r) {
        ChainConfig cc{U, p, seed, static_cast<std::uint64_t>(r), false};
        cc.check();
        const auto states = uhmc_run(x0, steps, cc, RngStream(seed, static_cast<std::uint64_t>(r)));
        double s1 = 0, s2 = 0, sn = 0;
        const int kept = steps - burn;
        for (int i = burn + 1; i <= steps; ++i) {
            s1 += states[i][0];
            s2 += states[i][0] * states[i][0];
            sn += states[i].squaredNorm();
        }
        rows[r] = {s1 / kept, s2 / kept - (s1 / kept) * (s1 / kept), sn / kept};
    });

    const std::uint64_t grads = U.gradient_evals();
    const std::uint64_t expected = std::uint64_t(replicas) * steps * (p.N + 1);

    std::string csv = "replica,mean_x1,var_x1,mean_norm2\n";
    for (int r = 0; r < replicas; ++r)
        csv += std::to_string(r) + "," + fmt(rows[r].mean_x1) + "," + fmt(rows[r].var_x1) + "," +
               fmt(rows[r].mean_norm2) + "\n";

    std::vector<double> means, vars;
    for (const auto& r : rows) {
        means.push_back(r.mean_x1);
        vars.push_back(r.var_x1);
    }
    const auto mm = sample_moments(means);
    const auto mv = sample_moments(vars);

    ordered_json rep;
    rep["config"] = config_echo(cfg, "sample");
    rep["replicas"] = replicas;
    rep["steps"] = steps;
    rep["mean_x1"] = mm.mean;
    rep["mean_x1_se"] = std::sqrt(mm.variance / replicas);
    rep["var_x1"] = mv.mean;
    rep["var_x1_se"] = std::sqrt(mv.variance / replicas);
    rep["gradient_evals"] = grads;
    rep["gradient_evals_expected"] = expected;

    const std::string out = cfg.get_string("out");
    write_file(out, "samples.csv", csv);
    write_file(out, "sample_report.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.summary = "sample: mean_x1 " + fmt(mm.mean) + " +- " + fmt(std::sqrt(mm.variance / replicas)) +
                  ", var_x1 " + fmt(mv.mean) + ", gradient evals " + std::to_string(grads) + "/" +
                  std::to_string(expected);
    return res;
}

ExperimentResult run_couple(const Config& cfg) {
    const Potential U = model_from_config(cfg);
    const auto mfp = mean_field_from_config(cfg);
    const IntegratorParams p = params_from_config(cfg);
    const int replicas = static_cast<int>(cfg.get_int("replicas"));
    const std::uint64_t seed = cfg.get_u64("seed");
    const int d = U.dim();

    ThresholdPolicy policy = ThresholdPolicy::for_potential(U, p);
    if (cfg.get_double("threshold") > 0.0) policy.threshold = cfg.get_double("threshold");
    policy.max_steps = static_cast<int>(cfg.get_int("max_steps"));
    policy.max_oneshot_attempts = static_cast<int>(cfg.get_int("max_oneshot"));
    if (mfp) {
        policy.metric = CouplingMetric::l1_blocks;
        policy.blocks_n = mfp->n;
        policy.blocks_k = mfp->k;
    }

    Vec x0 = Vec::Zero(d), y0 = Vec::Zero(d);
    x0[0] = cfg.get_double("x0_norm");
    y0[0] = cfg.get_double("y0_norm");

    std::vector<CouplingTimeRecord> recs(replicas);
    parallel_replicas(replicas, static_cast<int>(cfg.get_int("threads")), [&](int r) {
        ChainConfig cc{U, p, seed, static_cast<std::uint64_t>(r), false};
        cc.check();
        recs[r] = coupled_meeting_time(x0, y0, cc, RngStream(seed, static_cast<std::uint64_t>(r)), policy);
    });

    std::string csv = "replica,tau,met,phase1_steps,oneshot_attempts\n";
    std::vector<int> taus;
    int met_count = 0;
    for (int r = 0; r < replicas; ++r) {
        csv += std::to_string(r) + "," + std::to_string(recs[r].tau) + "," +
               std::to_string(recs[r].met ? 1 : 0) + "," + std::to_string(recs[r].phase1_steps) + "," +
               std::to_string(recs[r].oneshot_attempts) + "\n";
        if (recs[r].met) {
            taus.push_back(recs[r].tau);
            ++met_count;
        }
    }
    LinearFit tail = taus.empty() ? LinearFit{} : survival_tail_fit(taus);

    ordered_json rep;
    rep["config"] = config_echo(cfg, "couple");
    rep["threshold"] = policy.threshold;
    rep["meet_fraction"] = double(met_count) / replicas;
    if (!taus.empty()) {
        std::sort(taus.begin(), taus.end());
        rep["tau_median"] = taus[taus.size() / 2];
        rep["tau_p90"] = taus[static_cast<std::size_t>(0.9 * (taus.size() - 1))];
        rep["tau_max"] = taus.back();
    }
    rep["log_survival_slope"] = tail.slope;
    rep["log_survival_r2"] = tail.r2;

    const std::string out = cfg.get_string("out");
    write_file(out, "coupling.csv", csv);
    write_file(out, "couple_report.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.summary = "couple: met " + std::to_string(met_count) + "/" + std::to_string(replicas) +
                  ", log-survival slope " + fmt(tail.slope) + " (r2 " + fmt(tail.r2) + ")";
    return res;
}

ExperimentResult run_mixing_time(const Config& cfg) {
    if (cfg.get_string("model") != "gaussian")
        throw config_error("mixing-time: gaussian model required (exact stationary start)");
    const double omega2 = cfg.get_double("omega2");
    const IntegratorParams p = params_from_config(cfg);
    const int replicas = static_cast<int>(cfg.get_int("replicas"));
    const std::uint64_t seed = cfg.get_u64("seed");
    const double eps_mix = cfg.get_double("eps_mix");
    const auto d_list = cfg.get_int_list("d_list");

    const GaussianKernelOracle oracle = gaussian_kernel_oracle(omega2, p);
    const double sigma_t = std::sqrt(oracle.sigma_tilde2());

    std::string csv = "d,m,meet_fraction,tv_upper\n";
    ordered_json per_d = ordered_json::array();
    std::vector<double> log_ds, tmixes;
    bool all_below = true;

    for (long dl : d_list) {
        const int d = static_cast<int>(dl);
        const Potential U = make_gaussian(d, omega2);
        ThresholdPolicy policy = ThresholdPolicy::for_potential(U, p);
        policy.max_steps = static_cast<int>(cfg.get_int("max_steps"));

        const double x0_norm = cfg.get_double("x0_norm");
        Vec x0 = Vec::Zero(d);
        if (x0_norm >= 0.0) x0[0] = x0_norm;

        std::vector<int> taus(replicas);
        parallel_replicas(replicas, static_cast<int>(cfg.get_int("threads")), [&](int r) {
            ChainConfig cc{U, p, seed, static_cast<std::uint64_t>(r), false};
            RngStream rep_stream(seed, (std::uint64_t(d) << 32) | std::uint64_t(r));
            RngStream init = rep_stream.fork(0x5f5f5f5full);
            const Vec y0 = sigma_t * init.gaussian_vec(d);
            // negative x0_norm requests a warm start from the invariant law
            const Vec xr = (x0_norm >= 0.0) ? x0 : Vec(sigma_t * init.gaussian_vec(d));
            const auto rec = coupled_meeting_time(xr, y0, cc, rep_stream, policy);
            taus[r] = rec.met ? rec.tau : policy.max_steps + 1;
        });

        std::vector<int> sorted(taus);
        std::sort(sorted.begin(), sorted.end());
        const int tmax = sorted.back();
        int t_mix_emp = -1;
        for (int m = 1; m <= tmax && m <= policy.max_steps; ++m) {
            const auto it = std::upper_bound(sorted.begin(), sorted.end(), m);
            const double not_met = double(sorted.end() - it) / replicas;
            csv += std::to_string(d) + "," + std::to_string(m) + "," + fmt(1.0 - not_met) + "," +
                   fmt(not_met) + "\n";
            if (t_mix_emp < 0 && not_met <= eps_mix) t_mix_emp = m;
        }

        const RateCertificate cert = logconcave_rates(omega2, omega2, 0.0, p.T, p.h());
        const double w1 =
            (x0_norm >= 0.0 ? x0_norm : sigma_t * chi_mean(d)) + sigma_t * chi_mean(d);
        const double bound = mixing_time_bound(eps_mix, cert, w1, p.T, d, 0.0);
        const bool below = t_mix_emp > 0 && t_mix_emp <= bound && tmax <= policy.max_steps;
        all_below = all_below && below;

        ordered_json jd;
        jd["d"] = d;
        jd["t_mix_empirical"] = t_mix_emp;
        jd["certificate_bound"] = bound;
        jd["tau_max"] = tmax;
        jd["below_bound"] = below;
        per_d.push_back(jd);
        log_ds.push_back(std::log(double(d)));
        tmixes.push_back(double(t_mix_emp));
    }

    const LinearFit fit = linear_fit(log_ds, tmixes);
    ordered_json rep;
    rep["config"] = config_echo(cfg, "mixing_time");
    rep["per_d"] = per_d;
    rep["tmix_vs_logd_slope"] = fit.slope;
    rep["tmix_vs_logd_r2"] = fit.r2;
    rep["all_below_bound"] = all_below;

    const std::string out = cfg.get_string("out");
    write_file(out, "mixing.csv", csv);
    write_file(out, "mixing_report.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.summary = "mixing-time: slope vs log d " + fmt(fit.slope) + " (r2 " + fmt(fit.r2) + ")" +
                  (all_below ? ", all runs below the bound" : ", BOUND EXCEEDED");
    res.exit_code = all_below ? 0 : 3;
    return res;
}

ExperimentResult run_bias_scan(const Config& cfg) {
    if (cfg.get_string("model") != "gaussian")
        throw config_error("bias-scan: gaussian product model required (exact invariant law)");
    const double omega2 = cfg.get_double("omega2");
    const double T = cfg.get_double("T");
    const double sigma = 1.0 / std::sqrt(omega2);
    const auto d_list = cfg.get_int_list("d_list");
    const auto N_list = cfg.get_int_list("N_list");

    std::string csv = "d,h,tv_exact,thm_bound\n";
    std::map<long, std::vector<std::pair<double, double>>> by_d;  // d -> (h, tv)
    std::map<long, std::vector<std::pair<long, double>>> by_N;    // N -> (d, tv)
    bool all_below = true;

    for (long N : N_list) {
        const IntegratorParams p(T, static_cast<int>(N));
        const GaussianKernelOracle oracle = gaussian_kernel_oracle(omega2, p);
        const double sigma_t = std::sqrt(oracle.sigma_tilde2());
        const double h = p.h();
        for (long dl : d_list) {
            const int d = static_cast<int>(dl);
            const double tv = tv_gaussian_isotropic(sigma, sigma_t, d);
            const auto C = bias_constant_C(d, T, omega2, 0.0, 0.0, gaussian_moments(d, omega2));
            const double M2 = chi_mean(d) * (sigma_t - sigma) / (h * h);
            const double bound = tv_bias_bound(h, T, d, 0.0, M2, C.value);
            csv += std::to_string(d) + "," + fmt(h) + "," + fmt(tv) + "," + fmt(bound) + "\n";
            if (tv > bound) all_below = false;
            by_d[dl].push_back({h, tv});
            by_N[N].push_back({dl, tv});
        }
    }

    ordered_json h_fits = ordered_json::array();
    double h_slope_first = 0.0;
    for (const auto& [dl, pts] : by_d) {
        std::vector<double> lx, ly;
        for (const auto& [h, tv] : pts) {
            lx.push_back(std::log(h));
            ly.push_back(std::log(tv));
        }
        const LinearFit f = linear_fit(lx, ly);
        if (dl == by_d.begin()->first) h_slope_first = f.slope;
        ordered_json jf;
        jf["d"] = dl;
        jf["slope"] = f.slope;
        jf["r2"] = f.r2;
        h_fits.push_back(jf);
    }
    ordered_json d_fits = ordered_json::array();
    double d_slope_first = 0.0;
    for (const auto& [N, pts] : by_N) {
        std::vector<double> lx, ly;
        for (const auto& [dl, tv] : pts) {
            lx.push_back(std::log(double(dl)));
            ly.push_back(std::log(tv));
        }
        const LinearFit f = linear_fit(lx, ly);
        if (N == by_N.begin()->first) d_slope_first = f.slope;
        ordered_json jf;
        jf["N"] = N;
        jf["slope"] = f.slope;
        jf["r2"] = f.r2;
        d_fits.push_back(jf);
    }

    ordered_json rep;
    rep["config"] = config_echo(cfg, "bias_scan");
    rep["h_slope_fits"] = h_fits;
    rep["d_slope_fits"] = d_fits;
    rep["all_below_thm_bound"] = all_below;

    const std::string out = cfg.get_string("out");
    write_file(out, "bias_scan.csv", csv);
    write_file(out, "bias_scan_report.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.summary = "bias-scan: h-slope " + fmt(h_slope_first) + ", d-slope " + fmt(d_slope_first) +
                  (all_below ? ", all points below the bound" : ", BOUND EXCEEDED");
    res.exit_code = all_below ? 0 : 3;
    return res;
}

namespace {

// One-shot marginal statistics on the 1D gaussian model: pooled eta must be
// standard normal and P[met] must match 1 - TV of the two velocity laws.
std::vector<InequalityCheckResult> one_shot_marginal_checks(double omega2, const IntegratorParams& p,
                                                       int trials, std::uint64_t seed) {
    const Potential U = make_gaussian(1, omega2);
    ChainConfig cc{U, p, seed, 0x0511, false};
    Vec x(1), y(1);
    x[0] = 0.0;
    y[0] = 0.5;
    RngStream rng(seed, 0x77);
    std::vector<double> etas;
    etas.reserve(trials);
    int met = 0;
    for (int t = 0; t < trials; ++t) {
        RngStream sr = rng.fork(t);
        const CouplingOutcome oc = one_shot_step(x, y, cc, sr);
        etas.push_back(oc.eta[0]);
        if (oc.met) ++met;
    }

    const GaussianKernelOracle oracle = gaussian_kernel_oracle(omega2, p);
    const double shift = oracle.A / oracle.B * (x[0] - y[0]);
    const double tv = 2.0 * normal_cdf(0.5 * std::abs(shift)) - 1.0;

    InequalityCheckResult meet;
    meet.name = "one_shot_meeting_probability";
    meet.checked = trials;
    {
        const double p_met = double(met) / trials;
        const double target = 1.0 - tv;
        const double se = std::sqrt(target * (1.0 - target) / trials);
        meet.worst_margin = 3.0 * se - std::abs(p_met - target);
        if (std::abs(p_met - target) > 3.0 * se) {
            meet.violations = 1;
            meet.counterexample = "P[met]=" + fmt(p_met) + " target=" + fmt(target);
        }
    }

    InequalityCheckResult mom;
    mom.name = "one_shot_marginal_moments";
    mom.checked = trials;
    {
        const auto ms = sample_moments(etas);
        const double n = double(trials);
        // z-scores of mean, variance, skewness, excess kurtosis under N(0,1)
        const double z_mean = ms.mean / std::sqrt(1.0 / n);
        const double z_var = (ms.variance - 1.0) / std::sqrt(2.0 / n);
        const double z_skew = ms.skewness / std::sqrt(6.0 / n);
        const double z_kurt = ms.excess_kurtosis / std::sqrt(24.0 / n);
        double worst = 0.0;
        for (double z : {z_mean, z_var, z_skew, z_kurt}) worst = std::max(worst, std::abs(z));
        mom.worst_margin = 4.0 - worst;
        if (worst > 4.0) {
            mom.violations = 1;
            mom.counterexample = "worst |z| = " + fmt(worst);
        }
    }

    InequalityCheckResult ks;
    ks.name = "one_shot_marginal_ks";
    ks.checked = trials;
    {
        const double stat = ks_statistic_standard_normal(etas);
        const double crit = 1.628 / std::sqrt(double(trials));  // 1% level
        ks.worst_margin = crit - stat;
        if (stat > crit) {
            ks.violations = 1;
            ks.counterexample = "KS=" + fmt(stat) + " crit=" + fmt(crit);
        }
    }
    return {meet, mom, ks};
}

}  // namespace

ExperimentResult run_validation(const Config& cfg) {
    const Potential U = model_from_config(cfg);
    const auto mfp = mean_field_from_config(cfg);
    const IntegratorParams p = params_from_config(cfg);
    InequalitySuiteConfig suite;
    suite.draws = static_cast<int>(cfg.get_int("draws"));
    suite.seed = cfg.get_u64("seed");

    std::vector<InequalityCheckResult> results = check_general_inequalities(U, p, suite);
    if (mfp) {
        auto mf = check_mean_field_inequalities(*mfp, p, suite);
        results.insert(results.end(), mf.begin(), mf.end());
        if (mfp->V.quadratic_curvature() && mfp->W.quadratic_curvature())
            results.push_back(check_regularization_mean_field_gaussian(
                *mfp, p, std::min(suite.draws, 2000), suite.seed));
    }
    if (cfg.get_string("model") == "gaussian") {
        results.push_back(check_regularization_gaussian(U.dim(), cfg.get_double("omega2"), p,
                                                        std::min(suite.draws, 2000), suite.seed));
        if (p.constraint_ok(U.lip_grad())) {
            auto marginals = one_shot_marginal_checks(cfg.get_double("omega2"),
                                                      IntegratorParams(p.T, p.N),
                                                      std::min(suite.draws, 20000), suite.seed);
            results.insert(results.end(), marginals.begin(), marginals.end());
        }
    }
    results.push_back(check_overlap_ordering(std::min(suite.draws, 2000), suite.seed));

    std::string csv = "check,checked,violations,skipped,worst_margin\n";
    long violations = 0;
    std::string bad;
    for (const auto& r : results) {
        csv += r.name + "," + std::to_string(r.checked) + "," + std::to_string(r.violations) + "," +
               std::to_string(r.skipped) + "," + fmt(r.worst_margin) + "\n";
        violations += r.violations;
        if (!r.passed() && bad.empty()) bad = r.name + ": " + r.counterexample;
    }

    ordered_json rep;
    rep["config"] = config_echo(cfg, "validate");
    ordered_json checks = ordered_json::array();
    for (const auto& r : results) {
        ordered_json jc;
        jc["name"] = r.name;
        jc["checked"] = r.checked;
        jc["violations"] = r.violations;
        jc["skipped"] = r.skipped;
        jc["worst_margin"] = r.worst_margin;
        if (!r.counterexample.empty()) jc["counterexample"] = r.counterexample;
        checks.push_back(jc);
    }
    rep["checks"] = checks;
    rep["total_violations"] = violations;

    const std::string out = cfg.get_string("out");
    write_file(out, "validation.csv", csv);
    write_file(out, "validation_report.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.exit_code = violations == 0 ? 0 : 3;
    res.summary = "validate: " + std::to_string(results.size()) + " checks, " +
                  std::to_string(violations) + " violations" + (bad.empty() ? "" : "; first: " + bad);
    return res;
}

ExperimentResult run_bounds(const Config& cfg) {
    const Potential U = model_from_config(cfg);
    const auto mfp = mean_field_from_config(cfg);
    const IntegratorParams p = params_from_config(cfg);
    const int d = U.dim();
    const double T = p.T, h = p.h();
    const bool constraint = p.constraint_ok(U.lip_grad());

    std::vector<BoundReport> reports;

    BoundReport reg;
    reg.name = "regularization_constant";
    reg.value = regularization_constant(T, d, U.lip_hess());
    reg.inputs = {{"T", T}, {"d", double(d)}, {"L_H", U.lip_hess()}};
    reg.constraint_flags = {{"step_size_constraint", constraint}};
    reports.push_back(reg);

    TargetMoments moments;
    if (cfg.get_double("m2") >= 0.0 && cfg.get_double("m4") >= 0.0) {
        moments.m2 = cfg.get_double("m2");
        moments.m4 = cfg.get_double("m4");
        moments.source = TargetMoments::Source::analytic;
    } else if (U.quadratic_curvature() && *U.quadratic_curvature() > 0.0) {
        moments = gaussian_moments(d, *U.quadratic_curvature());
    } else {
        moments = estimated_moments(U, p, cfg.get_u64("seed"));
    }

    const auto C = bias_constant_C(d, T, U.lip_grad(), U.lip_hess(), U.lip_third(), moments);
    BoundReport cj;
    cj.name = "bias_constant_C";
    cj.value = C.value;
    cj.inputs = {{"d", double(d)},
                 {"T", T},
                 {"L", U.lip_grad()},
                 {"L_H", U.lip_hess()},
                 {"L_I", U.lip_third()},
                 {"m2", moments.m2},
                 {"m4", moments.m4},
                 {"d3_group", C.d3_group},
                 {"d2_group", C.d2_group},
                 {"d1_group", C.d1_group},
                 {"m2_group", C.m2_group},
                 {"m4_group", C.m4_group}};
    cj.constraint_flags = {{"moments_analytic", moments.source == TargetMoments::Source::analytic}};
    reports.push_back(cj);

    double K = cfg.get_double("K"), R = cfg.get_double("R");
    if (K < 0.0) K = U.convexity() ? U.convexity()->K : 0.0;
    if (R < 0.0) R = U.convexity() ? U.convexity()->R : 0.0;
    if (K > 0.0) {
        const RateCertificate cert = logconcave_rates(K, U.lip_grad(), R, T, h);
        BoundReport rb;
        rb.name = "rate_certificate";
        rb.value = cert.c;
        rb.inputs = {{"K", K}, {"R", R}, {"L", U.lip_grad()}, {"M1", cert.M1}};
        rb.constraint_flags = cert.validity;
        reports.push_back(rb);

        BoundReport mix;
        mix.name = "mixing_time_bound";
        mix.value = mixing_time_bound(cfg.get_double("eps_mix"), cert, cfg.get_double("w1_init"), T, d,
                                      U.lip_hess());
        mix.inputs = {{"eps", cfg.get_double("eps_mix")},
                      {"w1_init", cfg.get_double("w1_init")},
                      {"c", cert.c},
                      {"M1", cert.M1}};
        mix.constraint_flags = cert.validity;
        mix.constraint_flags.emplace_back("step_size_constraint", constraint);
        reports.push_back(mix);

        BoundReport conv;
        conv.name = "tv_convergence_bound_m0";
        conv.value = tv_convergence_bound(0, cert, cfg.get_double("w1_init"), T, d, U.lip_hess());
        conv.inputs = {{"w1_init", cfg.get_double("w1_init")}, {"c", cert.c}, {"M1", cert.M1}};
        conv.constraint_flags = cert.validity;
        reports.push_back(conv);
    }

    BoundReport bias;
    bias.name = "tv_bias_bound";
    const double M2 = cfg.get_double("M2");
    bias.value = tv_bias_bound(h, T, d, U.lip_hess(), M2, C.value);
    bias.inputs = {{"h", h}, {"M2", M2}, {"C", C.value}};
    bias.constraint_flags = {{"step_size_constraint", constraint},
                             {"M2_user_supplied", cfg.has("M2")}};
    reports.push_back(bias);

    if (mfp) {
        MeanFieldBoundInputs in;
        in.K = K > 0.0 ? K : 1.0;
        in.R = std::max(R, 0.0);
        in.M2 = M2;
        in.w1_ell1_init = cfg.get_double("w1_init");
        in.eps_mix = cfg.get_double("eps_mix");
        in.moments = moments;
        in.moments.per_particle_m2 = Vec::Constant(mfp->n, moments.m2 / mfp->n);
        in.moments.per_particle_m4 = Vec::Constant(mfp->n, moments.m4 / mfp->n);
        auto mf = mean_field_bounds(*mfp, T, h, in);
        reports.insert(reports.end(), mf.begin(), mf.end());
    }

    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_json(r));
    ordered_json rep;
    rep["config"] = config_echo(cfg, "bounds");
    rep["reports"] = arr;

    const std::string out = cfg.get_string("out");
    write_file(out, "bounds.json", rep.dump(2) + "\n");

    ExperimentResult res;
    res.summary = "bounds: " + std::to_string(reports.size()) + " reports -> " + out + "/bounds.json";
    return res;
}

}  // namespace uhmc
