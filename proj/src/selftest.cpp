#include "kmc/selftest.hpp"

#include <cmath>
#include <sstream>

#include "kmc/oracles.hpp"

namespace kmc {
namespace selftest {

namespace {

using oracles::KilledBmOracle;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult check(const std::string& name, bool pass, const std::string& detail) {
    return {name, pass, detail};
}

Model table_model(double sigma_bar) {
    return Model::sine_martingale(sigma_bar, sigma_bar, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
}

std::vector<JumpLaw> exp_grid() {
    return {JumpLaw::exponential(1.0), JumpLaw::exponential(2.0), JumpLaw::exponential(3.0),
            JumpLaw::exponential(4.0)};
}

std::vector<JumpLaw> beta_grid(double T) {
    std::vector<JumpLaw> g;
    for (double alpha : {0.3, 0.5, 0.7})
        for (double tau : {1.2 * T, 1.6 * T, 2.0 * T, 3.0 * T})
            g.push_back(JumpLaw::beta_one(alpha, tau));
    return g;
}

struct CellRun {
    EstimateReport report;
    JumpLaw law = JumpLaw::exponential(1.0);
};

CellRun tuned_run(Quantity q, double sigma_bar, const std::vector<JumpLaw>& grid,
                  long long samples, int workers, std::uint64_t seed) {
    RunConfig cfg;
    cfg.model = table_model(sigma_bar);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = q;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.workers = workers;
    RunConfig pilot_cfg = cfg;
    pilot_cfg.seed = seed + 7777;
    // Heavy-tailed replications make small-sample variance estimates noisy;
    // give the pilot enough draws to rank the grid reliably.
    const PilotResult pilot = pilot_tune(pilot_cfg, grid, 50000);
    cfg.sampler = pilot.chosen;
    CellRun out;
    out.law = pilot.chosen;
    out.report = run(cfg);
    return out;
}

// ---------------- fast suite ----------------

void fast_identities(std::vector<CheckResult>& out) {
    const Model sine = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    const Model sine01 = Model::sine_martingale(0.1, 0.1, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);

    // Duality over polynomial pairs, both Bernoulli values, both orders.
    {
        double worst = 0.0;
        const auto fpow = [](int p) {
            return [p](double y) { return std::pow(y, p); };
        };
        const auto dpow = [](int p, int l) {
            return [p, l](double y) {
                double c = 1.0;
                for (int k = 0; k < l; ++k) c *= p - k;
                return p - l >= 0 ? c * std::pow(y, p - l) : 0.0;
            };
        };
        for (int p = 0; p <= 4; ++p)
            for (int q = 0; q <= 3; ++q)
                for (int l = 1; l <= 2; ++l)
                    for (int rho = 0; rho <= 1; ++rho) {
                        const double r = oracles::check_duality(
                            sine, 0.7, rho, 0.3, fpow(p), dpow(p, l), l,
                            [q](const StepAlgebra& alg) {
                                BiJet h = BiJet::constant(1.0);
                                for (int k = 0; k < q; ++k) h = h * alg.x_next();
                                return h;
                            });
                        worst = std::max(worst, r);
                    }
        out.push_back(check("duality", worst <= 1e-9, "max residual " + fmt(worst)));
    }

    // Extraction formula, exact on polynomial pairs.
    {
        double worst = 0.0;
        Step s;
        s.x_prev = 0.8;
        s.rho = 0;
        s.t_prev = 0.1;
        s.t_next = 0.35;
        s.sigma_prev = sine.sigma(0.8).value();
        s.a_prev = s.sigma_prev * s.sigma_prev;
        s.z = 0.4;
        s.reflect_base = sine.L;
        s.x_next = step_state(s.x_prev, s.rho, sine.L, s.sigma_prev, s.z);
        const StepAlgebra alg(sine, s);
        const BiJet h1 = alg.x_next() * alg.x_next() + alg.x_prev() * 0.3;
        const BiJet h2 = alg.x_next() * 2.0 - 0.7;
        for (int l = 1; l <= 2; ++l) {
            BiJet lhs = h1 * h2;
            for (int k = 0; k < l; ++k) lhs = alg.apply_I(lhs);
            double rhs = 0.0;
            for (int j = 0; j <= l; ++j) {
                const double binom = l == 1 ? 1.0 : (j == 1 ? 2.0 : 1.0);
                BiJet part = h1;
                for (int k = 0; k < l - j; ++k) part = alg.apply_I(part);
                BiJet dh = h2;
                for (int k = 0; k < j; ++k) dh = dh.d_next();
                rhs += std::pow(-1.0, j) * binom * part.value() * dh.value();
            }
            worst = std::max(worst, std::abs(lhs.value() - rhs));
        }
        out.push_back(check("extraction", worst <= 1e-12, "max residual " + fmt(worst)));
    }

    // Chain rule on a product functional.
    {
        double worst = 0.0;
        for (int rho = 0; rho <= 1; ++rho) {
            Step s;
            s.x_prev = 1.1;
            s.rho = rho;
            s.t_prev = 0.0;
            s.t_next = 0.21;
            s.sigma_prev = sine.sigma(1.1).value();
            s.a_prev = s.sigma_prev * s.sigma_prev;
            s.z = -0.33;
            s.reflect_base = sine.L;
            s.x_next = step_state(s.x_prev, s.rho, sine.L, s.sigma_prev, s.z);
            const StepAlgebra alg(sine, s);
            worst = std::max(worst,
                             chain_rule_residual(alg, alg.x_prev() * alg.x_next()));
            worst = std::max(worst, chain_rule_residual(alg, BiJet::constant(1.0)));
        }
        out.push_back(check("chain_rule", worst <= 1e-10, "max residual " + fmt(worst)));
    }

    // Transfer of derivatives, interior and last interval.
    {
        const TestFunction fsq = TestFunction::quadratic_above(0.0);
        const auto interior = oracles::check_transfer(sine01, 1.0, 0.1, fsq, false);
        const auto last = oracles::check_transfer(sine01, 1.0, 0.1, fsq, true);
        const double r = std::max(interior.residual(), last.residual());
        out.push_back(check("transfer", r <= 1e-5,
                            "interior " + fmt(interior.residual()) + ", last " +
                                fmt(last.residual())));
    }

    // Boundary merging identities; the alternative last-interval coefficient
    // must fail, which pins the implemented variant.
    {
        const auto f = [](double y) { return (y - 0.0) * (y - 0.0); };
        const auto star = oracles::check_merging(sine, 0.5, 0.2, f, oracles::MergingIdentity::star);
        const auto cast =
            oracles::check_merging(sine, 0.5, 0.2, f, oracles::MergingIdentity::circledast);
        const auto lstar =
            oracles::check_merging(sine, 0.5, 0.2, f, oracles::MergingIdentity::last_star);
        const auto lcast =
            oracles::check_merging(sine, 0.5, 0.2, f, oracles::MergingIdentity::last_circledast);
        const auto lcast_alt = oracles::check_merging(
            sine, 0.5, 0.2, f, oracles::MergingIdentity::last_circledast, true);
        const double worst = std::max({star.rel_residual(), cast.rel_residual(),
                                       lstar.rel_residual(), lcast.rel_residual()});
        const bool discriminated = lcast_alt.rel_residual() > 10.0 * lcast.rel_residual();
        out.push_back(check("merging", worst <= 1e-4 && discriminated,
                            "max residual " + fmt(worst) + ", doubled-coefficient residual " +
                                fmt(lcast_alt.rel_residual())));
    }

    // Gaussian time convolutions.
    {
        double worst = 0.0;
        for (int l = 0; l <= 2; ++l)
            for (double alpha : {0.8, 1.0})
                for (double beta : {0.6, 1.0})
                    for (double xx : {0.5, 1.0})
                        for (double yy : {0.3, 0.9}) {
                            worst = std::max(worst, oracles::check_gaussian_convolution(
                                                        alpha, beta, xx, yy, 1.0, l, false));
                            worst = std::max(worst, oracles::check_gaussian_convolution(
                                                        alpha, beta, xx, yy, 1.0, l, true));
                        }
        out.push_back(check("gaussian_convolution", worst <= 1e-7, "max residual " + fmt(worst)));
    }

    // Parity reduction at the boundary.
    {
        double worst = 0.0;
        const auto f = [](double y) { return 1.0 + 0.1 * y; };
        for (int l = 0; l <= 2; ++l)
            for (int k = 1; k <= 2; ++k)
                worst = std::max(worst, oracles::check_reduction(sine, 0.9, 0.15, f, l, k));
        worst = std::max(worst, oracles::check_reduction_smooth(
                                    sine, 0.9, 0.15, f,
                                    [&](double y) {
                                        Jet j = Jet::variable(y);
                                        return j - 0.0;
                                    },
                                    1));
        worst = std::max(worst, oracles::check_reduction_smooth(
                                    sine, 0.9, 0.15, f,
                                    [&](double y) { return sine.drift(y); }, 2));
        out.push_back(check("reduction", worst <= 1e-12, "max residual " + fmt(worst)));
    }
}

// ---------------- full suite (acceptance criteria) ----------------

void criterion_tables(std::vector<CheckResult>& out, Quantity q, const char* name,
                      const std::vector<double>& beta_reference, int workers,
                      bool require_beta_beats_exp_at_03) {
    const std::vector<double> sigmas = {0.1, 0.2, 0.3};
    bool pass = true;
    std::ostringstream detail;
    double exp_var_03 = 0.0, beta_var_03 = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double sb = sigmas[i];
        const CellRun exp_run =
            tuned_run(q, sb, exp_grid(), 100000, workers, 9200100 + static_cast<unsigned>(i));
        const CellRun beta_run =
            tuned_run(q, sb, beta_grid(0.5), 100000, workers, 9300100 + static_cast<unsigned>(i));
        const bool exp_ci = std::abs(exp_run.report.mean - 2.0) <= exp_run.report.ci95_halfwidth;
        const bool beta_ci =
            std::abs(beta_run.report.mean - 2.0) <= beta_run.report.ci95_halfwidth;
        const double ref = beta_reference[i];
        const bool var_band = beta_run.report.sample_variance >= 0.5 * ref &&
                              beta_run.report.sample_variance <= 1.5 * ref;
        pass = pass && exp_ci && beta_ci && var_band;
        detail << "sb=" << sb << " exp[" << exp_run.law.spec() << "] mean=" << fmt(exp_run.report.mean)
               << " var=" << fmt(exp_run.report.sample_variance) << " | beta["
               << beta_run.law.spec() << "] mean=" << fmt(beta_run.report.mean)
               << " var=" << fmt(beta_run.report.sample_variance) << " (ref " << ref << "); ";
        if (sb == 0.3) {
            exp_var_03 = exp_run.report.sample_variance;
            beta_var_03 = beta_run.report.sample_variance;
        }
    }
    if (require_beta_beats_exp_at_03) {
        const bool better = beta_var_03 < exp_var_03;
        pass = pass && better;
        detail << "beta<exp at 0.3: " << (better ? "yes" : "no");
    }
    out.push_back(check(name, pass, detail.str()));
}

void criterion_constant_oracle(std::vector<CheckResult>& out, int workers) {
    bool pass = true;
    double worst_z = 0.0;
    std::string worst_case;
    int idx = 0;
    for (double sigma : {0.5, 1.0})
        for (double x : {0.5, 1.0})
            for (double T : {0.5, 1.0}) {
                const Model model = Model::constant(sigma, 0.0, T, x);
                const KilledBmOracle oracle{sigma, 0.0, x, T};
                const std::vector<JumpLaw> laws = {JumpLaw::exponential(2.0),
                                                   JumpLaw::beta_one(0.5, 2.0 * T)};
                for (const auto& law : laws) {
                    const auto run_one = [&](Quantity q, const TestFunction& f,
                                             double target, const char* tag) {
                        RunConfig cfg;
                        cfg.model = model;
                        cfg.test_function = f;
                        cfg.quantity = q;
                        cfg.sampler = law;
                        cfg.samples = 100000;
                        cfg.seed = 777000 + static_cast<unsigned>(idx++);
                        cfg.workers = workers;
                        cfg.z_point = x;
                        const EstimateReport rep = run(cfg);
                        const double z = std::abs(rep.mean - target) /
                                         std::max(rep.std_error, 1e-12);
                        if (z > worst_z) {
                            worst_z = z;
                            std::ostringstream os;
                            os << tag << " sigma=" << sigma << " x=" << x << " T=" << T << " "
                               << law.spec() << " mean=" << fmt(rep.mean) << " target="
                               << fmt(target);
                            worst_case = os.str();
                        }
                        if (z > 4.0) pass = false;
                    };
                    const TestFunction fsq = TestFunction::quadratic_above(0.0);
                    const TestFunction flin = TestFunction::linear_above(0.0);
                    run_one(Quantity::value, fsq, oracle.value(fsq.value), "value(sq)");
                    run_one(Quantity::value, flin, oracle.value(flin.value), "value(lin)");
                    run_one(Quantity::bel, fsq, T * oracle.bel(fsq.value), "bel(sq)");
                    run_one(Quantity::bel, flin, T * oracle.bel(flin.value), "bel(lin)");
                    run_one(Quantity::density_dz, fsq, T * oracle.density_dz(x), "ddz");
                    run_one(Quantity::density_dx, fsq, T * oracle.density_dx(x), "ddx");
                }
            }
    out.push_back(check("criterion3_constant_oracle", pass,
                        "worst |z|=" + fmt(worst_z) + " at " + worst_case));
}

void criterion_bel_fd(std::vector<CheckResult>& out) {
    const Model cm = Model::constant(1.0, 0.0, 0.5, 1.0);
    const Model sm = Model::sine_martingale(0.1, 0.1, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    const auto c1 = oracles::fd_consistency_bel(cm, TestFunction::quadratic_above(0.0),
                                                JumpLaw::beta_one(0.5, 1.0), 100000, 1e-3, 31);
    const auto c2 = oracles::fd_consistency_bel(sm, sm.default_test_function(),
                                                JumpLaw::beta_one(0.5, 1.0), 100000, 1e-3, 32);
    const bool pass = std::abs(c1.z_score) <= 4.0 && std::abs(c2.z_score) <= 4.0;
    out.push_back(check("criterion5_bel_fd", pass,
                        "constant z=" + fmt(c1.z_score) + ", sine z=" + fmt(c2.z_score)));
}

void criterion_scaling(std::vector<CheckResult>& out) {
    const Model sm = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    const Normalization norm = Normalization::poisson(1.0, 1.0);
    const std::vector<double> dts = {1e-1, 1e-2, 1e-3};
    const auto rms_slope = [&](const std::function<double(double, Rng&)>& draw) {
        std::vector<double> logs;
        for (double dt : dts) {
            Rng rng(4242, static_cast<std::uint64_t>(dt * 1e6));
            double s = 0.0;
            const int n = 100000;
            for (int i = 0; i < n; ++i) {
                const double v = draw(dt, rng);
                s += v * v;
            }
            logs.push_back(0.5 * std::log10(s / n));
        }
        // Least squares slope over the three decades.
        const double mx = -2.0; // mean of log10(dt)
        double num = 0.0, den = 0.0;
        double my = (logs[0] + logs[1] + logs[2]) / 3.0;
        const double xs[3] = {-1.0, -2.0, -3.0};
        for (int i = 0; i < 3; ++i) {
            num += (xs[i] - mx) * (logs[static_cast<std::size_t>(i)] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        return num / den;
    };

    // Weights are gated by the alive indicator, matching the norms in which
    // the scaling is stated.
    const double x0 = 1.0;
    const double base_slope = rms_slope([&](double dt, Rng& rng) {
        Step s;
        s.x_prev = x0;
        s.rho = rng.bernoulli();
        s.t_prev = 0.0;
        s.t_next = dt;
        s.sigma_prev = sm.sigma(x0).value();
        s.a_prev = s.sigma_prev * s.sigma_prev;
        s.z = std::sqrt(dt) * rng.normal();
        s.reflect_base = sm.L;
        s.x_next = step_state(x0, s.rho, sm.L, s.sigma_prev, s.z);
        return s.x_next >= sm.L ? base_weight(sm, norm, s, false) : 0.0;
    });
    // The merged transitions matter near the barrier (they arise from
    // boundary-localized terms); probe them started within one diffusive
    // length of it, where the alive set keeps mass as dt shrinks.
    const double merged_slope = rms_slope([&](double dt, Rng& rng) {
        const double xp = sm.L + 0.5 * std::sqrt(sm.a(sm.L).value() * dt);
        const MergedStep ms = merged_transition(sm, xp, std::sqrt(dt) * rng.normal(), 0.0, dt);
        return ms.x_merged >= sm.L ? merged_weight_transfer(sm, norm, ms, false) : 0.0;
    });
    const double merged_local_slope = rms_slope([&](double dt, Rng& rng) {
        const double xp = sm.L + 0.5 * std::sqrt(sm.a(sm.L).value() * dt);
        const MergedStep ms = merged_transition(sm, xp, std::sqrt(dt) * rng.normal(), 0.0, dt);
        return ms.x_merged >= sm.L ? merged_weight_local_ibp(sm, norm, ms, false) : 0.0;
    });
    const bool pass = std::abs(base_slope + 0.5) <= 0.1 && merged_slope >= -0.6 &&
                      merged_local_slope >= -0.6;
    out.push_back(check("criterion6_time_degeneracy", pass,
                        "base slope " + fmt(base_slope) + ", merged " + fmt(merged_slope) +
                            ", merged-local " + fmt(merged_local_slope)));
}

void criterion_determinism(std::vector<CheckResult>& out) {
    RunConfig cfg;
    cfg.model = table_model(0.1);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::value;
    cfg.sampler = JumpLaw::beta_one(0.5, 1.0);
    cfg.samples = 50000;
    cfg.seed = 5150;
    EstimateReport reports[3];
    const int workers[3] = {1, 2, 8};
    for (int i = 0; i < 3; ++i) {
        cfg.workers = workers[i];
        reports[i] = run(cfg);
    }
    const bool same_mean =
        reports[0].mean == reports[1].mean && reports[1].mean == reports[2].mean;
    const double v0 = reports[0].sample_variance;
    const bool var_close = std::abs(reports[1].sample_variance - v0) <= 1e-12 * std::abs(v0) &&
                           std::abs(reports[2].sample_variance - v0) <= 1e-12 * std::abs(v0);
    out.push_back(check("criterion7_determinism", same_mean && var_close,
                        "means " + fmt(reports[0].mean) + "/" + fmt(reports[1].mean) + "/" +
                            fmt(reports[2].mean)));
}

void criterion_variance_growth(std::vector<CheckResult>& out, int workers) {
    RunConfig cfg;
    cfg.model = table_model(0.1);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::value;
    cfg.sampler = JumpLaw::beta_two(0.5, 0.5, 1.0);
    cfg.seed = 616;
    cfg.workers = workers;
    cfg.samples = 10000;
    const double v_small = run(cfg).sample_variance;
    cfg.samples = 1000000;
    const double v_large = run(cfg).sample_variance;
    const double ratio = v_large / v_small;
    out.push_back(check("criterion8_variance_stabilizes", ratio >= 0.5 && ratio <= 2.0,
                        "variance ratio 1e6/1e4 = " + fmt(ratio)));
}

void info_parallel_speedup(std::vector<CheckResult>& out) {
    // Performance smoke test, informational only (never gates acceptance).
    RunConfig cfg;
    cfg.model = table_model(0.1);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::bel;
    cfg.sampler = JumpLaw::beta_one(0.5, 1.0);
    cfg.samples = 200000;
    cfg.seed = 2121;
    cfg.workers = 1;
    const double t1 = run(cfg).runtime_seconds;
    cfg.workers = 4;
    const double t4 = run(cfg).runtime_seconds;
    const double speedup = t1 / std::max(t4, 1e-9);
    std::ostringstream os;
    os << "speedup 1->4 workers: " << fmt(speedup) << "x"
       << (speedup >= 2.8 ? "" : " (below the 0.7-linear target on this host)");
    out.push_back(check("info_parallel_speedup", true, os.str()));
}

void extra_backward_consistency(std::vector<CheckResult>& out) {
    // The backward representation against the plain value representation
    // applied to f'; exercises the merged branches on a model with
    // a'(L) != b(L).
    const Model sm = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    const TestFunction fsq = TestFunction::quadratic_above(0.0);
    TestFunction fprime;
    fprime.value = [](double y) { return 2.0 * y; };
    fprime.derivative = [](double) { return 2.0; };
    fprime.vanishes_at_L = true;
    fprime.name = "2(x-L)";
    const auto c = oracles::backward_vs_value(sm, fsq, fprime, JumpLaw::beta_one(0.5, 1.0),
                                              200000, 99);
    out.push_back(check("extra_backward_vs_value", std::abs(c.z_score) <= 4.0,
                        "z=" + fmt(c.z_score) + " backward=" + fmt(c.bel_mean) + " value=" +
                            fmt(c.fd_mean)));
}

} // namespace

std::vector<CheckResult> run_fast() {
    std::vector<CheckResult> out;
    fast_identities(out);
    return out;
}

std::vector<CheckResult> run_full(int workers) {
    std::vector<CheckResult> out;
    criterion_tables(out, Quantity::value, "criterion1_table1", {14.9, 77.2, 681.2}, workers,
                     false);
    criterion_tables(out, Quantity::bel, "criterion2_table2", {295.0, 467.7, 2358.4}, workers,
                     true);
    criterion_constant_oracle(out, workers);
    criterion_bel_fd(out);
    criterion_scaling(out);
    criterion_determinism(out);
    criterion_variance_growth(out, workers);
    extra_backward_consistency(out);
    info_parallel_speedup(out);
    return out;
}

std::vector<CheckResult> run_all(int workers) {
    std::vector<CheckResult> out = run_fast();
    auto full = run_full(workers);
    out.insert(out.end(), full.begin(), full.end());
    return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

} // namespace selftest
} // namespace kmc
