#include "kmc/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace kmc {

std::vector<BranchSymbol> enumerate_branches(int n_jumps, bool backward) {
    require(n_jumps >= 0, "enumerate_branches: negative jump count");
    std::vector<BranchSymbol> out;
    const int m = n_jumps + 1;
    if (backward) {
        for (int k = 1; k <= m; ++k) out.push_back({BranchSymbol::Kind::base_ibp, k});
        for (int j = 2; j <= m; ++j) out.push_back({BranchSymbol::Kind::correction, j});
        for (int j = 2; j <= m; ++j) out.push_back({BranchSymbol::Kind::merged_transfer, j});
        for (int k = 1; k <= m; ++k) out.push_back({BranchSymbol::Kind::merged_local, k});
    } else {
        for (int k = 1; k <= m; ++k) out.push_back({BranchSymbol::Kind::fwd_ibp, k});
        for (int j = 1; j <= n_jumps; ++j) out.push_back({BranchSymbol::Kind::fwd_correction, j});
    }
    return out;
}

std::vector<std::string> symbol_sequence(const BranchSymbol& s, int n_jumps) {
    const int m = n_jumps + 1;
    std::vector<std::string> seq(static_cast<std::size_t>(m));
    const bool forward =
        s.kind == BranchSymbol::Kind::fwd_ibp || s.kind == BranchSymbol::Kind::fwd_correction;
    for (int i = 1; i <= m; ++i) {
        std::string& entry = seq[static_cast<std::size_t>(i - 1)];
        if (i < s.index) entry = forward ? "e" : "0";
        else if (i > s.index) entry = forward ? "0" : "e";
    }
    std::string mark;
    switch (s.kind) {
    case BranchSymbol::Kind::base_ibp:
    case BranchSymbol::Kind::fwd_ibp: mark = "I"; break;
    case BranchSymbol::Kind::correction:
    case BranchSymbol::Kind::fwd_correction: mark = "c"; break;
    case BranchSymbol::Kind::merged_transfer: mark = "*"; break;
    case BranchSymbol::Kind::merged_local: mark = "@"; break;
    }
    seq[static_cast<std::size_t>(s.index - 1)] = mark;
    return seq;
}

namespace {

struct ShiftedTest {
    const TestFunction* f = nullptr;
    double shift = 0.0;
    double operator()(double x) const { return f->value(x) - shift; }
};

ShiftedTest shifted(const TestFunction& f, double L) {
    ShiftedTest s;
    s.f = &f;
    s.shift = f.vanishes_at_L ? 0.0 : f.value(L);
    return s;
}

Step sampled_step(const Model& model, const Path& path, int i, double x_prev) {
    Step s;
    s.index = i;
    s.x_prev = x_prev;
    s.rho = path.rho(i);
    s.t_prev = path.time_at(i - 1);
    s.t_next = path.time_at(i);
    s.z = path.increment(i);
    s.sigma_prev = model.sigma(x_prev).value();
    s.a_prev = s.sigma_prev * s.sigma_prev;
    s.reflect_base = model.L;
    s.x_next = step_state(x_prev, s.rho, model.L, s.sigma_prev, s.z);
    return s;
}

double reflected_point(const Model& model, int rho, double x_prev) {
    return rho ? x_prev : 2.0 * model.L - x_prev;
}

Step pinned_step(const Model& model, const Path& path, int i, double x_prev, double z_target) {
    Step s;
    s.index = i;
    s.x_prev = x_prev;
    s.rho = path.rho(i);
    s.t_prev = path.time_at(i - 1);
    s.t_next = path.time_at(i);
    s.sigma_prev = model.sigma(x_prev).value();
    s.a_prev = s.sigma_prev * s.sigma_prev;
    s.reflect_base = model.L;
    s.x_next = z_target;
    s.z = (z_target - reflected_point(model, s.rho, x_prev)) / s.sigma_prev;
    return s;
}

double pinned_density(const Model& model, const Step& s) {
    return gauss_density(s.a_prev * s.dt(), s.x_next - reflected_point(model, s.rho, s.x_prev));
}

// Shared evaluation context for one replication.
struct Replication {
    const Model& model;
    const Normalization& norm;
    const Path& path;
    bool density_mode = false;
    double z_point = 0.0;
    DensityFactor factor = DensityFactor::reflected;

    int m() const { return path.n_jumps + 1; }

    bool pin_last() const { return density_mode && factor == DensityFactor::reflected; }

    Step last_base_step(double x_prev) const {
        if (pin_last()) return pinned_step(model, path, m(), x_prev, z_point);
        return sampled_step(model, path, m(), x_prev);
    }

    // terminal contribution of a branch ending on the base chain
    double terminal_base(const Step& last, const ShiftedTest& f) const {
        if (!density_mode) return last.x_next >= model.L ? f(last.x_next) : 0.0;
        if (factor == DensityFactor::reflected)
            return z_point >= model.L ? pinned_density(model, last) : 0.0;
        return (last.x_next >= model.L)
                   ? gauss_density(last.a_prev * last.dt(), z_point - last.x_prev)
                   : 0.0;
    }
};

} // namespace

double value_term(const Model& model, const Normalization& norm, const TestFunction& f,
                  const Path& path) {
    const ShiftedTest fs = shifted(f, model.L);
    const int m = path.n_jumps + 1;
    if (model.x0 < model.L) return 0.0;
    double x = model.x0;
    double prod = 1.0;
    for (int i = 1; i <= m; ++i) {
        const Step s = sampled_step(model, path, i, x);
        if (s.x_next < model.L) return 0.0;
        prod *= base_weight(model, norm, s, i == m);
        if (prod == 0.0) return 0.0;
        x = s.x_next;
    }
    return fs(x) * prod;
}

namespace {

// Backward estimator over the four branch families. Density mode replaces the
// test function by the conditional density of the terminal transition at
// z_point (with the final increment pinned) and is used by the terminal
// density-derivative representation.
double backward_core(const Replication& rep, const TestFunction& f, SumMode mode) {
    const Model& model = rep.model;
    const Normalization& norm = rep.norm;
    const Path& path = rep.path;
    const ShiftedTest fs = shifted(f, model.L);
    const int m = rep.m();

    // Base chain states and first death.
    std::vector<Step> steps(static_cast<std::size_t>(m) + 1);
    std::vector<double> X(static_cast<std::size_t>(m) + 1);
    X[0] = model.x0;
    int death = X[0] < model.L ? 0 : -1;
    for (int i = 1; i <= m && death < 0; ++i) {
        steps[static_cast<std::size_t>(i)] =
            (i == m) ? rep.last_base_step(X[static_cast<std::size_t>(i - 1)])
                     : sampled_step(model, path, i, X[static_cast<std::size_t>(i - 1)]);
        X[static_cast<std::size_t>(i)] = steps[static_cast<std::size_t>(i)].x_next;
        const bool ok = rep.pin_last() && i == m
                            ? rep.z_point >= model.L
                            : X[static_cast<std::size_t>(i)] >= model.L;
        if (!ok) death = i;
    }
    const int alive_upto = death < 0 ? m : death - 1;

    // Weights along the alive part of the base chain.
    std::vector<StepWeights> W(static_cast<std::size_t>(m) + 1);
    for (int i = 1; i <= alive_upto; ++i)
        W[static_cast<std::size_t>(i)] =
            step_weights(model, norm, steps[static_cast<std::size_t>(i)], i == m);

    // Prefix products of base weights, P[k] = prod_{i<=k} theta_bar_i.
    std::vector<double> P(static_cast<std::size_t>(m) + 1, 0.0);
    P[0] = 1.0;
    for (int k = 1; k <= alive_upto; ++k)
        P[static_cast<std::size_t>(k)] =
            P[static_cast<std::size_t>(k - 1)] * W[static_cast<std::size_t>(k)].theta_bar;

    // Branch values without their time prefactors.
    std::vector<double> branch_ibp(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> branch_corr(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> branch_mt(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> branch_ml(static_cast<std::size_t>(m) + 1, 0.0);

    if (death < 0) {
        // Suffix products of backward exchange weights.
        std::vector<double> Se(static_cast<std::size_t>(m) + 2, 1.0);
        for (int i = m; i >= 1; --i)
            Se[static_cast<std::size_t>(i)] =
                Se[static_cast<std::size_t>(i + 1)] * W[static_cast<std::size_t>(i)].theta_e_back;
        const Step& last = steps[static_cast<std::size_t>(m)];
        const double fterm = rep.terminal_base(last, fs);
        if (fterm != 0.0) {
            for (int k = 1; k <= m; ++k)
                branch_ibp[static_cast<std::size_t>(k)] =
                    P[static_cast<std::size_t>(k - 1)] * W[static_cast<std::size_t>(k)].i_theta_bar *
                    Se[static_cast<std::size_t>(k + 1)] * fterm;
            for (int j = 2; j <= m; ++j)
                branch_corr[static_cast<std::size_t>(j)] =
                    P[static_cast<std::size_t>(j - 1)] * W[static_cast<std::size_t>(j)].theta_c_back *
                    Se[static_cast<std::size_t>(j + 1)] * fterm;
        }
    }

    // Merged branches re-propagate from the merged state with the same draws.
    const int p_max = std::min(m, alive_upto + 1);
    for (int p = 1; p <= p_max; ++p) {
        const double prefix = P[static_cast<std::size_t>(p - 1)];
        if (prefix == 0.0) continue;
        const bool merged_is_last = p == m;
        const double xp = X[static_cast<std::size_t>(p - 1)];

        double w_transfer = 0.0, w_local = 0.0, suffix = 1.0, fterm = 0.0;
        bool branch_alive = true;

        if (merged_is_last && rep.pin_last()) {
            const MergedStep ms = merged_transition(model, xp, 0.0, path.time_at(p - 1), path.T);
            MergedStep pinned = ms;
            pinned.x_merged = rep.z_point;
            pinned.z_sum = (rep.z_point - ms.mean) / ms.sigma_L;
            branch_alive = rep.z_point >= model.L;
            if (branch_alive) {
                w_transfer = merged_weight_transfer(model, norm, pinned, true);
                w_local = merged_weight_local_ibp(model, norm, pinned, true);
                fterm =
                    gauss_density(ms.sigma_L * ms.sigma_L * ms.dt(), rep.z_point - ms.mean);
            }
        } else {
            const MergedStep ms = merged_transition(model, xp, path.increment(p),
                                                    path.time_at(p - 1), path.time_at(p));
            branch_alive = ms.x_merged >= model.L;
            if (branch_alive) {
                w_transfer = merged_weight_transfer(model, norm, ms, merged_is_last);
                w_local = merged_weight_local_ibp(model, norm, ms, merged_is_last);
                if (merged_is_last) {
                    if (!rep.density_mode) {
                        fterm = fs(ms.x_merged);
                    } else {
                        // plain density factor on the merged terminal transition
                        fterm = gauss_density(ms.sigma_L * ms.sigma_L * ms.dt(),
                                              rep.z_point - ms.mean);
                    }
                } else {
                    // Re-propagate the tail of the chain from the merged state.
                    double x = ms.x_merged;
                    suffix = 1.0;
                    Step last_s{};
                    for (int i = p + 1; i <= m && branch_alive; ++i) {
                        const Step s = (i == m) ? rep.last_base_step(x)
                                                : sampled_step(model, path, i, x);
                        const bool ok = rep.pin_last() && i == m ? rep.z_point >= model.L
                                                                 : s.x_next >= model.L;
                        if (!ok) {
                            branch_alive = false;
                            break;
                        }
                        const StepWeights w = step_weights(model, norm, s, i == m);
                        suffix *= w.theta_e_back;
                        x = s.x_next;
                        if (i == m) last_s = s;
                    }
                    if (branch_alive) fterm = rep.terminal_base(last_s, fs);
                }
            }
        }
        if (!branch_alive) continue;
        if (p >= 2) branch_mt[static_cast<std::size_t>(p)] = prefix * w_transfer * suffix * fterm;
        branch_ml[static_cast<std::size_t>(p)] = prefix * w_local * suffix * fterm;
    }

    double total = 0.0;
    if (mode == SumMode::collapsed) {
        for (int k = 1; k <= m; ++k)
            total += path.dt(k) * branch_ibp[static_cast<std::size_t>(k)];
        for (int j = 2; j <= m; ++j)
            total += path.time_at(j - 1) *
                     (branch_corr[static_cast<std::size_t>(j)] + branch_mt[static_cast<std::size_t>(j)]);
        for (int k = 1; k <= m; ++k) total += branch_ml[static_cast<std::size_t>(k)];
    } else {
        for (int k = 1; k <= m; ++k) {
            double inner = branch_ibp[static_cast<std::size_t>(k)];
            for (int j = k + 1; j <= m; ++j)
                inner += branch_corr[static_cast<std::size_t>(j)] +
                         branch_mt[static_cast<std::size_t>(j)];
            total += path.dt(k) * inner + branch_ml[static_cast<std::size_t>(k)];
        }
    }
    return total;
}

double forward_core(const Replication& rep, const TestFunction& f, SumMode mode) {
    const Model& model = rep.model;
    const Normalization& norm = rep.norm;
    const Path& path = rep.path;
    const ShiftedTest fs = shifted(f, model.L);
    const int m = rep.m();

    std::vector<Step> steps(static_cast<std::size_t>(m) + 1);
    double x = model.x0;
    if (x < model.L) return 0.0;
    for (int i = 1; i <= m; ++i) {
        const Step s = (i == m) ? rep.last_base_step(x) : sampled_step(model, path, i, x);
        const bool ok =
            rep.pin_last() && i == m ? rep.z_point >= model.L : s.x_next >= model.L;
        if (!ok) return 0.0;
        steps[static_cast<std::size_t>(i)] = s;
        x = s.x_next;
    }

    std::vector<StepWeights> W(static_cast<std::size_t>(m) + 1);
    for (int i = 1; i <= m; ++i)
        W[static_cast<std::size_t>(i)] =
            step_weights(model, norm, steps[static_cast<std::size_t>(i)], i == m);

    // Prefix of forward exchange weights, suffix of base weights.
    std::vector<double> Pe(static_cast<std::size_t>(m) + 1, 1.0);
    for (int i = 1; i <= m; ++i)
        Pe[static_cast<std::size_t>(i)] =
            Pe[static_cast<std::size_t>(i - 1)] * W[static_cast<std::size_t>(i)].theta_e_fwd;
    std::vector<double> St(static_cast<std::size_t>(m) + 2, 1.0);
    for (int i = m; i >= 1; --i)
        St[static_cast<std::size_t>(i)] =
            St[static_cast<std::size_t>(i + 1)] * W[static_cast<std::size_t>(i)].theta_bar;

    std::vector<double> branch_ibp(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> branch_corr(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 1; k <= m; ++k)
        branch_ibp[static_cast<std::size_t>(k)] = Pe[static_cast<std::size_t>(k - 1)] *
                                                  W[static_cast<std::size_t>(k)].i_theta_e_fwd *
                                                  St[static_cast<std::size_t>(k + 1)];
    for (int j = 1; j < m; ++j)
        branch_corr[static_cast<std::size_t>(j)] = Pe[static_cast<std::size_t>(j - 1)] *
                                                   W[static_cast<std::size_t>(j)].theta_c_fwd *
                                                   St[static_cast<std::size_t>(j + 1)];

    double total = 0.0;
    if (mode == SumMode::collapsed) {
        for (int k = 1; k <= m; ++k)
            total += path.dt(k) * branch_ibp[static_cast<std::size_t>(k)];
        for (int j = 1; j < m; ++j)
            total += (path.T - path.time_at(j - 1)) * branch_corr[static_cast<std::size_t>(j)];
    } else {
        for (int k = 1; k <= m; ++k) {
            double inner = branch_ibp[static_cast<std::size_t>(k)];
            for (int j = 1; j <= k; ++j) inner += branch_corr[static_cast<std::size_t>(j)];
            total += path.dt(k) * inner;
        }
    }

    const Step& last = steps[static_cast<std::size_t>(m)];
    return rep.terminal_base(last, fs) * total;
}

} // namespace

double ibp_backward_term(const Model& model, const Normalization& norm, const TestFunction& f,
                         const Path& path, SumMode mode) {
    Replication rep{model, norm, path};
    return backward_core(rep, f, mode);
}

double bel_term(const Model& model, const Normalization& norm, const TestFunction& f,
                const Path& path, SumMode mode) {
    Replication rep{model, norm, path};
    return forward_core(rep, f, mode);
}

double density_derivative_terminal(const Model& model, const Normalization& norm,
                                   const Path& path, double z, DensityFactor factor) {
    require(z >= model.L, "density_derivative_terminal: z must be at or above the barrier");
    Replication rep{model, norm, path};
    rep.density_mode = true;
    rep.z_point = z;
    rep.factor = factor;
    const TestFunction unused = TestFunction::linear_above(model.L);
    // The substitution f -> delta_z estimates -T d/dz p, so flip the sign.
    return -backward_core(rep, unused, SumMode::collapsed);
}

double density_derivative_initial(const Model& model, const Normalization& norm, const Path& path,
                                  double z, DensityFactor factor) {
    require(z >= model.L, "density_derivative_initial: z must be at or above the barrier");
    Replication rep{model, norm, path};
    rep.density_mode = true;
    rep.z_point = z;
    rep.factor = factor;
    const TestFunction unused = TestFunction::linear_above(model.L);
    return forward_core(rep, unused, SumMode::collapsed);
}

ReplicationResult replicate_all(const Model& model, const Normalization& norm,
                                const TestFunction& f, const Path& path) {
    ReplicationResult r;
    r.value = value_term(model, norm, f, path);
    r.ibp = ibp_backward_term(model, norm, f, path);
    r.bel = bel_term(model, norm, f, path);
    return r;
}

} // namespace kmc
