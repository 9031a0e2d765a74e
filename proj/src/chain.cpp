#include "kmc/chain.hpp"

#include <cmath>

#include "kmc/common.hpp"

namespace kmc {

double step_state(double x_prev, int rho, double L, double sigma_prev, double z) {
    return rho * x_prev + (1 - rho) * (2.0 * L - x_prev) + sigma_prev * z;
}

ChainState propagate(const Model& model, const Path& path) {
    ChainState c;
    const int m = path.n_jumps + 1;
    c.states.resize(static_cast<std::size_t>(m) + 1);
    c.alive.resize(static_cast<std::size_t>(m) + 1);
    c.states[0] = model.x0;
    c.alive[0] = model.x0 >= model.L;
    if (!c.alive[0]) c.first_death = 0;
    for (int i = 1; i <= m; ++i) {
        const double xp = c.states[static_cast<std::size_t>(i - 1)];
        const double sp = model.sigma(xp).value();
        const double x =
            step_state(xp, path.rho(i), model.L, sp, path.increment(i));
        c.states[static_cast<std::size_t>(i)] = x;
        const bool ok = x >= model.L;
        c.alive[static_cast<std::size_t>(i)] = ok;
        if (!ok && c.first_death < 0) c.first_death = i;
    }
    return c;
}

Step make_step(const Model& model, const Path& path, const ChainState& chain, int i) {
    require(i >= 1 && i <= path.n_jumps + 1, "make_step: index out of range");
    Step s;
    s.index = i;
    s.x_prev = chain.states[static_cast<std::size_t>(i - 1)];
    s.x_next = chain.states[static_cast<std::size_t>(i)];
    s.rho = path.rho(i);
    s.t_prev = path.time_at(i - 1);
    s.t_next = path.time_at(i);
    s.z = path.increment(i);
    s.sigma_prev = model.sigma(s.x_prev).value();
    s.a_prev = s.sigma_prev * s.sigma_prev;
    s.reflect_base = model.L;
    return s;
}

MergedStep merged_transition(const Model& model, double x_prev, double z_sum, double t_prev,
                             double t_end) {
    const double sp = model.sigma(x_prev).value();
    require(sp > 0.0, "merged_transition: sigma(x_prev) must be positive");
    require(t_end > t_prev, "merged_transition: empty time interval");
    MergedStep m;
    m.x_prev = x_prev;
    m.z_sum = z_sum;
    m.t_prev = t_prev;
    m.t_end = t_end;
    m.sigma_L = model.sigma(model.L).value();
    m.a_prev = sp * sp;
    m.mu = -m.sigma_L / sp;
    m.mean = model.L * (1.0 - m.mu) + x_prev * m.mu;
    m.x_merged = m.mean + m.sigma_L * z_sum;
    return m;
}

FlowDerivatives flow_derivatives(const Model& model, const Step& step) {
    const Jet s = model.sigma(step.x_prev);
    FlowDerivatives f;
    f.first = (2.0 * step.rho - 1.0) + s.deriv(1) * step.z;
    f.second = s.deriv(2) * step.z;
    return f;
}

} // namespace kmc
