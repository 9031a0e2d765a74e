#include "kmc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace kmc {

std::string to_string(Quantity q) {
    switch (q) {
    case Quantity::value: return "value";
    case Quantity::ibp: return "ibp";
    case Quantity::bel: return "bel";
    case Quantity::density_dz: return "density_dz";
    case Quantity::density_dx: return "density_dx";
    }
    return "value";
}

Quantity quantity_from_string(const std::string& s) {
    if (s == "value") return Quantity::value;
    if (s == "ibp") return Quantity::ibp;
    if (s == "bel") return Quantity::bel;
    if (s == "density_dz") return Quantity::density_dz;
    if (s == "density_dx") return Quantity::density_dx;
    throw contract_violation("unknown quantity '" + s + "'");
}

double replicate(const RunConfig& cfg, const Normalization& norm, std::uint64_t replication) {
    Rng rng(cfg.seed, replication);
    const Path path = sample_path(cfg.sampler, cfg.model.T, rng);
    const double z = std::isnan(cfg.z_point) ? cfg.model.x0 : cfg.z_point;
    switch (cfg.quantity) {
    case Quantity::value: return value_term(cfg.model, norm, cfg.test_function, path);
    case Quantity::ibp: return ibp_backward_term(cfg.model, norm, cfg.test_function, path);
    case Quantity::bel: return bel_term(cfg.model, norm, cfg.test_function, path);
    case Quantity::density_dz: return density_derivative_terminal(cfg.model, norm, path, z);
    case Quantity::density_dx: return density_derivative_initial(cfg.model, norm, path, z);
    }
    return 0.0;
}

namespace {

constexpr long long kBlock = 4096;

template <class PerItem>
void parallel_blocks(long long total, int workers, PerItem&& per_block_fn, int n_blocks_hint) {
    (void)total;
    std::atomic<long long> next{0};
    const auto work = [&]() {
        while (true) {
            const long long b = next.fetch_add(1);
            if (b >= n_blocks_hint) break;
            per_block_fn(b);
        }
    };
    if (workers <= 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

} // namespace

EstimateReport run(const RunConfig& cfg) {
    require(cfg.samples >= 1, "engine: need at least one replication");
    require(cfg.workers >= 1, "engine: need at least one worker");
    const auto t0 = std::chrono::steady_clock::now();
    const Normalization norm = Normalization::renewal(cfg.sampler, cfg.model.T);

    const long long n_blocks = (cfg.samples + kBlock - 1) / kBlock;
    std::vector<Welford> blocks(static_cast<std::size_t>(n_blocks));
    parallel_blocks(
        cfg.samples, cfg.workers,
        [&](long long b) {
            Welford acc;
            const long long lo = b * kBlock;
            const long long hi = std::min(cfg.samples, lo + kBlock);
            for (long long r = lo; r < hi; ++r)
                acc.add(replicate(cfg, norm, static_cast<std::uint64_t>(r)));
            blocks[static_cast<std::size_t>(b)] = acc;
        },
        static_cast<int>(n_blocks));

    Welford total;
    for (const auto& b : blocks) total.merge(b);

    EstimateReport rep;
    rep.mean = total.mean;
    rep.sample_variance = total.variance();
    rep.std_error = std::sqrt(rep.sample_variance / static_cast<double>(total.count));
    rep.ci95_halfwidth = 1.96 * rep.std_error;
    rep.samples = total.count;
    rep.sampler_spec = cfg.sampler.spec();
    rep.seed = cfg.seed;

    if (cfg.collect_mean_abs_dev) {
        // Second deterministic pass about the final mean.
        std::vector<double> absdev(static_cast<std::size_t>(n_blocks), 0.0);
        const double mean = rep.mean;
        parallel_blocks(
            cfg.samples, cfg.workers,
            [&](long long b) {
                double s = 0.0;
                const long long lo = b * kBlock;
                const long long hi = std::min(cfg.samples, lo + kBlock);
                for (long long r = lo; r < hi; ++r)
                    s += std::abs(replicate(cfg, norm, static_cast<std::uint64_t>(r)) - mean);
                absdev[static_cast<std::size_t>(b)] = s;
            },
            static_cast<int>(n_blocks));
        double s = 0.0;
        for (double v : absdev) s += v;
        rep.mean_abs_dev = s / static_cast<double>(cfg.samples);
    }

    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

PilotResult pilot_tune(const RunConfig& base, const std::vector<JumpLaw>& grid,
                       long long pilot_samples) {
    require(!grid.empty(), "pilot_tune: empty grid");
    PilotResult out;
    if (pilot_samples <= 0) {
        out.chosen = grid.front();
        out.note = "pilot disabled (pilot_M = 0); kept the first grid entry";
        return out;
    }
    double best = std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (const auto& law : grid) {
        RunConfig cfg = base;
        cfg.sampler = law;
        cfg.samples = pilot_samples;
        const EstimateReport rep = run(cfg);
        out.variances.emplace_back(law.spec(), rep.sample_variance);
        if (!have_best || rep.sample_variance < best) {
            best = rep.sample_variance;
            out.chosen = law;
            have_best = true;
        }
    }
    return out;
}

} // namespace kmc
