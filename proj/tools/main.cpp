#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmc/config.hpp"
#include "kmc/selftest.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed_checks = 1;
constexpr int exit_config_error = 2;
constexpr int exit_model_rejected = 3;

void print_report(const std::string& quantity, const kmc::EstimateReport& rep) {
    std::cout << "quantity   : " << quantity << "\n"
              << "sampler    : " << rep.sampler_spec << "\n"
              << "samples    : " << rep.samples << " (seed " << rep.seed << ")\n"
              << "mean       : " << rep.mean << "\n"
              << "variance   : " << rep.sample_variance << "\n"
              << "stderr     : " << rep.std_error << "\n"
              << "ci95 (+/-) : " << rep.ci95_halfwidth << "\n"
              << "runtime_s  : " << rep.runtime_seconds << "\n";
}

void write_csv(const std::string& path, const std::string& quantity,
               const kmc::EstimateReport& rep) {
    if (path.empty()) return;
    const bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (fresh) out << kmc::csv_header() << "\n";
    out << kmc::csv_row(quantity, rep) << "\n";
}

int cmd_estimate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& out_path, int workers_override, long long seed_override) {
    kmc::ConfigFile doc;
    try {
        doc = kmc::ConfigFile::parse_file(config_path);
        for (const auto& o : overrides) kmc::apply_override(doc, o);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    }

    kmc::RunConfig cfg;
    kmc::PilotSettings pilot;
    kmc::OutputSettings output;
    try {
        cfg = kmc::build_run_config(doc);
        pilot = kmc::build_pilot_settings(doc);
        output = kmc::build_output_settings(doc);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    }
    if (workers_override > 0) cfg.workers = workers_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_path.empty()) output.path = out_path;

    const kmc::ValidationReport vr = kmc::validate_model(cfg.model, kmc::default_probe_grid(cfg.model));
    if (!vr.accepted) {
        std::cerr << "model rejected:";
        for (const auto& n : vr.notes) std::cerr << " " << n << ";";
        std::cerr << "\n";
        return exit_model_rejected;
    }
    for (const auto& n : vr.notes) std::cout << "note: " << n << "\n";

    if (pilot.enabled && !pilot.grid.empty()) {
        const kmc::PilotResult pr = kmc::pilot_tune(cfg, pilot.grid, pilot.pilot_samples);
        cfg.sampler = pr.chosen;
        if (!pr.note.empty()) std::cout << "pilot: " << pr.note << "\n";
        std::cout << "pilot: selected " << pr.chosen.spec() << "\n";
    }

    const kmc::EstimateReport rep = kmc::run(cfg);
    print_report(kmc::to_string(cfg.quantity), rep);
    write_csv(output.path, kmc::to_string(cfg.quantity), rep);
    return exit_ok;
}

int cmd_tables(int which, long long samples, int workers, long long seed,
               const std::string& out_path) {
    using namespace kmc;
    const Quantity q = which == 1 ? Quantity::value : Quantity::bel;
    std::cout << (which == 1 ? "E[h(X_T) 1{alive}]" : "T d/dx E[h(X_T) 1{alive}]")
              << ", sine-martingale family, T=0.5, L=0, x0=1\n";
    std::cout << "sigma=omega |        exponential sampling        |           beta sampling\n";
    std::cout << "            |  mean; var; L1dev; (+/-)ci         |  mean; var; L1dev; (+/-)ci\n";
    for (double sb : {0.1, 0.2, 0.3}) {
        RunConfig base;
        base.model = Model::sine_martingale(sb, sb, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
        base.test_function = base.model.default_test_function();
        base.quantity = q;
        base.samples = samples;
        base.seed = static_cast<std::uint64_t>(seed);
        base.workers = workers;
        base.collect_mean_abs_dev = true;

        std::vector<JumpLaw> egrid = {JumpLaw::exponential(1.0), JumpLaw::exponential(2.0),
                                      JumpLaw::exponential(3.0), JumpLaw::exponential(4.0)};
        std::vector<JumpLaw> bgrid;
        for (double alpha : {0.3, 0.5, 0.7})
            for (double tau : {0.6, 0.8, 1.0, 1.5}) bgrid.push_back(JumpLaw::beta_one(alpha, tau));

        RunConfig pilot_cfg = base;
        pilot_cfg.collect_mean_abs_dev = false;
        pilot_cfg.seed = base.seed + 101;
        const long long pilot_m = std::min<long long>(samples / 2, 50000);
        const PilotResult pe = pilot_tune(pilot_cfg, egrid, pilot_m);
        const PilotResult pb = pilot_tune(pilot_cfg, bgrid, pilot_m);

        RunConfig ce = base;
        ce.sampler = pe.chosen;
        RunConfig cb = base;
        cb.sampler = pb.chosen;
        const EstimateReport re = run(ce);
        const EstimateReport rb = run(cb);

        auto cell = [](const EstimateReport& r) {
            std::ostringstream os;
            os.precision(4);
            os << r.mean << "; " << r.sample_variance << "; " << r.mean_abs_dev << "; (+/-) "
               << r.ci95_halfwidth;
            return os.str();
        };
        std::cout << sb << "  | " << cell(re) << "  [" << pe.chosen.spec() << "]\n"
                  << "     | " << cell(rb) << "  [" << pb.chosen.spec() << "]\n";
        if (!out_path.empty()) {
            write_csv(out_path, to_string(q), re);
            write_csv(out_path, to_string(q), rb);
        }
    }
    return exit_ok;
}

int cmd_selftest(const std::string& level, int workers, const std::string& json_path) {
    std::vector<kmc::selftest::CheckResult> results;
    if (level == "fast")
        results = kmc::selftest::run_fast();
    else if (level == "full")
        results = kmc::selftest::run_all(workers);
    else {
        std::cerr << "unknown selftest level '" << level << "'\n";
        return exit_config_error;
    }
    for (const auto& r : results)
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    if (!json_path.empty()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : results)
            doc.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        std::ofstream out(json_path);
        out << doc.dump(2) << "\n";
    }
    return kmc::selftest::all_passed(results) ? exit_ok : exit_failed_checks;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unbiased Monte Carlo for one-dimensional diffusions killed at a barrier"};
    app.require_subcommand(1);

    auto* estimate = app.add_subcommand("estimate", "Run one estimator from a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    int workers = 0;
    long long seed = -1;
    estimate->add_option("--config", config_path, "config file path")->required();
    estimate->add_option("--set", overrides, "override as section.key=value (repeatable)");
    estimate->add_option("--out", out_path, "CSV output path");
    estimate->add_option("--workers", workers, "worker threads");
    estimate->add_option("--seed", seed, "random seed");

    auto* tables = app.add_subcommand("tables", "Reproduce the benchmark tables at desk scale");
    int which = 1;
    long long table_m = 100000;
    int table_workers = 4;
    long long table_seed = 1;
    std::string table_out;
    tables->add_option("--which", which, "table number (1 = value, 2 = BEL)")
        ->check(CLI::IsMember({1, 2}));
    tables->add_option("--m", table_m, "replications per cell");
    tables->add_option("--workers", table_workers, "worker threads");
    tables->add_option("--seed", table_seed, "random seed");
    tables->add_option("--out", table_out, "CSV output path");

    auto* selftest = app.add_subcommand("selftest", "Identity oracles and acceptance checks");
    std::string level = "fast";
    int st_workers = 4;
    std::string json_path;
    selftest->add_option("--level", level, "fast or full");
    selftest->add_option("--workers", st_workers, "worker threads");
    selftest->add_option("--json", json_path, "also write results as JSON to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }

    try {
        if (estimate->parsed())
            return cmd_estimate(config_path, overrides, out_path, workers, seed);
        if (tables->parsed())
            return cmd_tables(which, table_m, table_workers, table_seed, table_out);
        return cmd_selftest(level, st_workers, json_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}
