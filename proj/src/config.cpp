#include "kmc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace kmc {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"model",
         {"family", "sigma_bar", "omega", "c0", "c1", "c3", "L", "x0", "T", "testf"}},
        {"run", {"quantity", "M", "seed", "workers", "z"}},
        {"sampler", {"spec"}},
        {"pilot", {"enabled", "grid", "pilot_M"}},
        {"output", {"path", "format"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile doc;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw config_error("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            if (!known_keys().count(section))
                throw config_error("line " + std::to_string(lineno) + ": unknown section '" +
                                   section + "'");
            doc.sections.emplace_back(section,
                                      std::vector<std::pair<std::string, std::string>>{});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw config_error("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!known_keys().at(section).count(key))
            throw config_error("line " + std::to_string(lineno) + ": unknown key '" + key +
                               "' in section [" + section + "]");
        doc.sections.back().second.emplace_back(key, value);
    }
    return doc;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return parse_text(body.str());
}

std::string ConfigFile::serialize() const {
    std::ostringstream out;
    for (const auto& [name, entries] : sections) {
        out << "[" << name << "]\n";
        for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
    }
    return out.str();
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    for (const auto& [name, entries] : sections) {
        if (name != section) continue;
        for (const auto& [k, v] : entries)
            if (k == key) return true;
    }
    return false;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    std::string out = fallback;
    for (const auto& [name, entries] : sections) {
        if (name != section) continue;
        for (const auto& [k, v] : entries)
            if (k == key) out = v; // last assignment wins
    }
    return out;
}

double ConfigFile::get_number(const std::string& section, const std::string& key,
                              double fallback) const {
    const std::string v = get(section, key, "");
    if (v.empty()) return fallback;
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw config_error("value of " + section + "." + key + " is not a number: '" + v + "'");
    }
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    if (!known_keys().count(section))
        throw config_error("unknown section '" + section + "'");
    if (!known_keys().at(section).count(key))
        throw config_error("unknown key '" + key + "' in section [" + section + "]");
    for (auto& [name, entries] : sections) {
        if (name != section) continue;
        for (auto& [k, v] : entries)
            if (k == key) {
                v = value;
                return;
            }
        entries.emplace_back(key, value);
        return;
    }
    sections.emplace_back(section,
                          std::vector<std::pair<std::string, std::string>>{{key, value}});
}

void apply_override(ConfigFile& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw config_error("override must look like section.key=value: '" + assignment + "'");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        throw config_error("override key must be section.key: '" + path + "'");
    doc.set(path.substr(0, dot), path.substr(dot + 1), value);
}

RunConfig build_run_config(const ConfigFile& doc) {
    RunConfig cfg;
    const std::string family = doc.get("model", "family", "sine_martingale");
    const double sigma_bar = doc.get_number("model", "sigma_bar", 0.1);
    const double omega = doc.get_number("model", "omega", sigma_bar);
    const double c0 = doc.get_number("model", "c0", 0.0);
    const double c1 = doc.get_number("model", "c1", 1.0);
    const double c3 = doc.get_number("model", "c3", 1.0);
    const double L = doc.get_number("model", "L", 0.0);
    const double x0 = doc.get_number("model", "x0", 1.0);
    const double T = doc.get_number("model", "T", 0.5);
    if (family == "constant")
        cfg.model = Model::constant(sigma_bar, L, T, x0);
    else if (family == "sine_martingale")
        cfg.model = Model::sine_martingale(sigma_bar, omega, c0, c1, c3, L, T, x0);
    else
        throw config_error("unknown model family '" + family + "'");

    const std::string testf = doc.get("model", "testf", "");
    if (testf.empty() || testf == "default")
        cfg.test_function = cfg.model.default_test_function();
    else if (testf == "lin")
        cfg.test_function = TestFunction::linear_above(L);
    else if (testf == "sq")
        cfg.test_function = TestFunction::quadratic_above(L);
    else if (testf == "martingale_h")
        cfg.test_function = TestFunction::shifted_cubic(c0, c1, c3, L);
    else
        throw config_error("unknown test function '" + testf + "'");

    cfg.quantity = quantity_from_string(doc.get("run", "quantity", "value"));
    const double m = doc.get_number("run", "M", 100000.0);
    if (!(m >= 1.0)) throw config_error("run.M must be at least 1");
    cfg.samples = static_cast<long long>(m);
    cfg.seed = static_cast<std::uint64_t>(doc.get_number("run", "seed", 1.0));
    cfg.workers = static_cast<int>(doc.get_number("run", "workers", 1.0));
    if (cfg.workers < 1) throw config_error("run.workers must be at least 1");
    cfg.z_point = doc.get_number("run", "z", std::numeric_limits<double>::quiet_NaN());

    try {
        cfg.sampler = JumpLaw::parse(doc.get("sampler", "spec", "exp:lambda=2"));
    } catch (const contract_violation& e) {
        throw config_error(e.what());
    }
    return cfg;
}

PilotSettings build_pilot_settings(const ConfigFile& doc) {
    PilotSettings p;
    const std::string enabled = doc.get("pilot", "enabled", "false");
    p.enabled = enabled == "true" || enabled == "1" || enabled == "yes";
    p.pilot_samples = static_cast<long long>(doc.get_number("pilot", "pilot_M", 20000.0));
    const std::string grid = doc.get("pilot", "grid", "");
    std::istringstream in(grid);
    std::string item;
    while (std::getline(in, item, '|')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        try {
            p.grid.push_back(JumpLaw::parse(t));
        } catch (const contract_violation& e) {
            throw config_error(e.what());
        }
    }
    return p;
}

OutputSettings build_output_settings(const ConfigFile& doc) {
    OutputSettings o;
    o.path = doc.get("output", "path", "");
    o.format = doc.get("output", "format", "csv");
    return o;
}

std::string csv_header() {
    return "quantity,sampler,params,M,seed,mean,variance,stderr,ci95,runtime_s";
}

std::string csv_row(const std::string& quantity, const EstimateReport& rep) {
    const auto colon = rep.sampler_spec.find(':');
    const std::string kind =
        colon == std::string::npos ? rep.sampler_spec : rep.sampler_spec.substr(0, colon);
    std::string params =
        colon == std::string::npos ? "" : rep.sampler_spec.substr(colon + 1);
    for (auto& ch : params)
        if (ch == ',') ch = ';';
    std::ostringstream os;
    os.precision(12);
    os << quantity << ',' << kind << ',' << params << ',' << rep.samples << ',' << rep.seed << ','
       << rep.mean << ',' << rep.sample_variance << ',' << rep.std_error << ','
       << rep.ci95_halfwidth << ',' << rep.runtime_seconds;
    return os.str();
}

} // namespace kmc
