#include "uhmc/config.hpp"

#include <fstream>
#include <sstream>

namespace uhmc {

const std::vector<SchemaEntry>& config_schema() {
    static const std::vector<SchemaEntry> schema = {
        {"experiment", "string", "", "optional label; must match the subcommand when present"},
        {"model", "string", "gaussian", "target: gaussian | double_well | mean_field"},
        {"dim", "int", "1", "dimension d (gaussian, double_well)"},
        {"omega2", "double", "1.0", "curvature of the gaussian target"},
        {"a", "double", "0.5", "cosine perturbation strength of double_well, |a| < 1"},
        {"n", "int", "2", "mean-field particle count"},
        {"k", "int", "1", "mean-field particle dimension"},
        {"eps", "double", "0.0", "mean-field interaction strength"},
        {"v_model", "string", "gaussian", "mean-field confinement: gaussian | double_well"},
        {"v_omega2", "double", "1.0", "curvature of V"},
        {"v_a", "double", "0.5", "cosine perturbation of V when v_model=double_well"},
        {"w_omega2", "double", "1.0", "curvature of the (even, quadratic) interaction W"},
        {"T", "double", "0.35", "duration of the Hamiltonian leg"},
        {"N", "int", "8", "integrator steps per transition; h = T/N"},
        {"steps", "int", "100", "chain transitions per replica"},
        {"replicas", "int", "100", "independent replicas"},
        {"seed", "u64", "1", "root seed of the counter-based streams"},
        {"threads", "int", "1", "worker threads; sharding is by replica id"},
        {"out", "string", "out", "output directory"},
        {"x0_norm", "double", "2.0", "initial point (x0_norm, 0, ..., 0); negative = stationary draw (mixing-time)"},
        {"y0_norm", "double", "0.0", "second chain start for couple"},
        {"threshold", "double", "0.0", "one-shot switch distance; 0 = derived default"},
        {"max_steps", "int", "100000", "coupling step cap"},
        {"max_oneshot", "int", "5", "consecutive one-shot attempts before reverting"},
        {"eps_mix", "double", "0.05", "accuracy for mixing-time experiments"},
        {"d_list", "int_list", "1,4,16,64", "dimensions for scans"},
        {"N_list", "int_list", "8,16,32,64", "step counts for the bias scan"},
        {"draws", "int", "10000", "randomized draws per validation check"},
        {"burn_in", "int", "50", "discarded transitions in sampling summaries"},
        {"m2", "double", "-1", "second target moment; negative = analytic/estimated"},
        {"m4", "double", "-1", "fourth target moment; negative = analytic/estimated"},
        {"M2", "double", "0.0", "Wasserstein bias constant of the step-size assumption"},
        {"w1_init", "double", "1.0", "initial Wasserstein distance for bound evaluation"},
        {"K", "double", "-1", "strong-convexity constant override; negative = from model"},
        {"R", "double", "-1", "non-convexity radius override; negative = from model"},
    };
    return schema;
}

std::string config_schema_text() {
    std::ostringstream os;
    os << "# configuration schema: key = value per line, '#' comments\n";
    for (const auto& e : config_schema()) {
        os << e.key << " (" << e.type << ")";
        if (e.fallback[0] != '\0') os << " [default " << e.fallback << "]";
        os << " : " << e.description << "\n";
    }
    return os.str();
}

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

const SchemaEntry& Config::entry(const std::string& key) const {
    for (const auto& e : config_schema())
        if (key == e.key) return e;
    throw config_error("unknown config key: " + key);
}

void Config::set(const std::string& key, const std::string& value) {
    entry(key);  // rejects unknown keys
    values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::raw(const std::string& key) const {
    const SchemaEntry& e = entry(key);
    const auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    if (e.fallback[0] != '\0' || std::string(e.type) == "string") return e.fallback;
    throw config_error("missing required config key: " + key);
}

long Config::get_int(const std::string& key) const {
    try {
        return std::stol(raw(key));
    } catch (const std::exception&) {
        throw config_error("config key " + key + ": not an integer");
    }
}

std::uint64_t Config::get_u64(const std::string& key) const {
    try {
        return std::stoull(raw(key));
    } catch (const std::exception&) {
        throw config_error("config key " + key + ": not a u64");
    }
}

double Config::get_double(const std::string& key) const {
    try {
        return std::stod(raw(key));
    } catch (const std::exception&) {
        throw config_error("config key " + key + ": not a number");
    }
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::vector<long> Config::get_int_list(const std::string& key) const {
    std::vector<long> out;
    std::istringstream in(raw(key));
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stol(tok));
        } catch (const std::exception&) {
            throw config_error("config key " + key + ": bad integer list");
        }
    }
    if (out.empty()) throw config_error("config key " + key + ": empty list");
    return out;
}

}  // namespace uhmc
