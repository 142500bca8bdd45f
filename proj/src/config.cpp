#include "leafdiff/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "leafdiff/errors.hpp"
#include "leafdiff/parallel.hpp"
#include "leafdiff/rng.hpp"

namespace leafdiff {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    if (v == "-inf") return -HUGE_VAL;
    try {
        size_t pos;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw PreconditionError("config: bad number for " + key + ": " + v);
    }
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        size_t pos;
        long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (...) {
        throw PreconditionError("config: bad integer for " + key + ": " + v);
    }
}

} // namespace

void ExperimentConfig::apply_line(const std::string& key, const std::string& value) {
    if (key == "metric.kind") {
        if (value != "constant" && value != "perturbed")
            throw PreconditionError("config: metric.kind must be constant or perturbed");
        metric_kind = value;
    } else if (key == "metric.amplitude") {
        amplitude = parse_double(value, key);
    } else if (key == "metric.width") {
        width = parse_double(value, key);
    } else if (key == "metric.cutoff") {
        cutoff = static_cast<int>(parse_long(value, key));
    } else if (key == "flow.rho") {
        rho = parse_double(value, key);
        rho_set = true;
    } else if (key == "flow.epsilon") {
        epsilon = parse_double(value, key);
        epsilon_set = true;
    } else if (key == "flow.step_factor") {
        step_factor = parse_double(value, key);
    } else if (key == "run.n_traj") {
        n_traj = static_cast<int>(parse_long(value, key));
    } else if (key == "run.n_steps") {
        n_steps = parse_long(value, key);
    } else if (key == "run.burn_in") {
        burn_in = parse_double(value, key);
    } else if (key == "run.sample_every") {
        sample_every = static_cast<int>(parse_long(value, key));
    } else if (key == "run.grid_nx") {
        grid_nx = static_cast<int>(parse_long(value, key));
    } else if (key == "run.grid_ny") {
        grid_ny = static_cast<int>(parse_long(value, key));
    } else if (key == "run.grid_nv") {
        grid_nv = static_cast<int>(parse_long(value, key));
    } else if (key == "entropy.eta") {
        eta = parse_double(value, key);
    } else if (key == "entropy.n") {
        bowen_n = static_cast<int>(parse_long(value, key));
    } else if (key == "entropy.k_probes") {
        k_probes = parse_long(value, key);
    } else if (key == "entropy.n_centers") {
        n_centers = static_cast<int>(parse_long(value, key));
    } else if (key == "seed") {
        seed = static_cast<uint64_t>(parse_long(value, key));
    } else if (key == "workers") {
        workers = value == "auto" ? 0 : static_cast<int>(parse_long(value, key));
    } else {
        throw PreconditionError("config: unknown key " + key);
    }
}

void ExperimentConfig::validate() const {
    if (rho_set && epsilon_set)
        throw PreconditionError("config: give exactly one of flow.rho / flow.epsilon");
    if (epsilon_set && epsilon < 0)
        throw PreconditionError("config: flow.epsilon must be >= 0");
    if (n_traj <= 0 || n_steps <= 0 || sample_every <= 0 || k_probes <= 0 || n_centers <= 0)
        throw PreconditionError("config: counts must be positive");
    if (grid_nx < 2 || grid_ny < 2 || grid_nv < 2)
        throw PreconditionError("config: grid dims must be >= 2");
    if (step_factor <= 0 || step_factor > 1)
        throw PreconditionError("config: flow.step_factor must be in (0, 1]");
    if (metric_kind == "perturbed" && (width <= 0 || cutoff < 1))
        throw PreconditionError("config: perturbed metric needs width > 0, cutoff >= 1");
}

double ExperimentConfig::effective_rho() const {
    if (epsilon_set) return epsilon == 0 ? -HUGE_VAL : -1.0 / (epsilon * epsilon);
    return rho;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    char buf[64];
    auto put_d = [&](const char* k, double v) {
        if (v == -HUGE_VAL) {
            os << k << " = -inf\n";
            return;
        }
        // shortest representation that round-trips
        std::snprintf(buf, sizeof buf, "%.15g", v);
        if (std::stod(buf) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
        os << k << " = " << buf << "\n";
    };
    os << "metric.kind = " << metric_kind << "\n";
    put_d("metric.amplitude", amplitude);
    put_d("metric.width", width);
    os << "metric.cutoff = " << cutoff << "\n";
    if (epsilon_set)
        put_d("flow.epsilon", epsilon);
    else
        put_d("flow.rho", rho);
    put_d("flow.step_factor", step_factor);
    os << "run.n_traj = " << n_traj << "\n";
    os << "run.n_steps = " << n_steps << "\n";
    put_d("run.burn_in", burn_in);
    os << "run.sample_every = " << sample_every << "\n";
    os << "run.grid_nx = " << grid_nx << "\n";
    os << "run.grid_ny = " << grid_ny << "\n";
    os << "run.grid_nv = " << grid_nv << "\n";
    put_d("entropy.eta", eta);
    os << "entropy.n = " << bowen_n << "\n";
    os << "entropy.k_probes = " << k_probes << "\n";
    os << "entropy.n_centers = " << n_centers << "\n";
    os << "seed = " << seed << "\n";
    os << "workers = " << (workers == 0 ? std::string("auto") : std::to_string(workers)) << "\n";
    return os.str();
}

uint64_t ExperimentConfig::hash() const {
    // workers is execution infrastructure: outputs are identical for any
    // worker count, so it must not enter the hash (or the file names)
    std::string s = canonical();
    size_t w = s.find("workers = ");
    if (w != std::string::npos) s.resize(w);
    uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(hash() & 0xffffffffu));
    return buf;
}

MetricConfig ExperimentConfig::metric_config() const {
    MetricConfig mc;
    mc.kind = metric_kind == "perturbed" ? MetricKind::perturbed : MetricKind::constant;
    mc.amplitude = amplitude;
    mc.width = width;
    mc.cutoff = cutoff;
    return mc;
}

RunConfig ExperimentConfig::run_config() const {
    RunConfig rc;
    rc.n_traj = n_traj;
    rc.n_steps = n_steps;
    rc.burn_in = burn_in;
    rc.sample_every = sample_every;
    rc.grid = grid();
    rc.master_seed = seed;
    rc.workers = resolve_workers(workers);
    return rc;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw PreconditionError("config: expected key = value, got: " + t);
        cfg.apply_line(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace leafdiff
