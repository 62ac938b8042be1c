#include "pcf/config.hpp"
#include "pcf/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pcf {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Entry {
    std::string value;
    int line;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

double parse_length(const std::string& v, bool& ok) {
    ok = true;
    if (v == "pi") return M_PI;
    if (v == "2pi") return 2.0 * M_PI;
    if (v == "pi/2") return 0.5 * M_PI;
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) ok = false;
        return d;
    } catch (...) {
        ok = false;
        return 0.0;
    }
}

std::vector<std::string> split_ws(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream iss(v);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

} // namespace

ComplexLattice RunConfig::make_lattice() const {
    return ComplexLattice::make(n, sizes, periods);
}

const char* mode_name(RunMode m) {
    switch (m) {
    case RunMode::PcfMetric: return "pcf-metric";
    case RunMode::PcfOneform: return "pcf-oneform";
    case RunMode::PcfSplit: return "pcf-split";
    case RunMode::Gk: return "gk";
    }
    return "?";
}

RunConfig parse_config(const std::string& text) {
    Sections sec;
    std::vector<std::string> errors;
    std::string cur_section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    static const std::map<std::string, std::set<std::string>> schema = {
        {"lattice", {"n", "sizes", "periods"}},
        {"flow", {"mode", "integrator", "cfl_safety", "fixed_dt", "t_end", "normalized", "dealias"}},
        {"initial", {"seed", "amplitude", "max_mode", "snapshot"}},
        {"gk", {"k_plus"}},
        {"sampling", {"sample_every", "snapshot_times"}},
        {"diagnostics", {"fk_max", "record_triples", "max_triples"}},
        {"output", {"dir"}},
    };
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            cur_section = trim(line.substr(1, line.size() - 2));
            if (!schema.count(cur_section))
                errors.push_back("line " + std::to_string(lineno) + ": unknown section [" +
                                 cur_section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (cur_section.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": key outside any section");
            continue;
        }
        auto it = schema.find(cur_section);
        if (it != schema.end() && !it->second.count(key)) {
            errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key +
                             "' in [" + cur_section + "]");
            continue;
        }
        auto [slot, inserted] = sec[cur_section].emplace(key, Entry{value, lineno});
        if (!inserted)
            errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key +
                             "' (first at line " + std::to_string(slot->second.line) + ")");
    }

    RunConfig cfg;
    auto get = [&](const std::string& s, const std::string& k) -> const Entry* {
        auto si = sec.find(s);
        if (si == sec.end()) return nullptr;
        auto ki = si->second.find(k);
        return ki == si->second.end() ? nullptr : &ki->second;
    };
    auto get_double = [&](const std::string& s, const std::string& k, double& out) {
        if (const Entry* e = get(s, k)) {
            try {
                out = std::stod(e->value);
            } catch (...) {
                errors.push_back("line " + std::to_string(e->line) + ": bad number for " + k);
            }
        }
    };
    auto get_int = [&](const std::string& s, const std::string& k, int& out) {
        if (const Entry* e = get(s, k)) {
            try {
                out = std::stoi(e->value);
            } catch (...) {
                errors.push_back("line " + std::to_string(e->line) + ": bad integer for " + k);
            }
        }
    };
    auto get_bool = [&](const std::string& s, const std::string& k, bool& out) {
        if (const Entry* e = get(s, k)) {
            if (e->value == "true" || e->value == "1")
                out = true;
            else if (e->value == "false" || e->value == "0")
                out = false;
            else
                errors.push_back("line " + std::to_string(e->line) + ": bad boolean for " + k);
        }
    };

    get_int("lattice", "n", cfg.n);
    if (cfg.n < 1 || cfg.n > 3) errors.push_back("lattice.n must be 1, 2 or 3");

    // sizes: one value broadcast or 2n entries
    {
        std::vector<int> sizes;
        if (const Entry* e = get("lattice", "sizes")) {
            for (const auto& tok : split_ws(e->value)) {
                try {
                    sizes.push_back(std::stoi(tok));
                } catch (...) {
                    errors.push_back("line " + std::to_string(e->line) + ": bad size '" + tok + "'");
                }
            }
        }
        if (sizes.empty()) sizes = {16};
        if (sizes.size() == 1) sizes.assign(static_cast<size_t>(2 * cfg.n), sizes[0]);
        if (static_cast<int>(sizes.size()) != 2 * cfg.n)
            errors.push_back("lattice.sizes must have 1 or 2n entries");
        for (int s : sizes) {
            if (s % 2 != 0) errors.push_back("lattice.sizes must be even, got " + std::to_string(s));
            if (s < 8) errors.push_back("lattice.sizes must be >= 8, got " + std::to_string(s));
        }
        cfg.sizes = std::move(sizes);
    }
    {
        std::vector<double> periods;
        if (const Entry* e = get("lattice", "periods")) {
            for (const auto& tok : split_ws(e->value)) {
                bool ok = true;
                const double d = parse_length(tok, ok);
                if (!ok)
                    errors.push_back("line " + std::to_string(e->line) + ": bad period '" + tok +
                                     "'");
                periods.push_back(d);
            }
        }
        if (periods.empty()) periods = {2.0 * M_PI};
        if (periods.size() == 1) periods.assign(static_cast<size_t>(2 * cfg.n), periods[0]);
        if (static_cast<int>(periods.size()) != 2 * cfg.n)
            errors.push_back("lattice.periods must have 1 or 2n entries");
        for (double L : periods)
            if (!(L > 0.0)) errors.push_back("lattice.periods must be positive");
        cfg.periods = std::move(periods);
    }

    if (const Entry* e = get("flow", "mode")) {
        if (e->value == "pcf-metric")
            cfg.mode = RunMode::PcfMetric;
        else if (e->value == "pcf-oneform")
            cfg.mode = RunMode::PcfOneform;
        else if (e->value == "pcf-split")
            cfg.mode = RunMode::PcfSplit;
        else if (e->value == "gk")
            cfg.mode = RunMode::Gk;
        else
            errors.push_back("line " + std::to_string(e->line) + ": unknown mode '" + e->value +
                             "'");
    }
    if (const Entry* e = get("flow", "integrator")) {
        if (e->value == "rk4")
            cfg.integrator = Integrator::RK4;
        else if (e->value == "euler")
            cfg.integrator = Integrator::Euler;
        else
            errors.push_back("line " + std::to_string(e->line) + ": unknown integrator");
    }
    get_double("flow", "cfl_safety", cfg.cfl_safety);
    get_double("flow", "fixed_dt", cfg.fixed_dt);
    get_double("flow", "t_end", cfg.t_end);
    get_bool("flow", "normalized", cfg.normalized);
    get_bool("flow", "dealias", cfg.dealias);
    if (!(cfg.cfl_safety > 0.0)) errors.push_back("flow.cfl_safety must be positive");
    if (cfg.fixed_dt < 0.0) errors.push_back("flow.fixed_dt must be >= 0");
    if (cfg.t_end < 0.0) errors.push_back("flow.t_end must be >= 0");
    if (cfg.normalized && cfg.mode != RunMode::PcfMetric)
        errors.push_back("flow.normalized requires mode = pcf-metric");

    if (const Entry* e = get("initial", "seed")) {
        try {
            cfg.seed = std::stoull(e->value);
        } catch (...) {
            errors.push_back("line " + std::to_string(e->line) + ": bad seed");
        }
    }
    get_double("initial", "amplitude", cfg.amplitude);
    get_int("initial", "max_mode", cfg.max_mode);
    if (const Entry* e = get("initial", "snapshot")) cfg.snapshot_path = e->value;
    if (cfg.amplitude < 0.0) errors.push_back("initial.amplitude must be >= 0");
    if (cfg.max_mode < 1) errors.push_back("initial.max_mode must be >= 1");

    get_int("gk", "k_plus", cfg.k_plus);
    if (cfg.mode == RunMode::Gk && (cfg.k_plus < 1 || cfg.k_plus >= cfg.n))
        errors.push_back("gk.k_plus must satisfy 1 <= k_plus < n");

    get_int("sampling", "sample_every", cfg.sample_every);
    if (cfg.sample_every < 1) errors.push_back("sampling.sample_every must be >= 1");
    if (const Entry* e = get("sampling", "snapshot_times")) {
        for (const auto& tok : split_ws(e->value)) {
            try {
                cfg.snapshot_times.push_back(std::stod(tok));
            } catch (...) {
                errors.push_back("line " + std::to_string(e->line) + ": bad snapshot time '" +
                                 tok + "'");
            }
        }
    }

    get_int("diagnostics", "fk_max", cfg.fk_max);
    get_bool("diagnostics", "record_triples", cfg.record_triples);
    get_int("diagnostics", "max_triples", cfg.max_triples);
    if (cfg.fk_max < 0 || cfg.fk_max > 2) errors.push_back("diagnostics.fk_max must be 0, 1 or 2");
    if (cfg.max_triples < 1) errors.push_back("diagnostics.max_triples must be >= 1");

    if (const Entry* e = get("output", "dir")) cfg.output_dir = e->value;

    if (!errors.empty()) {
        std::string msg = "config errors:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream o;
    o.precision(17);
    o << "[lattice]\nn = " << cfg.n << "\nsizes =";
    for (int s : cfg.sizes) o << " " << s;
    o << "\nperiods =";
    for (double L : cfg.periods) o << " " << L;
    o << "\n\n[flow]\nmode = " << mode_name(cfg.mode)
      << "\nintegrator = " << (cfg.integrator == Integrator::RK4 ? "rk4" : "euler")
      << "\ncfl_safety = " << cfg.cfl_safety << "\nfixed_dt = " << cfg.fixed_dt
      << "\nt_end = " << cfg.t_end << "\nnormalized = " << (cfg.normalized ? "true" : "false")
      << "\ndealias = " << (cfg.dealias ? "true" : "false") << "\n\n[initial]\nseed = "
      << cfg.seed << "\namplitude = " << cfg.amplitude << "\nmax_mode = " << cfg.max_mode
      << "\nsnapshot = " << cfg.snapshot_path << "\n\n[gk]\nk_plus = " << cfg.k_plus
      << "\n\n[sampling]\nsample_every = " << cfg.sample_every << "\nsnapshot_times =";
    for (double t : cfg.snapshot_times) o << " " << t;
    o << "\n\n[diagnostics]\nfk_max = " << cfg.fk_max
      << "\nrecord_triples = " << (cfg.record_triples ? "true" : "false")
      << "\nmax_triples = " << cfg.max_triples << "\n\n[output]\ndir = " << cfg.output_dir
      << "\n";
    return o.str();
}

} // namespace pcf
