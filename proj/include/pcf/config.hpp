#ifndef PCF_CONFIG_HPP
#define PCF_CONFIG_HPP

#include "pcf/flow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcf {

enum class RunMode { PcfMetric, PcfOneform, PcfSplit, Gk };

// Sectioned key=value run configuration.  Unknown sections/keys, duplicates
// and constraint violations are hard errors; all problems are reported at
// once.
struct RunConfig {
    // [lattice]
    int n = 2;
    std::vector<int> sizes;      // broadcast from one value or 2n entries
    std::vector<double> periods; // idem; "pi" and "2pi" accepted

    // [flow]
    RunMode mode = RunMode::PcfOneform;
    Integrator integrator = Integrator::RK4;
    double cfl_safety = 0.1;
    double fixed_dt = 0.0; // 0 => CFL-adaptive
    double t_end = 1.0;
    bool normalized = false;
    bool dealias = true;

    // [initial]
    uint64_t seed = 20240817ULL;
    double amplitude = 0.2;
    int max_mode = 2;
    std::string snapshot_path;

    // [gk]
    int k_plus = 1;

    // [sampling]
    int sample_every = 10;
    std::vector<double> snapshot_times;

    // [diagnostics]
    int fk_max = 1;
    bool record_triples = true;
    int max_triples = 6;

    // [output]
    std::string output_dir;

    ComplexLattice make_lattice() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string render_config(const RunConfig& cfg); // effective config echo

const char* mode_name(RunMode m);

} // namespace pcf

#endif
