#ifndef PCF_IO_HPP
#define PCF_IO_HPP

#include "pcf/diagnostics.hpp"
#include "pcf/gk.hpp"

#include <map>
#include <string>
#include <vector>

namespace pcf {

// Binary snapshot: magic "PCF1", u32 version, metadata, lattice descriptor,
// then named fields as little-endian f64 (re, im) pairs in row-major grid
// order, component-major.  A sidecar <path>.hdr text file lists field names
// and shapes.  Writes are atomic (temp file + rename).
struct SnapshotData {
    uint32_t kind = 0; // 0 = pcf, 1 = gk
    double t = 0.0;
    uint32_t formulation = 1; // Formulation enum value for pcf snapshots
    bool normalized = false;
    bool dealias = true;
    int k_plus = 1;
    double bg_scale = 1.0;
    ComplexLattice lattice;
    std::vector<std::pair<std::string, Field>> fields;

    const Field* find(const std::string& name) const;
};

void write_text_atomic(const std::string& path, const std::string& content);

void write_snapshot(const std::string& path, const FlowState& s, double bg_scale);
void write_gk_snapshot(const std::string& path, const GKState& s, double bg_scale);
SnapshotData read_snapshot(const std::string& path);

FlowState flow_state_from_snapshot(const SnapshotData& snap);
GKState gk_state_from_snapshot(const SnapshotData& snap);

std::string series_csv(const std::vector<DiagnosticsRecord>& series,
                       const std::vector<std::string>& columns);

// snapshot dump as CSV text (per-point rows) for the export subcommand
std::string snapshot_csv(const SnapshotData& snap);

} // namespace pcf

#endif
