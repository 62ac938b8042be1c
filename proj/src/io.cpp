#include "pcf/io.hpp"
#include "pcf/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pcf {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'F', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& o, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    o.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("snapshot truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& o, double v) {
    static_assert(sizeof(double) == 8);
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    o.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoError("snapshot truncated");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_string(std::ostream& o, const std::string& s) {
    put_u32(o, static_cast<uint32_t>(s.size()));
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IoError("snapshot truncated");
    return s;
}

void write_binary_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) throw IoError("cannot open " + tmp);
        o.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!o) throw IoError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string snapshot_bytes(uint32_t kind, double t, uint32_t formulation, bool normalized,
                           bool dealias, int k_plus, double bg_scale, const ComplexLattice& lat,
                           const std::vector<std::pair<std::string, const Field*>>& fields) {
    std::ostringstream o(std::ios::binary);
    o.write(kMagic, 4);
    put_u32(o, kVersion);
    put_u32(o, kind);
    put_f64(o, t);
    put_u32(o, formulation);
    put_u32(o, normalized ? 1 : 0);
    put_u32(o, dealias ? 1 : 0);
    put_u32(o, static_cast<uint32_t>(k_plus));
    put_f64(o, bg_scale);
    put_u32(o, static_cast<uint32_t>(lat.n));
    for (int a = 0; a < lat.axes(); ++a) put_u32(o, static_cast<uint32_t>(lat.sizes[a]));
    for (int a = 0; a < lat.axes(); ++a) put_f64(o, lat.periods[a]);
    put_u32(o, static_cast<uint32_t>(fields.size()));
    for (const auto& [name, f] : fields) {
        put_string(o, name);
        put_u32(o, static_cast<uint32_t>(f->ncomp));
        for (int c = 0; c < f->ncomp; ++c) {
            const cplx* d = f->comp(c);
            for (std::ptrdiff_t p = 0; p < lat.points; ++p) {
                put_f64(o, d[p].real());
                put_f64(o, d[p].imag());
            }
        }
    }
    return o.str();
}

std::string sidecar_text(uint32_t kind, double t, const ComplexLattice& lat,
                         const std::vector<std::pair<std::string, const Field*>>& fields) {
    std::ostringstream h;
    h.precision(17);
    h << "pcfflow snapshot v" << kVersion << "\nkind = " << (kind == 0 ? "pcf" : "gk")
      << "\nt = " << t << "\nn = " << lat.n << "\nsizes =";
    for (int a = 0; a < lat.axes(); ++a) h << " " << lat.sizes[a];
    h << "\nperiods =";
    for (int a = 0; a < lat.axes(); ++a) h << " " << lat.periods[a];
    h << "\nlayout = component-major, row-major grid order, little-endian f64 (re, im)\n";
    for (const auto& [name, f] : fields)
        h << "field " << name << " ncomp " << f->ncomp << "\n";
    return h.str();
}

} // namespace

const Field* SnapshotData::find(const std::string& name) const {
    for (const auto& [n, f] : fields)
        if (n == name) return &f;
    return nullptr;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    write_binary_atomic(path, content);
}

void write_snapshot(const std::string& path, const FlowState& s, double bg_scale) {
    std::vector<std::pair<std::string, const Field*>> fields;
    fields.emplace_back("g", &s.g.mat);
    if (s.formulation != Formulation::Metric) fields.emplace_back("alpha", &s.alpha);
    if (s.formulation == Formulation::Split) {
        fields.emplace_back("beta", &s.beta_split);
        fields.emplace_back("f", &s.f_split);
    }
    const uint32_t form = static_cast<uint32_t>(s.formulation);
    write_binary_atomic(path, snapshot_bytes(0, s.t, form, s.normalized, s.dealias, 1, bg_scale,
                                             *s.g.lat, fields));
    write_text_atomic(path + ".hdr", sidecar_text(0, s.t, *s.g.lat, fields));
}

void write_gk_snapshot(const std::string& path, const GKState& s, double bg_scale) {
    std::vector<std::pair<std::string, const Field*>> fields;
    fields.emplace_back("u", &s.u);
    fields.emplace_back("g", &s.g.mat);
    write_binary_atomic(path, snapshot_bytes(1, s.t, 0, false, s.dealias,
                                             s.bg->split.k_plus, bg_scale, *s.u.lat, fields));
    write_text_atomic(path + ".hdr", sidecar_text(1, s.t, *s.u.lat, fields));
}

SnapshotData read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad snapshot magic in " + path);
    const uint32_t version = get_u32(in);
    if (version != kVersion)
        throw IoError("snapshot version mismatch: " + std::to_string(version));
    SnapshotData snap;
    snap.kind = get_u32(in);
    snap.t = get_f64(in);
    snap.formulation = get_u32(in);
    snap.normalized = get_u32(in) != 0;
    snap.dealias = get_u32(in) != 0;
    snap.k_plus = static_cast<int>(get_u32(in));
    snap.bg_scale = get_f64(in);
    const int n = static_cast<int>(get_u32(in));
    std::vector<int> sizes(static_cast<size_t>(2 * n));
    for (int a = 0; a < 2 * n; ++a) sizes[a] = static_cast<int>(get_u32(in));
    std::vector<double> periods(static_cast<size_t>(2 * n));
    for (int a = 0; a < 2 * n; ++a) periods[a] = get_f64(in);
    snap.lattice = ComplexLattice::make(n, sizes, periods);
    const uint32_t nf = get_u32(in);
    for (uint32_t i = 0; i < nf; ++i) {
        const std::string name = get_string(in);
        const int ncomp = static_cast<int>(get_u32(in));
        Field f(snap.lattice, ncomp, name);
        for (int c = 0; c < ncomp; ++c) {
            cplx* d = f.comp(c);
            for (std::ptrdiff_t p = 0; p < snap.lattice.points; ++p) {
                const double re = get_f64(in);
                const double im = get_f64(in);
                d[p] = cplx{re, im};
            }
        }
        snap.fields.emplace_back(name, std::move(f));
    }
    return snap;
}

// snapshot lattices are owned by the shared background so field pointers stay valid
FlowState flow_state_from_snapshot(const SnapshotData& snap) {
    if (snap.kind != 0) throw IoError("snapshot holds a gk state, not a flow state");
    auto bg = std::make_shared<FlowBackground>(
        make_torus_background(snap.lattice, snap.bg_scale));
    const ComplexLattice& lat = *bg->lattice;
    const auto form = static_cast<Formulation>(snap.formulation);
    FlowState s;
    if (form == Formulation::Metric) {
        const Field* gf = snap.find("g");
        if (!gf) throw IoError("snapshot missing field g");
        MatrixField m(lat, "g_{i jbar}");
        m.data = gf->data;
        s = make_metric_state(bg, make_metric(std::move(m)), snap.normalized, snap.dealias);
    } else if (form == Formulation::OneForm) {
        const Field* af = snap.find("alpha");
        if (!af) throw IoError("snapshot missing field alpha");
        VectorField a(lat, "alpha");
        a.data = af->data;
        s = make_oneform_state(bg, std::move(a), snap.normalized, snap.dealias);
    } else {
        const Field* bf = snap.find("beta");
        const Field* ff = snap.find("f");
        if (!bf || !ff) throw IoError("snapshot missing split fields");
        VectorField b(lat, "beta");
        b.data = bf->data;
        ScalarField f0(lat, 1, "f");
        f0.data = ff->data;
        s = make_split_state(bg, std::move(b), std::move(f0), snap.normalized, snap.dealias);
    }
    s.t = snap.t;
    return s;
}

GKState gk_state_from_snapshot(const SnapshotData& snap) {
    if (snap.kind != 1) throw IoError("snapshot holds a flow state, not a gk state");
    auto bg = std::make_shared<GKBackground>(
        make_gk_background(snap.lattice, snap.k_plus, snap.bg_scale));
    const Field* uf = snap.find("u");
    if (!uf) throw IoError("snapshot missing field u");
    ScalarField u(*bg->g0.lat, 1, "u");
    u.data = uf->data;
    GKState s = make_gk_state(bg, std::move(u), snap.dealias);
    s.t = snap.t;
    return s;
}

std::string series_csv(const std::vector<DiagnosticsRecord>& series,
                       const std::vector<std::string>& columns) {
    std::ostringstream o;
    for (size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
    o << "\n";
    char buf[64];
    for (const auto& r : series) {
        for (size_t i = 0; i < r.v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", r.v[i]);
            o << (i ? "," : "") << buf;
        }
        o << "\n";
    }
    return o.str();
}

std::string snapshot_csv(const SnapshotData& snap) {
    std::ostringstream o;
    o << "point";
    for (const auto& [name, f] : snap.fields)
        for (int c = 0; c < f.ncomp; ++c)
            o << "," << name << "_" << c << "_re," << name << "_" << c << "_im";
    o << "\n";
    char buf[64];
    for (std::ptrdiff_t p = 0; p < snap.lattice.points; ++p) {
        o << p;
        for (const auto& [name, f] : snap.fields)
            for (int c = 0; c < f.ncomp; ++c) {
                const cplx v = f.at(c, p);
                std::snprintf(buf, sizeof buf, "%.17g", v.real());
                o << "," << buf;
                std::snprintf(buf, sizeof buf, "%.17g", v.imag());
                o << "," << buf;
            }
        o << "\n";
    }
    return o.str();
}

} // namespace pcf
