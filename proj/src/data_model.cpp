#include "windri/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace windri {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
}

bool parse_double(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end;
}

[[noreturn]] void row_error(std::size_t row, const std::string& column, const std::string& what) {
    throw std::runtime_error("load_csv: row " + std::to_string(row) + ": column '" + column +
                             "': " + what);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::map<std::string, std::size_t> col;
    {
        const std::vector<std::string> names = split_line(line);
        for (std::size_t i = 0; i < names.size(); ++i) col[trim(names[i])] = i;
    }
    for (const char* required : {"h", "u", "v", "w"})
        if (!col.count(required))
            throw std::runtime_error("load_csv: missing required column '" + std::string(required) + "'");

    const auto cell_at = [&](const std::vector<std::string>& cells, const char* name) -> std::string {
        const auto it = col.find(name);
        if (it == col.end() || it->second >= cells.size()) return {};
        return cells[it->second];
    };

    Dataset ds;
    ds.provenance.push_back(path.string());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);

        WindObservation obs;
        obs.station_id = trim(cell_at(cells, "station_id"));
        if (col.count("timestamp")) {
            const std::string c = cell_at(cells, "timestamp");
            if (!parse_double(c, obs.timestamp)) row_error(row, "timestamp", "invalid value '" + trim(c) + "'");
        }
        const std::array<std::pair<const char*, double*>, 4> required = {
            std::pair{"h", &obs.h}, std::pair{"u", &obs.u}, std::pair{"v", &obs.v}, std::pair{"w", &obs.w}};
        for (const auto& [name, dst] : required) {
            const std::string c = cell_at(cells, name);
            if (!parse_double(c, *dst)) row_error(row, name, "invalid value '" + trim(c) + "'");
            if (!std::isfinite(*dst)) row_error(row, name, "non-finite value");
        }
        if (obs.h < 0.0) row_error(row, "h", "elevation must be non-negative");
        if (col.count("ri")) {
            const std::string c = trim(cell_at(cells, "ri"));
            if (!c.empty()) {
                double ri = 0.0;
                if (!parse_double(c, ri)) row_error(row, "ri", "invalid value '" + c + "'");
                if (!std::isfinite(ri)) row_error(row, "ri", "non-finite value");
                obs.ri = ri;
            }
        }
        ds.records.push_back(std::move(obs));
    }
    if (ds.records.empty()) throw std::runtime_error("load_csv: '" + path.string() + "': empty data section");
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open '" + path.string() + "' for writing");
    out << "station_id,timestamp,h,u,v,w,ri\n";
    for (const WindObservation& r : ds.records) {
        out << r.station_id << ',' << format_double(r.timestamp) << ',' << format_double(r.h) << ','
            << format_double(r.u) << ',' << format_double(r.v) << ',' << format_double(r.w) << ',';
        if (r.ri) out << format_double(*r.ri);
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_csv: write to '" + path.string() + "' failed");
}

namespace {

struct Candidate {
    double t = 0.0;
    double dh = 0.0;
    double ri = 0.0;
    bool set = false;
};

void consider(Candidate& best, double t, double dh, double ri, bool prefer_later) {
    if (!best.set) {
        best = {t, dh, ri, true};
        return;
    }
    // Time first, then height proximity.
    const bool better_time = prefer_later ? t > best.t : t < best.t;
    const bool same_time = t == best.t;
    if (better_time || (same_time && dh < best.dh)) best = {t, dh, ri, true};
}

}  // namespace

Dataset merge_interpolate(const Dataset& primary, const Dataset& secondary, MergeTolerance tol) {
    if (primary.records.empty() || secondary.records.empty())
        throw std::invalid_argument("merge_interpolate: both datasets must be non-empty");
    if (tol.time_s <= 0.0 || tol.height_m <= 0.0)
        throw std::invalid_argument("merge_interpolate: tolerances must be positive");

    Dataset out = primary;
    for (const std::string& p : secondary.provenance) out.provenance.push_back(p);

    for (WindObservation& rec : out.records) {
        if (rec.ri) continue;
        Candidate below, above;
        for (const WindObservation& s : secondary.records) {
            if (!s.ri || s.station_id != rec.station_id) continue;
            const double dt = s.timestamp - rec.timestamp;
            const double dh = std::fabs(s.h - rec.h);
            if (std::fabs(dt) > tol.time_s || dh > tol.height_m) continue;
            if (dt <= 0.0) consider(below, s.timestamp, dh, *s.ri, /*prefer_later=*/true);
            if (dt >= 0.0) consider(above, s.timestamp, dh, *s.ri, /*prefer_later=*/false);
        }
        if (!below.set || !above.set) continue;
        if (above.t == below.t) {
            rec.ri = below.ri;
        } else {
            const double f = (rec.timestamp - below.t) / (above.t - below.t);
            rec.ri = below.ri + f * (above.ri - below.ri);
        }
    }
    return out;
}

SparseTensor4 build_sparse_tensor(const Dataset& ds, const Discretizer& disc) {
    SparseTensor4 t;
    t.mode_sizes = disc.mode_sizes();
    t.entries.reserve(ds.records.size());
    std::unordered_set<std::size_t> seen;
    const auto& ms = t.mode_sizes;
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        const WindObservation& rec = ds.records[r];
        if (!rec.ri)
            throw std::invalid_argument("build_sparse_tensor: record " + std::to_string(r) +
                                        " has no ri value");
        SparseTensor4::Entry e;
        e.idx = disc.discretize(rec.h, rec.u, rec.v, rec.w);
        e.value = disc.target().forward(*rec.ri);
        const std::size_t linear = ((e.idx[0] * ms[1] + e.idx[1]) * ms[2] + e.idx[2]) * ms[3] + e.idx[3];
        if (!seen.insert(linear).second) ++t.collision_count;
        t.entries.push_back(e);
    }
    return t;
}

FeatureColumns columns(const Dataset& ds) {
    FeatureColumns c;
    c.h.reserve(ds.records.size());
    c.u.reserve(ds.records.size());
    c.v.reserve(ds.records.size());
    c.w.reserve(ds.records.size());
    for (const WindObservation& r : ds.records) {
        c.h.push_back(r.h);
        c.u.push_back(r.u);
        c.v.push_back(r.v);
        c.w.push_back(r.w);
        if (r.ri) c.ri.push_back(*r.ri);
    }
    return c;
}

}  // namespace windri
