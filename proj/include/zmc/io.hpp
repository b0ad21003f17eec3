#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zmc/grid.hpp"
#include "zmc/surface.hpp"

// Text formats: CSV grid fields and meshes with # metadata lines, OBJ-style
// projected meshes, and the key = value run-configuration document.
// Field and mesh files roundtrip bit-identically (%.17g).

namespace zmc {

class FileFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::map<std::string, std::string> parse_meta(std::istream& in, std::string& first_data_line,
                                                     const std::string& path) {
    std::map<std::string, std::string> meta;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') {
            first_data_line = line;
            return meta;
        }
        std::istringstream ls(line.substr(1));
        std::string tok;
        while (ls >> tok) {
            const auto eq = tok.find('=');
            if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
    }
    throw FileFormatError(path + ": no data after metadata");
}

inline GridSpec meta_grid(const std::map<std::string, std::string>& meta, const std::string& path) {
    GridSpec g;
    auto need = [&](const char* k) {
        const auto it = meta.find(k);
        if (it == meta.end()) throw FileFormatError(path + ": missing metadata key " + k);
        return it->second;
    };
    g.nu = std::atoi(need("nu").c_str());
    g.nv = std::atoi(need("nv").c_str());
    g.u_min = std::atof(need("u_min").c_str());
    g.u_max = std::atof(need("u_max").c_str());
    g.v_min = std::atof(need("v_min").c_str());
    g.v_max = std::atof(need("v_max").c_str());
    if (g.nu < 1 || g.nv < 1) throw FileFormatError(path + ": bad grid size in metadata");
    return g;
}

inline void write_meta(std::ostream& out, const GridSpec& g) {
    out << "# nu=" << g.nu << " nv=" << g.nv << " u_min=" << fmt_g17(g.u_min)
        << " u_max=" << fmt_g17(g.u_max) << " v_min=" << fmt_g17(g.v_min)
        << " v_max=" << fmt_g17(g.v_max) << "\n";
}

inline std::vector<double> split_row(const std::string& line, std::size_t want, long row,
                                     const std::string& path) {
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const std::size_t comma = line.find(',', pos);
        const std::string cell =
            line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!cell.empty()) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw FileFormatError(path + ": row " + std::to_string(row) + ": bad number '" + cell + "'");
            vals.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (vals.size() != want)
        throw FileFormatError(path + ": row " + std::to_string(row) + ": expected " +
                              std::to_string(want) + " columns, got " + std::to_string(vals.size()));
    return vals;
}

} // namespace detail

// ---- scalar field files ----------------------------------------------------

inline void write_field(const std::string& path, const GridField& F) {
    std::ofstream out(path);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    const GridSpec& g = F.grid();
    detail::write_meta(out, g);
    out << "u,v,value\n";
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            out << detail::fmt_g17(g.u(i)) << ',' << detail::fmt_g17(g.v(j)) << ','
                << detail::fmt_g17(F.at(i, j)) << "\n";
}

inline GridField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError(path + ": cannot open");
    std::string header;
    const auto meta = detail::parse_meta(in, header, path);
    if (header != "u,v,value") throw FileFormatError(path + ": expected header 'u,v,value'");
    const GridSpec g = detail::meta_grid(meta, path);
    GridField F(g);
    std::string line;
    long row = 0;
    const long total = static_cast<long>(g.size());
    while (row < total) {
        if (!std::getline(in, line))
            throw FileFormatError(path + ": truncated at data row " + std::to_string(row + 1) + " of " +
                                  std::to_string(total));
        if (line.empty()) continue;
        const auto vals = detail::split_row(line, 3, row + 1, path);
        F.data()[static_cast<std::size_t>(row)] = vals[2];
        ++row;
    }
    return F;
}

// ---- mesh files --------------------------------------------------------------

inline void write_mesh(const std::string& path, const SurfacePatch& p) {
    std::ofstream out(path);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    const GridSpec& g = p.grid();
    detail::write_meta(out, g);
    out << "u,v,x1,x2,x3,x4\n";
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const Vec4& z = p.position(i, j);
            out << detail::fmt_g17(g.u(i)) << ',' << detail::fmt_g17(g.v(j)) << ','
                << detail::fmt_g17(z.x1) << ',' << detail::fmt_g17(z.x2) << ','
                << detail::fmt_g17(z.x3) << ',' << detail::fmt_g17(z.x4) << "\n";
        }
}

inline SurfacePatch read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileFormatError(path + ": cannot open");
    std::string header;
    const auto meta = detail::parse_meta(in, header, path);
    if (header != "u,v,x1,x2,x3,x4") throw FileFormatError(path + ": expected header 'u,v,x1,x2,x3,x4'");
    const GridSpec g = detail::meta_grid(meta, path);
    std::vector<Vec4> pos(g.size());
    std::string line;
    long row = 0;
    const long total = static_cast<long>(g.size());
    while (row < total) {
        if (!std::getline(in, line))
            throw FileFormatError(path + ": truncated at data row " + std::to_string(row + 1) + " of " +
                                  std::to_string(total));
        if (line.empty()) continue;
        const auto vals = detail::split_row(line, 6, row + 1, path);
        pos[static_cast<std::size_t>(row)] = Vec4{vals[2], vals[3], vals[4], vals[5]};
        ++row;
    }
    return SurfacePatch(g, std::move(pos));
}

// Wavefront-style projection: drop one of x1..x4 (axis index 0..3) and emit
// vertices plus quad faces over the grid cells.
inline void write_obj(const std::string& path, const SurfacePatch& p, int drop_axis) {
    if (drop_axis < 0 || drop_axis > 3) throw std::invalid_argument("write_obj: drop_axis must be 0..3");
    std::ofstream out(path);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    const GridSpec& g = p.grid();
    out << "# projected mesh, dropped axis x" << (drop_axis + 1) << "\n";
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const Vec4& z = p.position(i, j);
            out << "v";
            for (int a = 0; a < 4; ++a)
                if (a != drop_axis) out << ' ' << detail::fmt_g17(z[static_cast<std::size_t>(a)]);
            out << "\n";
        }
    for (int i = 0; i + 1 < g.nu; ++i)
        for (int j = 0; j + 1 < g.nv; ++j) {
            const long a = static_cast<long>(g.idx(i, j)) + 1;
            const long b = static_cast<long>(g.idx(i + 1, j)) + 1;
            const long c = static_cast<long>(g.idx(i + 1, j + 1)) + 1;
            const long d = static_cast<long>(g.idx(i, j + 1)) + 1;
            out << "f " << a << ' ' << b << ' ' << c << ' ' << d << "\n";
        }
}

// ---- run configuration --------------------------------------------------------

/**
 * Single-section `key = value` document. Unknown keys are a hard error at
 * validation time; every parse records line numbers for addressable
 * messages.
 */
class RunConfig {
  public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static RunConfig parse_string(const std::string& text, const std::string& name = "<config>") {
        RunConfig cfg;
        cfg.name_ = name;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto strip = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string{};
                const auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            const std::string stripped = strip(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = strip(stripped.substr(0, eq));
            const std::string val = strip(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.entries_.count(key))
                throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            cfg.entries_[key] = Entry{val, lineno};
        }
        return cfg;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str(), path);
    }

    void require_known(const std::vector<std::string>& allowed) const {
        for (const auto& [key, entry] : entries_) {
            bool ok = false;
            for (const auto& a : allowed)
                if (a == key) {
                    ok = true;
                    break;
                }
            if (!ok)
                throw ConfigError(name_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        char* end = nullptr;
        const double v = std::strtod(it->second.value.c_str(), &end);
        if (end == it->second.value.c_str() || *end != '\0')
            throw ConfigError(name_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                              "' is not a number: '" + it->second.value + "'");
        return v;
    }

    int get_int(const std::string& key, int fallback) const {
        const double v = get_double(key, fallback);
        const int r = static_cast<int>(v);
        if (static_cast<double>(r) != v) {
            const auto it = entries_.find(key);
            throw ConfigError(name_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                              "' is not an integer");
        }
        return r;
    }

    const std::map<std::string, Entry>& entries() const { return entries_; }

  private:
    std::string name_;
    std::map<std::string, Entry> entries_;
};

} // namespace zmc
