#include "bukhgeim/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "bukhgeim/rng.hpp"

namespace bukhgeim {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field: cannot open " + path);
    os.write("BFLD", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(f.grid->N));
    put_f64(os, f.grid->L);
    char tag = static_cast<char>(f.support);
    os.write(&tag, 1);
    for (const auto& v : f.values) {
        put_f64(os, v.real());
        put_f64(os, v.imag());
    }
    if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

Field read_field(const std::string& path, const GridPtr& grid_hint) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "BFLD", 4) != 0)
        throw std::runtime_error("read_field: bad magic in " + path);
    std::uint32_t version = get_u32(is);
    if (version != 1) throw std::runtime_error("read_field: unsupported version");
    std::uint32_t n = get_u32(is);
    double L = get_f64(is);
    char tag = 0;
    is.read(&tag, 1);
    if (!grid_hint || grid_hint->N != static_cast<int>(n) ||
        std::abs(grid_hint->L - L) > 1e-12)
        throw std::runtime_error("read_field: grid mismatch for " + path);
    Field f(grid_hint, static_cast<SupportTag>(tag));
    for (auto& v : f.values) {
        double re = get_f64(is), im = get_f64(is);
        v = cplx(re, im);
    }
    if (!is) throw std::runtime_error("read_field: truncated file " + path);
    return f;
}

void write_dnmap(const std::string& path, const DNMap& dn) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_dnmap: cannot open " + path);
    os.write("DNMP", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(dn.size()));
    for (const auto& v : dn.matrix) {
        put_f64(os, v.real());
        put_f64(os, v.imag());
    }
    if (!os) throw std::runtime_error("write_dnmap: write failed for " + path);
}

DNMap read_dnmap(const std::string& path, const GridPtr& grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_dnmap: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "DNMP", 4) != 0)
        throw std::runtime_error("read_dnmap: bad magic in " + path);
    std::uint32_t version = get_u32(is);
    if (version != 1) throw std::runtime_error("read_dnmap: unsupported version");
    std::uint32_t count = get_u32(is);
    DNMap dn;
    dn.grid = grid;
    if (grid && grid->boundary_count() != static_cast<int>(count))
        throw std::runtime_error("GRID_MISMATCH: dn map has " + std::to_string(count) +
                                 " boundary nodes, grid expects " +
                                 std::to_string(grid->boundary_count()));
    dn.matrix.resize(static_cast<std::size_t>(count) * count);
    for (auto& v : dn.matrix) {
        double re = get_f64(is), im = get_f64(is);
        v = cplx(re, im);
    }
    if (!is) throw std::runtime_error("read_dnmap: truncated file " + path);
    return dn;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_norms_csv(const std::string& path,
                     const std::vector<std::tuple<std::string, double, double>>& rows) {
    std::string out = "name,p_or_s,value\n";
    for (const auto& [name, p, v] : rows)
        out += name + "," + fmt_g(p) + "," + fmt_g(v) + "\n";
    write_text_atomic(path, out);
}

void write_svg_heatmap(const std::string& path, const Field& f, double vmax,
                       const std::string& config_hash, int max_cells) {
    const auto& g = f.grid;
    int step = std::max(1, g->N / max_cells);
    int cells = g->N / step;
    const int px = 8;
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(cells * px) +
           "\" height=\"" + std::to_string(cells * px) + "\">\n";
    svg += "<!-- config_hash=" + config_hash + " vmax=" + fmt_g(vmax) + " -->\n";
    for (int a = 0; a < cells; ++a) {
        for (int b = 0; b < cells; ++b) {
            double acc = 0.0;
            int cnt = 0;
            for (int i = a * step; i < (a + 1) * step; ++i)
                for (int j = b * step; j < (b + 1) * step; ++j) {
                    acc += std::abs(f.at(i, j));
                    ++cnt;
                }
            double t = vmax > 0 ? std::min(acc / cnt / vmax, 1.0) : 0.0;
            int r = static_cast<int>(255 * t);
            int bch = static_cast<int>(255 * (1.0 - t));
            svg += "<rect x=\"" + std::to_string(a * px) + "\" y=\"" +
                   std::to_string((cells - 1 - b) * px) + "\" width=\"" + std::to_string(px) +
                   "\" height=\"" + std::to_string(px) + "\" fill=\"rgb(" + std::to_string(r) +
                   ",40," + std::to_string(bch) + ")\"/>\n";
        }
    }
    svg += "</svg>\n";
    write_text_atomic(path, svg);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("write_text_atomic: cannot open " + tmp);
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw std::runtime_error("write_text_atomic: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_text_atomic: rename failed for " + path);
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& label) {
    std::uint64_t h = master ^ 0x9e3779b97f4a7c15ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 27;
    }
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bukhgeim
