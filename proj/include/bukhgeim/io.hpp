#pragma once

#include <string>
#include <vector>

#include "bukhgeim/forward.hpp"
#include "bukhgeim/grid.hpp"

namespace bukhgeim {

/// Binary field format: little-endian header {magic "BFLD", version u32,
/// N u32, L f64, support_tag u8} followed by N^2 (re,im) f64 pairs, row-major.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path, const GridPtr& grid_hint);

/// DNMap file: header {magic "DNMP", version u32, boundary count u32},
/// then the dense complex matrix row-major.
void write_dnmap(const std::string& path, const DNMap& dn);
DNMap read_dnmap(const std::string& path, const GridPtr& grid);

/// CSV export of norms: columns (name, p_or_s, value).
void write_norms_csv(const std::string& path,
                     const std::vector<std::tuple<std::string, double, double>>& rows);

/// Minimal SVG heatmap of |field| (or real part) on the grid, linear color
/// map with a fixed scale; config hash embedded as a metadata comment.
void write_svg_heatmap(const std::string& path, const Field& f, double vmax,
                       const std::string& config_hash, int max_cells = 64);

/// Atomic text write (tmp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

/// Fixed-format floating point for byte-stable CSV.
std::string fmt_g(double v);

}  // namespace bukhgeim
