#ifndef RELIEFSCAN_HMAP_IO_HPP
#define RELIEFSCAN_HMAP_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include "reliefscan/types.hpp"

namespace reliefscan::io {

// Parse/format error carrying 1-based line/column of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Shortest decimal representation that round-trips the exact 64-bit value.
std::string format_double(double v);

// HMAP text format:
//   HMAP 1
//   width W
//   height H
//   pitch_um P
//   meta <key> <value>        (optional, repeated; canonical order sorts by key)
//   H data lines of W whitespace-separated decimal tokens; "nan" marks a missing pixel.
// On read, any of "nan", "inf", "-inf" (case-insensitive) maps to the missing sentinel.
HeightMap read_heightmap(const std::filesystem::path& path);
void write_heightmap(const HeightMap& h, const std::filesystem::path& path);

// In-memory codec used by the file functions; exposed for round-trip tests.
HeightMap parse_heightmap(const std::string& text, const std::string& origin = "<memory>");
std::string serialize_heightmap(const HeightMap& h);

// Binary PGM (P5), maxval 255, ink = 255, papyrus = 0. Any other pixel value is rejected.
LabelMask read_mask(const std::filesystem::path& path);
void write_mask(const LabelMask& m, const std::filesystem::path& path);

// CSV manifest with header: sample_id,papyrus_id,letter,heightmap,label
// Relative file paths resolve against the manifest's directory; every referenced
// file must exist at load time.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);

}  // namespace reliefscan::io

#endif
