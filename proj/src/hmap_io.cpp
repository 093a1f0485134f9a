#include "reliefscan/hmap_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace reliefscan {

void validate(const HeightMap& h) {
    if (h.width < 1 || h.height < 1)
        throw std::invalid_argument("heightmap dimensions must be positive");
    if (!(h.pitch_um > 0.0))
        throw std::invalid_argument("heightmap pitch_um must be > 0");
    if (h.z.size() != static_cast<size_t>(h.width) * static_cast<size_t>(h.height))
        throw std::invalid_argument("heightmap grid size does not match width*height");
}

size_t LabelMask::count_ink() const {
    size_t n = 0;
    for (uint8_t v : ink) n += (v != 0);
    return n;
}

std::vector<std::string> DatasetManifest::papyrus_ids() const {
    std::vector<std::string> ids;
    for (const auto& e : entries)
        if (std::find(ids.begin(), ids.end(), e.papyrus_id) == ids.end())
            ids.push_back(e.papyrus_id);
    return ids;
}

}  // namespace reliefscan

namespace reliefscan::io {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Splits a line into tokens, recording the 1-based column of each token start.
struct Token {
    std::string text;
    int column;
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

bool parse_finite_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool is_missing_token(const std::string& tok) {
    std::string t = lower(tok);
    return t == "nan" || t == "inf" || t == "-inf";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

HeightMap parse_heightmap(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto next_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw ParseError(std::string("unexpected end of file, expected ") + what + " in " + origin,
                             line_no + 1, 1);
        ++line_no;
    };

    next_line("HMAP magic");
    {
        auto toks = tokenize(line);
        if (toks.size() != 2 || toks[0].text != "HMAP" || toks[1].text != "1")
            throw ParseError("malformed header, expected 'HMAP 1'", line_no,
                             toks.empty() ? 1 : toks[0].column);
    }

    auto header_int = [&](const char* key) {
        next_line(key);
        auto toks = tokenize(line);
        if (toks.size() != 2 || toks[0].text != key)
            throw ParseError(std::string("malformed header, expected '") + key + " <value>'",
                             line_no, toks.empty() ? 1 : toks[0].column);
        long v = 0;
        auto [ptr, ec] = std::from_chars(toks[1].text.data(),
                                         toks[1].text.data() + toks[1].text.size(), v);
        if (ec != std::errc() || ptr != toks[1].text.data() + toks[1].text.size() || v < 1)
            throw ParseError(std::string("invalid ") + key, line_no, toks[1].column);
        return static_cast<int>(v);
    };

    HeightMap h;
    h.width = header_int("width");
    h.height = header_int("height");

    next_line("pitch_um");
    {
        auto toks = tokenize(line);
        if (toks.size() != 2 || toks[0].text != "pitch_um")
            throw ParseError("malformed header, expected 'pitch_um <value>'", line_no,
                             toks.empty() ? 1 : toks[0].column);
        double p = 0.0;
        if (!parse_finite_double(toks[1].text, p))
            throw ParseError("non-numeric pitch_um", line_no, toks[1].column);
        if (!(p > 0.0)) throw ParseError("pitch_um must be > 0", line_no, toks[1].column);
        h.pitch_um = p;
    }

    // optional meta lines, then data
    h.z.reserve(static_cast<size_t>(h.width) * h.height);
    int data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) {
            if (data_rows == h.height) continue;  // trailing blank after last row is tolerated
            throw ParseError("blank line inside data block", line_no, 1);
        }
        if (toks[0].text == "meta") {
            if (data_rows > 0)
                throw ParseError("meta line after data started", line_no, toks[0].column);
            if (toks.size() < 3)
                throw ParseError("malformed meta line, expected 'meta <key> <value>'", line_no,
                                 toks[0].column);
            std::string key = toks[1].text;
            size_t value_off = line.find(toks[2].text, static_cast<size_t>(toks[2].column) - 1);
            std::string value = line.substr(value_off);
            while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
            h.meta[key] = value;
            continue;
        }
        if (data_rows >= h.height)
            throw ParseError("extra data row, expected exactly " + std::to_string(h.height) +
                                 " rows",
                             line_no, toks[0].column);
        if (static_cast<int>(toks.size()) != h.width)
            throw ParseError("dimension mismatch in data row " + std::to_string(data_rows) +
                                 ": expected " + std::to_string(h.width) + " tokens, got " +
                                 std::to_string(toks.size()),
                             line_no, toks[0].column);
        for (const auto& t : toks) {
            if (is_missing_token(t.text)) {
                h.z.push_back(missing_value());
                continue;
            }
            double v = 0.0;
            if (!parse_finite_double(t.text, v))
                throw ParseError("non-numeric token '" + t.text + "'", line_no, t.column);
            h.z.push_back(v);
        }
        ++data_rows;
    }
    if (data_rows != h.height)
        throw ParseError("dimension mismatch: expected " + std::to_string(h.height) +
                             " data rows, got " + std::to_string(data_rows),
                         line_no + 1, 1);
    validate(h);
    return h;
}

std::string serialize_heightmap(const HeightMap& h) {
    validate(h);
    for (const auto& [k, v] : h.meta) {
        if (k.empty() || k.find_first_of(" \t\n\r") != std::string::npos)
            throw std::invalid_argument("meta key must be a single non-empty token: '" + k + "'");
        if (v.find_first_of("\n\r") != std::string::npos)
            throw std::invalid_argument("meta value must be single-line for key '" + k + "'");
    }
    std::string out;
    out.reserve(h.z.size() * 8 + 64);
    out += "HMAP 1\n";
    out += "width " + std::to_string(h.width) + "\n";
    out += "height " + std::to_string(h.height) + "\n";
    out += "pitch_um " + format_double(h.pitch_um) + "\n";
    for (const auto& [k, v] : h.meta) out += "meta " + k + " " + v + "\n";
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x) {
            if (x) out += ' ';
            double v = h.at(x, y);
            out += is_missing(v) ? "nan" : format_double(v);
        }
        out += '\n';
    }
    return out;
}

HeightMap read_heightmap(const std::filesystem::path& path) {
    return parse_heightmap(read_file(path), path.string());
}

void write_heightmap(const HeightMap& h, const std::filesystem::path& path) {
    write_file(path, serialize_heightmap(h));
}

LabelMask read_mask(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto next_int = [&](const char* what) {
        skip_ws();
        size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (pos == start)
            throw std::runtime_error(std::string("PGM: expected ") + what + " in " + path.string());
        return std::stol(bytes.substr(start, pos - start));
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw std::runtime_error("not a binary PGM (P5) file: " + path.string());
    pos = 2;
    long w = next_int("width");
    long hgt = next_int("height");
    long maxval = next_int("maxval");
    if (w < 1 || hgt < 1) throw std::runtime_error("PGM: bad dimensions in " + path.string());
    if (maxval != 255) throw std::runtime_error("PGM: maxval must be 255 in " + path.string());
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw std::runtime_error("PGM: missing whitespace after maxval in " + path.string());
    ++pos;
    size_t need = static_cast<size_t>(w) * static_cast<size_t>(hgt);
    if (bytes.size() - pos < need)
        throw std::runtime_error("PGM: truncated pixel data in " + path.string());

    LabelMask m;
    m.width = static_cast<int>(w);
    m.height = static_cast<int>(hgt);
    m.ink.resize(need);
    for (size_t i = 0; i < need; ++i) {
        uint8_t v = static_cast<uint8_t>(bytes[pos + i]);
        if (v != 0 && v != 255)
            throw std::runtime_error("PGM: illegal pixel value " + std::to_string(int(v)) +
                                     " (only 0 and 255 allowed) in " + path.string());
        m.ink[i] = v ? 1 : 0;
    }
    return m;
}

void write_mask(const LabelMask& m, const std::filesystem::path& path) {
    if (m.width < 1 || m.height < 1 ||
        m.ink.size() != static_cast<size_t>(m.width) * static_cast<size_t>(m.height))
        throw std::invalid_argument("malformed mask");
    std::string out = "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
    out.reserve(out.size() + m.ink.size());
    for (uint8_t v : m.ink) out += static_cast<char>(v ? 255 : 0);
    write_file(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
    std::filesystem::path base = path.parent_path();

    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{
                                       "sample_id", "papyrus_id", "letter", "heightmap", "label"})
        throw std::runtime_error(
            "manifest must start with header sample_id,papyrus_id,letter,heightmap,label: " +
            path.string());

    DatasetManifest m;
    std::set<std::string> seen;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 5)
            throw std::runtime_error("manifest row " + std::to_string(row) + ": expected 5 fields");
        ManifestEntry e;
        e.sample_id = f[0];
        e.papyrus_id = f[1];
        e.letter = f[2];
        e.heightmap_path = std::filesystem::path(f[3]);
        e.label_path = std::filesystem::path(f[4]);
        if (e.heightmap_path.is_relative()) e.heightmap_path = base / e.heightmap_path;
        if (e.label_path.is_relative()) e.label_path = base / e.label_path;
        if (e.sample_id.empty() || e.papyrus_id.empty())
            throw std::runtime_error("manifest row " + std::to_string(row) +
                                     ": empty sample_id or papyrus_id");
        if (!seen.insert(e.sample_id).second)
            throw std::runtime_error("duplicate sample_id '" + e.sample_id + "' in manifest");
        if (!std::filesystem::exists(e.heightmap_path))
            throw std::runtime_error("manifest references missing heightmap: " +
                                     e.heightmap_path.string());
        if (!std::filesystem::exists(e.label_path))
            throw std::runtime_error("manifest references missing label: " +
                                     e.label_path.string());
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) throw std::runtime_error("empty manifest: " + path.string());
    return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::filesystem::path base = path.parent_path();
    std::string out = "sample_id,papyrus_id,letter,heightmap,label\n";
    for (const auto& e : m.entries) {
        auto rel = [&](const std::filesystem::path& p) {
            auto r = p.lexically_relative(base);
            return (r.empty() || r.native().starts_with("..")) ? p.string() : r.string();
        };
        out += e.sample_id + "," + e.papyrus_id + "," + e.letter + "," + rel(e.heightmap_path) +
               "," + rel(e.label_path) + "\n";
    }
    write_file(path, out);
}

}  // namespace reliefscan::io
