#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saf/field.hpp"
#include "saf/vec.hpp"

namespace saf::io {

/// Floats are serialized with 17 significant digits so values round-trip
/// bit-exactly and reruns produce byte-identical files.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_scalar(double v) { return fmt_double(v); }
inline std::string fmt_scalar(const cx& v) {
    return fmt_double(v.real()) + "," + fmt_double(v.imag());
}

/// Line-oriented CSV writer; the stream is flushed after every row so a
/// partially completed sweep still leaves a usable file.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        path_ = path;
    }

    void header(const std::string& line) { raw_line(line); }

    void row(const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ',';
            line += fields[i];
        }
        raw_line(line);
    }

  private:
    void raw_line(const std::string& line) {
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw std::runtime_error("write failed: " + path_);
    }

    std::ofstream out_;
    std::string path_;
};

// ---------------------------------------------------------------------------
// 8-bit binary PGM (P5), pixels mapped to [0,1].

struct Image {
    std::size_t rows = 0, cols = 0;
    std::vector<double> pixels;  // row-major, values in [0,1]
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t offset, const std::string& what) {
    throw std::runtime_error(path + ": parse error at byte " + std::to_string(offset) + ": " + what);
}

inline int next_token_int(const std::string& data, std::size_t& pos, const std::string& path,
                          const char* what) {
    // skip whitespace and '#' comments
    while (pos < data.size()) {
        if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= data.size()) parse_fail(path, pos, std::string("expected ") + what);
    std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start) parse_fail(path, pos, std::string("expected integer for ") + what);
    return std::stoi(data.substr(start, pos - start));
}

}  // namespace detail

inline Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();

    std::size_t pos = 0;
    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        detail::parse_fail(path, 0, "not a binary PGM (magic P5)");
    pos = 2;
    const int w = detail::next_token_int(data, pos, path, "width");
    const int h = detail::next_token_int(data, pos, path, "height");
    const int maxval = detail::next_token_int(data, pos, path, "maxval");
    if (w <= 0 || h <= 0) detail::parse_fail(path, pos, "non-positive dimensions");
    if (maxval <= 0 || maxval > 255) detail::parse_fail(path, pos, "unsupported maxval (8-bit only)");
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        detail::parse_fail(path, pos, "expected single whitespace before raster");
    ++pos;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (data.size() - pos < need)
        detail::parse_fail(path, data.size(), "raster truncated, need " + std::to_string(need) + " bytes");

    Image img;
    img.rows = static_cast<std::size_t>(h);
    img.cols = static_cast<std::size_t>(w);
    img.pixels.resize(need);
    for (std::size_t i = 0; i < need; ++i)
        img.pixels[i] = static_cast<double>(static_cast<unsigned char>(data[pos + i])) / maxval;
    return img;
}

inline void write_pgm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    for (const double p : img.pixels) {
        const double c = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
        out.put(static_cast<char>(static_cast<int>(c * 255.0 + 0.5)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Plain-text vector and model dumps: one value per line, complex as "re,im".

inline void parse_scalar(const std::string& tok, double& out) {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    if (used != tok.size()) throw std::runtime_error("trailing characters in value: " + tok);
}

inline void parse_scalar(const std::string& tok, cx& out) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("complex value must be \"re,im\": " + tok);
    double re = 0.0, im = 0.0;
    parse_scalar(tok.substr(0, comma), re);
    parse_scalar(tok.substr(comma + 1), im);
    out = cx(re, im);
}

template <Scalar T>
void write_vector(const std::string& path, const Vec<T>& v) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& x : v) out << fmt_scalar(x) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

template <Scalar T>
Vec<T> read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Vec<T> v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        T x{};
        try {
            parse_scalar(line, x);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        v.push_back(x);
    }
    if (v.empty()) throw std::runtime_error(path + ": no values found");
    return v;
}

}  // namespace saf::io
