#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "saf/io.hpp"
#include "saf/measurement.hpp"

namespace saf::io {

/// Model files start with one header line, then one value per line:
///   dense <m> <n> <real|complex>   followed by m*n row-major entries
///   cdp <rows> <cols> <K>          followed by K*rows*cols complex mask entries
using AnyModel = std::variant<DenseModel<double>, DenseModel<cx>, CdpModel<cx>>;

template <typename Model>
void write_model(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    using S = typename Model::signal_t;
    if constexpr (std::is_same_v<Model, DenseModel<S>>) {
        out << "dense " << model.m() << " " << model.n() << " "
            << (is_complex_v<S> ? "complex" : "real") << '\n';
        for (std::size_t i = 0; i < model.m(); ++i)
            for (std::size_t j = 0; j < model.n(); ++j) out << fmt_scalar(model.entry(i, j)) << '\n';
    } else {
        out << "cdp " << model.rows() << " " << model.cols() << " " << model.mask_count() << '\n';
        for (std::size_t k = 0; k < model.mask_count(); ++k)
            for (const auto& e : model.mask(k)) out << fmt_scalar(e) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline AnyModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": empty model file");
    std::istringstream hs(header);
    std::string kind;
    hs >> kind;

    auto read_values = [&](std::size_t count, auto parse_into) {
        std::string line;
        std::size_t got = 0, lineno = 1;
        while (got < count && std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                parse_into(line, got);
            } catch (const std::exception& e) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            ++got;
        }
        if (got < count)
            throw std::runtime_error(path + ": expected " + std::to_string(count) +
                                     " values, found " + std::to_string(got));
    };

    if (kind == "dense") {
        std::size_t m = 0, n = 0;
        std::string field;
        hs >> m >> n >> field;
        if (!hs || m == 0 || n == 0 || (field != "real" && field != "complex"))
            throw std::runtime_error(path + ": bad dense header: " + header);
        if (field == "real") {
            std::vector<double> a(m * n);
            read_values(m * n, [&](const std::string& s, std::size_t i) { parse_scalar(s, a[i]); });
            return DenseModel<double>(m, n, std::move(a));
        }
        std::vector<cx> a(m * n);
        read_values(m * n, [&](const std::string& s, std::size_t i) { parse_scalar(s, a[i]); });
        return DenseModel<cx>(m, n, std::move(a));
    }
    if (kind == "cdp") {
        std::size_t rows = 0, cols = 0, k = 0;
        hs >> rows >> cols >> k;
        if (!hs || rows == 0 || cols == 0 || k == 0)
            throw std::runtime_error(path + ": bad cdp header: " + header);
        const std::size_t n = rows * cols;
        std::vector<std::vector<cx>> masks(k, std::vector<cx>(n));
        read_values(k * n, [&](const std::string& s, std::size_t i) {
            parse_scalar(s, masks[i / n][i % n]);
        });
        return CdpModel<cx>(rows, cols, std::move(masks));
    }
    throw std::runtime_error(path + ": unknown model kind: " + kind);
}

}  // namespace saf::io
