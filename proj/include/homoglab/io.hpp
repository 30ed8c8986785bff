#pragma once

// Field persistence (flat binary with a small header, plus CSV dumps) and the
// CSV/manifest helpers shared by the CLI.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "homoglab/grid.hpp"

namespace homog {

constexpr std::uint32_t kFieldMagic = 0x48474c46;  // "HGLF"

struct FieldHeader {
    std::uint32_t magic = kFieldMagic;
    std::uint32_t d = 0;
    std::uint32_t n = 0;
    std::uint32_t components = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t sample_index = 0;
};

inline void write_field_binary(const std::string& path, const ScalarField& f,
                               std::uint64_t master_seed = 0, std::uint64_t sample_index = 0) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    FieldHeader h;
    h.d = static_cast<std::uint32_t>(f.grid.d);
    h.n = static_cast<std::uint32_t>(f.grid.n);
    h.components = 1;
    h.master_seed = master_seed;
    h.sample_index = sample_index;
    os.write(reinterpret_cast<const char*>(&h), sizeof(h));
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline ScalarField read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    FieldHeader h;
    is.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (h.magic != kFieldMagic) throw std::runtime_error(path + ": not a field file");
    if (h.components != 1) throw std::runtime_error(path + ": expected a scalar field");
    ScalarField f(PeriodicGrid(static_cast<int>(h.d), static_cast<int>(h.n)));
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error(path + ": truncated field data");
    return f;
}

// Full double precision, RFC-4180 '.' decimal.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::vector<std::string>& columns)
        : os_(path) {
        if (!os_) throw std::runtime_error("cannot open " + path + " for writing");
        os_ << "# homoglab-schema: " << schema << "\r\n";
        write_row_strings(columns);
    }

    void write_row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) os_ << ',';
            os_ << format_double(values[i]);
        }
        os_ << "\r\n";
    }

    void write_row_strings(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) os_ << ',';
            os_ << values[i];
        }
        os_ << "\r\n";
    }

private:
    std::ofstream os_;
};

inline void dump_field_csv(const std::string& path, const ScalarField& f) {
    std::vector<std::string> cols;
    for (int ax = 0; ax < f.grid.d; ++ax) cols.push_back("x" + std::to_string(ax));
    cols.push_back("value");
    CsvWriter w(path, "field@1", cols);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = f.grid.coords(i);
        std::vector<double> row;
        for (int ax = 0; ax < f.grid.d; ++ax) row.push_back(x[static_cast<std::size_t>(ax)]);
        row.push_back(f[i]);
        w.write_row(row);
    }
}

// FNV-1a 64-bit content hash, used by the run manifest.
inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

inline std::uint64_t fnv1a_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return buf;
}

}  // namespace homog
