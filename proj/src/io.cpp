#include "velo/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace velo {

namespace {

int pgm_token(std::istream& in) {
    // Next integer token, skipping whitespace and '#' comments.
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    if (!in) throw io_error("PGM: malformed header");
    return value;
}

void check_even_dims(int n1, int n2, const char* what) {
    if (n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0)
        throw io_error(std::string(what) + ": dimensions must be even and >= 4, got " +
                       std::to_string(n1) + "x" + std::to_string(n2));
}

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw io_error("raw field: truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_raw_components(const Grid2D& g, const std::vector<const Array*>& comps,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("raw field: cannot open " + path + " for writing");
    out.write("VELO", 4);
    put_u32(out, 1);
    put_u32(out, static_cast<uint32_t>(g.n1));
    put_u32(out, static_cast<uint32_t>(g.n2));
    put_u32(out, static_cast<uint32_t>(comps.size()));
    const char zeros[12] = {};
    out.write(zeros, 12);
    for (const Array* a : comps)
        for (int i = 0; i < g.n1; ++i)
            for (int j = 0; j < g.n2; ++j) {
                const double v = (*a)(i, j);
                out.write(reinterpret_cast<const char*>(&v), sizeof(double));
            }
    if (!out) throw io_error("raw field: write failed for " + path);
}

}  // namespace

ScalarField read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("PGM: cannot open " + path);
    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw io_error("PGM: " + path + " is not a binary (P5) PGM");
    const int width = pgm_token(in);
    const int height = pgm_token(in);
    const int maxval = pgm_token(in);
    if (maxval <= 0 || maxval > 65535) throw io_error("PGM: invalid maxval");
    in.get();  // single whitespace after maxval
    check_even_dims(height, width, "PGM");
    const Grid2D g(height, width);
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(static_cast<size_t>(width) * height * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw io_error("PGM: truncated pixel data in " + path);
    Array data(g.n1, g.n2);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const size_t idx = (static_cast<size_t>(i) * width + j) * bytes;
            // 16-bit PGM samples are big-endian
            const int raw = bytes == 1 ? buf[idx] : (buf[idx] << 8) | buf[idx + 1];
            data(i, j) = static_cast<double>(raw) / maxval;
        }
    return {g, std::move(data)};
}

void write_pgm(const ScalarField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("PGM: cannot open " + path + " for writing");
    const Grid2D& g = field.grid;
    out << "P5\n" << g.n2 << " " << g.n1 << "\n255\n";
    std::vector<unsigned char> buf(static_cast<size_t>(g.size()));
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const double v = std::min(1.0, std::max(0.0, field.data(i, j)));
            buf[static_cast<size_t>(i) * g.n2 + j] =
                static_cast<unsigned char>(std::lround(v * 255.0));
        }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("PGM: write failed for " + path);
}

void write_raw_field(const ScalarField& field, const std::string& path) {
    write_raw_components(field.grid, {&field.data}, path);
}

void write_raw_field(const VectorField& field, const std::string& path) {
    write_raw_components(field.grid, {&field.x, &field.y}, path);
}

RawField read_raw_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("raw field: cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "VELO", 4) != 0)
        throw io_error("raw field: bad magic in " + path);
    const uint32_t version = get_u32(in);
    if (version != 1) throw io_error("raw field: unsupported version");
    const auto n1 = static_cast<int>(get_u32(in));
    const auto n2 = static_cast<int>(get_u32(in));
    const auto ncomp = static_cast<int>(get_u32(in));
    char reserved[12];
    in.read(reserved, 12);
    check_even_dims(n1, n2, "raw field");
    if (ncomp < 1 || ncomp > 4) throw io_error("raw field: bad component count");
    RawField out;
    out.grid = Grid2D(n1, n2);
    for (int c = 0; c < ncomp; ++c) {
        Array a(n1, n2);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                double v;
                in.read(reinterpret_cast<char*>(&v), sizeof(double));
                if (!in) throw io_error("raw field: truncated data in " + path);
                a(i, j) = v;
            }
        out.components.push_back(std::move(a));
    }
    return out;
}

ScalarField read_raw_scalar(const std::string& path) {
    RawField raw = read_raw_field(path);
    if (raw.components.size() != 1)
        throw io_error("raw field: expected 1 component in " + path);
    return {raw.grid, std::move(raw.components[0])};
}

VectorField read_raw_vector(const std::string& path) {
    RawField raw = read_raw_field(path);
    if (raw.components.size() != 2)
        throw io_error("raw field: expected 2 components in " + path);
    return {raw.grid, std::move(raw.components[0]), std::move(raw.components[1])};
}

void write_detf_colormap(const ScalarField& det_f, double window_lo, double window_hi,
                         const std::string& path) {
    if (!(window_lo < 1.0 && 1.0 < window_hi))
        throw std::invalid_argument("write_detf_colormap: window must straddle det = 1");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("PPM: cannot open " + path + " for writing");
    const Grid2D& g = det_f.grid;
    out << "P6\n" << g.n2 << " " << g.n1 << "\n255\n";
    const double orange[3] = {255.0, 165.0, 0.0};
    const double white[3] = {255.0, 255.0, 255.0};
    std::vector<unsigned char> buf(static_cast<size_t>(g.size()) * 3);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const double d = det_f.data(i, j);
            double rgb[3];
            if (d <= window_lo) {
                rgb[0] = rgb[1] = rgb[2] = 0.0;
            } else if (d < 1.0) {
                const double s = (d - window_lo) / (1.0 - window_lo);
                for (int c = 0; c < 3; ++c) rgb[c] = s * orange[c];
            } else if (d < window_hi) {
                const double s = (d - 1.0) / (window_hi - 1.0);
                for (int c = 0; c < 3; ++c) rgb[c] = orange[c] + s * (white[c] - orange[c]);
            } else {
                rgb[0] = rgb[1] = rgb[2] = 255.0;
            }
            const size_t idx = (static_cast<size_t>(i) * g.n2 + j) * 3;
            for (int c = 0; c < 3; ++c)
                buf[idx + c] = static_cast<unsigned char>(std::lround(rgb[c]));
        }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("PPM: write failed for " + path);
}

CsvWriter::CsvWriter(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw io_error("CSV: cannot open " + path + " for writing");
    file_ = f;
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(static_cast<FILE*>(file_));
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    auto* f = static_cast<FILE*>(file_);
    for (size_t i = 0; i < cells.size(); ++i) {
        std::string cell = cells[i];
        if (cell.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : cell) {
                quoted += c;
                if (c == '"') quoted += '"';
            }
            quoted += '"';
            cell = quoted;
        }
        std::fputs(cell.c_str(), f);
        if (i + 1 < cells.size()) std::fputc(',', f);
    }
    std::fputc('\n', f);
}

std::string CsvWriter::num(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string CsvWriter::num(long value) { return std::to_string(value); }

}  // namespace velo
