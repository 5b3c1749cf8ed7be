#pragma once

#include "velo/grid.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace velo {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Images map to fields with x1 along PGM rows and x2 along columns:
// width = n2, height = n1, raster value (row i, col j) = field(i, j).

/// Read a binary (P5) PGM, 8- or 16-bit, scaled by maxval to [0,1].
/// Dimensions must be even and >= 4.
ScalarField read_pgm(const std::string& path);

/// Write an 8-bit binary PGM; values are clipped to [0,1] and quantized.
void write_pgm(const ScalarField& field, const std::string& path);

// Raw field container: 32-byte header (magic "VELO", u32 version, u32 n1,
// u32 n2, u32 component count, 12 reserved zero bytes) followed by
// little-endian IEEE doubles, row-major (index i*n2 + j), one component
// after the other. Round trips are bit exact.

void write_raw_field(const ScalarField& field, const std::string& path);
void write_raw_field(const VectorField& field, const std::string& path);

struct RawField {
    Grid2D grid;
    std::vector<Array> components;
};

RawField read_raw_field(const std::string& path);
ScalarField read_raw_scalar(const std::string& path);
VectorField read_raw_vector(const std::string& path);

/// P6 PPM of det(F1) with a piecewise-linear black -> orange(255,165,0) at
/// det = 1 -> white map; values are clipped to the window.
void write_detf_colormap(const ScalarField& det_f, double window_lo, double window_hi,
                         const std::string& path);

/// Minimal RFC-4180 CSV writer: quotes fields containing commas, quotes or
/// newlines; floating-point cells carry 17 significant digits.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    static std::string num(double value);
    static std::string num(long value);

  private:
    void* file_ = nullptr;
};

}  // namespace velo
