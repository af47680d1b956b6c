#ifndef CST_IO_HPP
#define CST_IO_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cst/mesh.hpp"
#include "cst/phantom.hpp"

namespace cst {

/// Double formatted with the shortest representation that round-trips.
std::string format_double(double v);

/// Quote a CSV field per RFC 4180 when it contains commas, quotes or newlines.
std::string csv_escape(const std::string& field);

/// Line-oriented CSV writer; comment lines start with '#' so readers that
/// follow the convention can skip provenance stamps.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    void comment(const std::string& text);
    void row(const std::vector<std::string>& cells);
    void close();

  private:
    std::ofstream out_;
    std::string path_;
};

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major, top image row first

    uint8_t at(int col, int row) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

struct RenderedRaster {
    GrayImage image;
    double vmin = 0.0;
    double vmax = 0.0;
};

/// Binary 8-bit PGM plus a "<path>.meta" sidecar recording the value range and
/// any extra provenance lines, so images can be compared bit-for-bit.
void write_pgm(const std::string& path, const GrayImage& img, double vmin, double vmax,
               const std::vector<std::string>& meta_lines);

/// Fill each output pixel with the value of the mesh pixel containing its
/// sample point, mapped linearly: gray = round(255 * (v - vmin)/(vmax - vmin)).
/// Points outside every mesh pixel render as 0. Top image row = largest y.
RenderedRaster render_mesh_values(const Mesh& mesh, const std::vector<double>& values, int width);

RenderedRaster render_field(const Field& field, int width);

}  // namespace cst

#endif
