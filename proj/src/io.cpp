#include "cst/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cst {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_escape(cells[i]);
    }
    out_ << "\n";
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing '" + path_ + "'");
}

void write_pgm(const std::string& path, const GrayImage& img, double vmin, double vmax,
               const std::vector<std::string>& meta_lines) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<size_t>(img.width) * img.height)
        throw std::invalid_argument("image dimensions do not match the pixel buffer");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error("failed writing '" + path + "'");

    std::ofstream meta(path + ".meta", std::ios::binary);
    if (!meta) throw std::runtime_error("cannot open '" + path + ".meta' for writing");
    meta << "vmin " << format_double(vmin) << "\n";
    meta << "vmax " << format_double(vmax) << "\n";
    for (const auto& line : meta_lines) meta << line << "\n";
}

namespace {

uint8_t to_gray(double v, double vmin, double vmax) {
    if (!(vmax > vmin)) return 0;
    const double t = std::clamp((v - vmin) / (vmax - vmin), 0.0, 1.0);
    return static_cast<uint8_t>(std::lround(255.0 * t));
}

}  // namespace

RenderedRaster render_mesh_values(const Mesh& mesh, const std::vector<double>& values, int width) {
    if (values.size() != static_cast<size_t>(mesh.size()))
        throw std::invalid_argument("one value per mesh pixel required");
    if (width < 1) throw std::invalid_argument("image width must be >= 1");

    Rect bb{};
    bool first = true;
    for (const auto& p : mesh.pixels) {
        if (first) {
            bb = p.rect;
            first = false;
        } else {
            bb.xmin = std::min(bb.xmin, p.rect.xmin);
            bb.ymin = std::min(bb.ymin, p.rect.ymin);
            bb.xmax = std::max(bb.xmax, p.rect.xmax);
            bb.ymax = std::max(bb.ymax, p.rect.ymax);
        }
    }
    if (first) throw std::invalid_argument("cannot render an empty mesh");

    RenderedRaster r;
    r.vmin = *std::min_element(values.begin(), values.end());
    r.vmax = *std::max_element(values.begin(), values.end());

    const double span_x = bb.xmax - bb.xmin;
    const double span_y = bb.ymax - bb.ymin;
    const int height = std::max(1, static_cast<int>(std::lround(width * span_y / span_x)));
    r.image.width = width;
    r.image.height = height;
    r.image.pixels.assign(static_cast<size_t>(width) * height, 0);

    for (int row = 0; row < height; ++row) {
        const double y = bb.ymax - (row + 0.5) * span_y / height;
        for (int col = 0; col < width; ++col) {
            const double x = bb.xmin + (col + 0.5) * span_x / width;
            for (const auto& p : mesh.pixels) {
                if (x >= p.rect.xmin && x < p.rect.xmax && y >= p.rect.ymin && y < p.rect.ymax) {
                    r.image.pixels[static_cast<size_t>(row) * width + col] =
                        to_gray(values[p.id], r.vmin, r.vmax);
                    break;
                }
            }
        }
    }
    return r;
}

RenderedRaster render_field(const Field& field, int width) {
    if (width < 1) throw std::invalid_argument("image width must be >= 1");
    RenderedRaster r;
    r.vmin = *std::min_element(field.values.begin(), field.values.end());
    r.vmax = *std::max_element(field.values.begin(), field.values.end());

    const double span_x = field.nx * field.cell_size;
    const double span_y = field.ny * field.cell_size;
    const int height = std::max(1, static_cast<int>(std::lround(width * span_y / span_x)));
    r.image.width = width;
    r.image.height = height;
    r.image.pixels.assign(static_cast<size_t>(width) * height, 0);

    for (int row = 0; row < height; ++row) {
        const double y = field.origin.y + span_y - (row + 0.5) * span_y / height;
        for (int col = 0; col < width; ++col) {
            const double x = field.origin.x + (col + 0.5) * span_x / width;
            int i = static_cast<int>(std::floor((x - field.origin.x) / field.cell_size));
            int j = static_cast<int>(std::floor((y - field.origin.y) / field.cell_size));
            i = std::clamp(i, 0, field.nx - 1);
            j = std::clamp(j, 0, field.ny - 1);
            r.image.pixels[static_cast<size_t>(row) * width + col] =
                to_gray(field.value_at(i, j), r.vmin, r.vmax);
        }
    }
    return r;
}

}  // namespace cst
