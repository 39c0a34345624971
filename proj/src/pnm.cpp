#include "rwn/pnm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "rwn/error.hpp"

namespace rwn {
namespace {

struct PnmHeader {
    int width = 0;
    int height = 0;
};

// Reads the next whitespace-delimited integer, skipping '#' comments.
int read_header_int(std::istream& in, const std::string& path) {
    int ch = in.peek();
    while (ch != EOF) {
        if (std::isspace(ch)) {
            in.get();
        } else if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else {
            break;
        }
        ch = in.peek();
    }
    int value = -1;
    if (!(in >> value) || value < 0)
        throw FormatError(path + ": malformed netpbm header");
    return value;
}

PnmHeader read_header(std::istream& in, const std::string& magic, const std::string& path) {
    char m[2] = {0, 0};
    in.read(m, 2);
    if (!in || std::string(m, 2) != magic)
        throw FormatError(path + ": expected " + magic + " netpbm file");
    PnmHeader h;
    h.width = read_header_int(in, path);
    h.height = read_header_int(in, path);
    const int maxval = read_header_int(in, path);
    if (maxval != 255) throw FormatError(path + ": only maxval 255 is supported");
    if (h.width == 0 || h.height == 0) throw FormatError(path + ": empty image");
    // Exactly one whitespace byte separates the header from the raster.
    if (!std::isspace(in.get())) throw FormatError(path + ": malformed netpbm header");
    return h;
}

std::vector<unsigned char> read_raster(std::istream& in, std::size_t bytes, const std::string& path) {
    std::vector<unsigned char> raster(bytes);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) throw FormatError(path + ": truncated raster");
    return raster;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

ImageTensor read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const auto h = read_header(in, "P6", path.string());
    const auto raster = read_raster(in, static_cast<std::size_t>(h.width) * h.height * 3, path.string());
    ImageTensor image(h.height, h.width, 3);
    for (std::size_t i = 0; i < raster.size(); ++i) image.data[i] = raster[i] / 255.0;
    return image;
}

void write_ppm(const std::filesystem::path& path, const ImageTensor& image) {
    validate_image(image);
    if (image.channels != 3) throw InvalidInput("write_ppm: image must have 3 channels");
    auto out = open_out(path);
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    std::vector<unsigned char> raster(image.data.size());
    for (std::size_t i = 0; i < raster.size(); ++i)
        raster[i] = static_cast<unsigned char>(std::lround(image.data[i] * 255.0));
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

LabelMap read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const auto h = read_header(in, "P5", path.string());
    const auto raster = read_raster(in, static_cast<std::size_t>(h.width) * h.height, path.string());
    LabelMap labels(h.height, h.width);
    for (std::size_t i = 0; i < raster.size(); ++i) labels.labels[i] = raster[i];
    return labels;
}

void write_pgm(const std::filesystem::path& path, const LabelMap& labels) {
    std::vector<unsigned char> raster(labels.num_pixels());
    for (std::size_t i = 0; i < raster.size(); ++i) {
        const auto v = labels.labels[i];
        if (v < 0 || v > 255) throw InvalidInput("write_pgm: label outside [0,255]");
        raster[i] = static_cast<unsigned char>(v);
    }
    auto out = open_out(path);
    out << "P5\n" << labels.width << ' ' << labels.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

} // namespace rwn
