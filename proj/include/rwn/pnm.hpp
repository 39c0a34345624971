#pragma once

#include <filesystem>

#include "rwn/tensor.hpp"

namespace rwn {

// Binary netpbm, maxval 255 only. Errors surface as FormatError.

ImageTensor read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageTensor& image);

/// Gray level is the class index.
LabelMap read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const LabelMap& labels);

} // namespace rwn
