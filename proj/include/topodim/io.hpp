// Point-cloud and tensor file I/O.
//
// CSV dialect: comma-separated, '.' decimal, optional single header row
// (autodetected), UTF-8. NPY subset: version 1.0, little-endian 4- or
// 8-byte floats, row-major ('fortran_order': False); clouds are 2-D
// (n, d), feature-map tensors 4-D (n, h, w, c).
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "topodim/geometry.hpp"

namespace topodim {

enum class FileFormat { csv, npy };

FileFormat format_from_string(std::string_view name);
std::string to_string(FileFormat format);

// Picks by extension (".npy" -> npy, anything else -> csv).
FileFormat detect_format(const std::filesystem::path& path);

// Loads a 2-D cloud. Failures (missing file, malformed header, ragged
// rows, non-numeric fields, unsupported element type, NaN/infinity) throw
// io_error naming the file, row and reason.
PointCloud read_embedding_file(const std::filesystem::path& path,
                               FileFormat format);
PointCloud read_embedding_file(const std::filesystem::path& path);

void write_cloud_csv(const std::filesystem::path& path,
                     const PointCloud& cloud);
void write_cloud_npy(const std::filesystem::path& path,
                     const PointCloud& cloud);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 FileFormat format);

// Dense row-major n x h x w x c tensor (channels last).
struct Tensor4 {
    std::array<std::size_t, 4> shape{0, 0, 0, 0};
    std::vector<double> data;

    double operator()(std::size_t s, std::size_t y, std::size_t x,
                      std::size_t ch) const {
        return data[((s * shape[1] + y) * shape[2] + x) * shape[3] + ch];
    }
};

Tensor4 read_tensor_npy(const std::filesystem::path& path);
void write_tensor_npy(const std::filesystem::path& path,
                      const Tensor4& tensor);

// Whether an NPY file holds a 4-D array (for sources that need pooling).
bool npy_is_tensor(const std::filesystem::path& path);

// Locale-independent, lossless (17 significant digit) rendering used by
// every CSV emitter.
std::string format_double(double value);

} // namespace topodim
