#include "topodim/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "topodim/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "NPY reader assumes a little-endian host");

namespace topodim {

FileFormat format_from_string(std::string_view name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "npy") return FileFormat::npy;
    throw std::invalid_argument("unknown file format: " + std::string(name));
}

std::string to_string(FileFormat format) {
    return format == FileFormat::csv ? "csv" : "npy";
}

FileFormat detect_format(const std::filesystem::path& path) {
    return path.extension() == ".npy" ? FileFormat::npy : FileFormat::csv;
}

namespace {

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& reason) {
    throw io_error("failed to load '" + path.string() + "': " + reason);
}

[[noreturn]] void fail_row(const std::filesystem::path& path, std::size_t row,
                           const std::string& reason) {
    throw io_error("failed to load '" + path.string() + "' at row " +
                   std::to_string(row) + ": " + reason);
}

bool parse_field(std::string_view field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = comma == std::string_view::npos
                                     ? line.substr(start)
                                     : line.substr(start, comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                                  field.back() == '\r'))
            field.remove_suffix(1);
        fields.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

PointCloud read_csv_cloud(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open file");

    std::vector<double> data;
    std::size_t columns = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_number = 0;
    bool first_content_line = true;

    while (std::getline(in, line)) {
        ++line_number;
        if (first_content_line && line.size() >= 3 &&
            static_cast<unsigned char>(line[0]) == 0xEF &&
            static_cast<unsigned char>(line[1]) == 0xBB &&
            static_cast<unsigned char>(line[2]) == 0xBF)
            line.erase(0, 3); // UTF-8 BOM
        std::string_view view(line);
        while (!view.empty() && (view.back() == '\r' || view.back() == '\n'))
            view.remove_suffix(1);
        if (view.empty()) continue;

        const auto fields = split_csv_line(view);
        if (first_content_line) {
            first_content_line = false;
            // Header autodetection: a first line with any non-numeric field
            // is treated as a header and skipped.
            bool all_numeric = true;
            for (const auto field : fields) {
                double value;
                if (!parse_field(field, value)) {
                    all_numeric = false;
                    break;
                }
            }
            if (!all_numeric) continue;
        }

        if (columns == 0) {
            columns = fields.size();
        } else if (fields.size() != columns) {
            fail_row(path, line_number,
                     "ragged row: expected " + std::to_string(columns) +
                         " fields, got " + std::to_string(fields.size()));
        }
        for (const auto field : fields) {
            double value;
            if (!parse_field(field, value))
                fail_row(path, line_number,
                         "non-numeric field '" + std::string(field) + "'");
            if (!std::isfinite(value))
                fail_row(path, line_number,
                         "NaN/infinity is not a valid coordinate");
            data.push_back(value);
        }
        ++rows;
    }

    if (rows == 0) fail(path, "no data rows");
    return PointCloud(rows, columns, std::move(data));
}

struct NpyHeader {
    std::size_t item_size = 0; // 4 or 8
    std::vector<std::size_t> shape;
    std::size_t data_offset = 0;
};

NpyHeader read_npy_header(const std::filesystem::path& path,
                          std::ifstream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0)
        fail(path, "malformed header: missing NPY magic bytes");
    if (magic[6] != 1 || magic[7] != 0)
        fail(path, "unsupported NPY version " + std::to_string(magic[6]) +
                       "." + std::to_string(magic[7]) +
                       " (only 1.0 is supported)");

    std::uint16_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), 2);
    if (!in) fail(path, "malformed header: truncated length field");

    std::string dict(header_len, '\0');
    in.read(dict.data(), header_len);
    if (!in) fail(path, "malformed header: truncated dictionary");

    NpyHeader header;
    header.data_offset = 10 + header_len;

    const auto find_value = [&](const std::string& key) -> std::string {
        const std::size_t key_pos = dict.find("'" + key + "'");
        if (key_pos == std::string::npos)
            fail(path, "malformed header: missing key '" + key + "'");
        const std::size_t colon = dict.find(':', key_pos);
        if (colon == std::string::npos)
            fail(path, "malformed header: missing ':' after '" + key + "'");
        std::size_t start = colon + 1;
        while (start < dict.size() && dict[start] == ' ') ++start;
        return dict.substr(start);
    };

    {
        std::string rest = find_value("descr");
        if (rest.empty() || rest[0] != '\'')
            fail(path, "malformed header: descr is not a string");
        const std::size_t close = rest.find('\'', 1);
        const std::string descr = rest.substr(1, close - 1);
        if (descr == "<f8")
            header.item_size = 8;
        else if (descr == "<f4")
            header.item_size = 4;
        else
            fail(path, "unsupported element type '" + descr +
                           "' (need little-endian <f4 or <f8)");
    }
    {
        const std::string rest = find_value("fortran_order");
        if (rest.rfind("False", 0) != 0) {
            if (rest.rfind("True", 0) == 0)
                fail(path, "fortran_order=True is not supported");
            fail(path, "malformed header: fortran_order is not a bool");
        }
    }
    {
        std::string rest = find_value("shape");
        if (rest.empty() || rest[0] != '(')
            fail(path, "malformed header: shape is not a tuple");
        const std::size_t close = rest.find(')');
        if (close == std::string::npos)
            fail(path, "malformed header: unterminated shape tuple");
        std::string tuple = rest.substr(1, close - 1);
        std::stringstream ss(tuple);
        std::string token;
        while (std::getline(ss, token, ',')) {
            std::string trimmed;
            for (char c : token)
                if (c != ' ') trimmed.push_back(c);
            if (trimmed.empty()) continue;
            std::size_t dim = 0;
            const auto [ptr, ec] = std::from_chars(
                trimmed.data(), trimmed.data() + trimmed.size(), dim);
            if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size())
                fail(path, "malformed header: bad shape entry '" + token + "'");
            header.shape.push_back(dim);
        }
    }
    return header;
}

std::vector<double> read_npy_payload(const std::filesystem::path& path,
                                     std::ifstream& in,
                                     const NpyHeader& header,
                                     std::size_t count) {
    std::vector<double> values(count);
    if (header.item_size == 8) {
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(count * 8));
        if (in.gcount() != static_cast<std::streamsize>(count * 8))
            fail(path, "truncated file: payload shorter than the shape "
                       "implies");
    } else {
        std::vector<float> raw(count);
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(count * 4));
        if (in.gcount() != static_cast<std::streamsize>(count * 4))
            fail(path, "truncated file: payload shorter than the shape "
                       "implies");
        for (std::size_t i = 0; i < count; ++i)
            values[i] = static_cast<double>(raw[i]); // exact widening
    }
    char extra;
    if (in.read(&extra, 1))
        fail(path, "trailing bytes after the declared payload");
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::isfinite(values[i]))
            fail_row(path, i / (header.shape.empty() ? 1 : header.shape.back()),
                     "NaN/infinity is not a valid value");
    }
    return values;
}

PointCloud read_npy_cloud(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    const NpyHeader header = read_npy_header(path, in);
    if (header.shape.size() != 2)
        fail(path, "expected a 2-D (n, d) array, got " +
                       std::to_string(header.shape.size()) + " dimensions");
    const std::size_t n = header.shape[0];
    const std::size_t d = header.shape[1];
    if (n == 0 || d == 0) fail(path, "empty array");
    auto values = read_npy_payload(path, in, header, n * d);
    return PointCloud(n, d, std::move(values));
}

void write_npy_raw(const std::filesystem::path& path,
                   std::span<const std::size_t> shape,
                   std::span<const double> data) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        dict += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
        if (i + 1 < shape.size()) dict += " ";
    }
    dict += "), }";
    // Pad so that magic + version + length + dict + '\n' is a multiple of 64.
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t padding = (64 - unpadded % 64) % 64;
    dict.append(padding, ' ');
    dict.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    out.write("\x93NUMPY\x01\x00", 8);
    const auto header_len = static_cast<std::uint16_t>(dict.size());
    out.write(reinterpret_cast<const char*>(&header_len), 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * 8));
    if (!out)
        throw io_error("error writing to '" + path.string() + "'");
}

} // namespace

PointCloud read_embedding_file(const std::filesystem::path& path,
                               FileFormat format) {
    return format == FileFormat::csv ? read_csv_cloud(path)
                                     : read_npy_cloud(path);
}

PointCloud read_embedding_file(const std::filesystem::path& path) {
    return read_embedding_file(path, detect_format(path));
}

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer),
                                         value, std::chars_format::general, 17);
    return std::string(buffer, ptr);
}

void write_cloud_csv(const std::filesystem::path& path,
                     const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t k = 0; k < cloud.dim(); ++k) {
            if (k > 0) out << ',';
            out << format_double(cloud(i, k));
        }
        out << '\n';
    }
    if (!out)
        throw io_error("error writing to '" + path.string() + "'");
}

void write_cloud_npy(const std::filesystem::path& path,
                     const PointCloud& cloud) {
    const std::size_t shape[2] = {cloud.size(), cloud.dim()};
    write_npy_raw(path, shape, cloud.data());
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 FileFormat format) {
    if (format == FileFormat::csv)
        write_cloud_csv(path, cloud);
    else
        write_cloud_npy(path, cloud);
}

Tensor4 read_tensor_npy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    const NpyHeader header = read_npy_header(path, in);
    if (header.shape.size() != 4)
        fail(path, "expected a 4-D (n, h, w, c) array, got " +
                       std::to_string(header.shape.size()) + " dimensions");
    Tensor4 tensor;
    std::size_t count = 1;
    for (std::size_t i = 0; i < 4; ++i) {
        if (header.shape[i] == 0) fail(path, "empty array");
        tensor.shape[i] = header.shape[i];
        count *= header.shape[i];
    }
    tensor.data = read_npy_payload(path, in, header, count);
    return tensor;
}

void write_tensor_npy(const std::filesystem::path& path,
                      const Tensor4& tensor) {
    write_npy_raw(path, tensor.shape, tensor.data);
}

bool npy_is_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    const NpyHeader header = read_npy_header(path, in);
    return header.shape.size() == 4;
}

} // namespace topodim
