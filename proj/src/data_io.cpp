#include "convexity/data_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "convexity/errors.hpp"
#include "convexity/net.hpp"
#include "convexity/rng.hpp"

namespace cvx::io {

TeacherData gen_teacher(const TeacherSpec& spec) {
    if (!(spec.scale > 0.0)) throw InvalidInput("teacher weight scale must be positive");
    if (spec.noise < 0.0) throw InvalidInput("label noise must be nonnegative");
    if (spec.n < 1) throw InvalidInput("sample count must be at least 1");
    if (!(spec.radius > 0.0)) throw InvalidInput("radius must be positive");

    const Weights teacher =
        Weights::gaussian(spec.teacher, rng::splitmix(spec.seed + 1), spec.scale);

    const int n0 = spec.teacher.width(0);
    Eigen::MatrixXd inputs(n0, spec.n);
    const rng::Stream in_stream(spec.seed, 1);
    for (int i = 0; i < spec.n; ++i)
        for (int d = 0; d < n0; ++d)
            inputs(d, i) = in_stream.normal(static_cast<std::uint64_t>(i) * n0 + d);

    double maxn = 0.0;
    for (int i = 0; i < spec.n; ++i) maxn = std::max(maxn, inputs.col(i).norm());
    if (maxn > 0.0) inputs *= spec.radius / maxn;

    const rng::Stream noise_stream(spec.seed, 2);
    Eigen::VectorXd labels(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        labels(i) = net::forward(spec.teacher, teacher, inputs.col(i));
        if (spec.noise > 0.0)
            labels(i) += spec.noise * noise_stream.normal(static_cast<std::uint64_t>(i));
    }
    return TeacherData{Dataset::from_samples(std::move(inputs), std::move(labels)), teacher};
}

namespace {

double parse_field(const std::string& field, long line) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // Trailing spaces are fine; anything else is not a number.
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) throw ParseError("non-numeric field '" + field + "'", line);
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::vector<std::vector<double>> rows;
    std::string line_text;
    long line = 0;
    std::size_t width = 0;
    while (std::getline(in, line_text)) {
        ++line;
        if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
        if (line == 1 && header) continue;
        if (line_text.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line_text);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(parse_field(field, line));
        if (line_text.back() == ',') throw ParseError("trailing comma", line);
        if (fields.size() < 2) throw ParseError("need at least one feature and a label", line);
        if (width == 0)
            width = fields.size();
        else if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()),
                             line);
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw ParseError("no data rows", line);

    const int n0 = static_cast<int>(width) - 1;
    Eigen::MatrixXd inputs(n0, static_cast<int>(rows.size()));
    Eigen::VectorXd labels(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int d = 0; d < n0; ++d) inputs(d, static_cast<int>(i)) = rows[i][d];
        labels(static_cast<int>(i)) = rows[i][static_cast<std::size_t>(n0)];
    }
    return Dataset::from_samples(std::move(inputs), std::move(labels));
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    char buf[64];
    for (int i = 0; i < data.size(); ++i) {
        for (int d = 0; d < data.input_dim(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", data.input(i)(d));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", data.label(i));
        out << buf << '\n';
    }
}

namespace {

std::uint32_t read_be32(std::ifstream& in, long long offset, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw FormatError(std::string("truncated ") + what, offset);
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, int limit,
                 int target_digit) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open '" + images_path + "'", 0);
    if (read_be32(img, 0, "image magic") != 2051u)
        throw FormatError("image file magic is not 2051", 0);
    const std::uint32_t n_img = read_be32(img, 4, "image count");
    const std::uint32_t rows = read_be32(img, 8, "row count");
    const std::uint32_t cols = read_be32(img, 12, "column count");
    if (n_img == 0 || rows == 0 || cols == 0)
        throw FormatError("image dimensions must be positive", 4);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot open '" + labels_path + "'", 0);
    if (read_be32(lab, 0, "label magic") != 2049u)
        throw FormatError("label file magic is not 2049", 0);
    const std::uint32_t n_lab = read_be32(lab, 4, "label count");
    if (n_lab != n_img) throw FormatError("image/label count mismatch", 4);

    std::uint32_t n = n_img;
    if (limit > 0 && static_cast<std::uint32_t>(limit) < n) n = static_cast<std::uint32_t>(limit);

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    Eigen::MatrixXd inputs(static_cast<int>(dim), static_cast<int>(n));
    std::vector<unsigned char> pixel_row(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        img.read(reinterpret_cast<char*>(pixel_row.data()), static_cast<std::streamsize>(dim));
        if (static_cast<std::size_t>(img.gcount()) != dim)
            throw FormatError("truncated image payload",
                              16 + static_cast<long long>(i) * static_cast<long long>(dim) +
                                  img.gcount());
        for (std::size_t d = 0; d < dim; ++d)
            inputs(static_cast<int>(d), static_cast<int>(i)) = pixel_row[d] / 255.0;
    }

    Eigen::VectorXd labels(static_cast<int>(n));
    for (std::uint32_t i = 0; i < n; ++i) {
        unsigned char v = 0;
        lab.read(reinterpret_cast<char*>(&v), 1);
        if (lab.gcount() != 1)
            throw FormatError("truncated label payload", 8 + static_cast<long long>(i));
        labels(static_cast<int>(i)) = v == target_digit ? 1.0 : 0.0;
    }
    return Dataset::from_samples(std::move(inputs), std::move(labels));
}

Dataset normalize_radius(const Dataset& data, double r_target) {
    if (!(r_target > 0.0)) throw InvalidInput("target radius must be positive");
    const double maxn = data.max_input_norm();
    if (maxn == 0.0) throw InvalidInput("cannot normalize all-zero inputs");
    Eigen::MatrixXd inputs = data.inputs() * (r_target / maxn);
    return Dataset::from_samples(std::move(inputs), data.labels());
}

}  // namespace cvx::io
