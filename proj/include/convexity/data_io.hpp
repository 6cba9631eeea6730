#pragma once

#include <cstdint>
#include <string>

#include "convexity/architecture.hpp"
#include "convexity/dataset.hpp"
#include "convexity/weights.hpp"

namespace cvx::io {

/// Teacher-network data generator: Gaussian inputs scaled so the largest
/// input norm equals `radius` exactly, labels from a randomly drawn ReLU
/// teacher plus Gaussian noise.
struct TeacherSpec {
    Architecture teacher;
    double scale = 1.0;   // teacher weight scale, > 0
    double noise = 0.0;   // label noise standard deviation, >= 0
    int n = 0;            // sample count, >= 1
    std::uint64_t seed = 0;
    double radius = 1.0;  // target max input norm, > 0
};

struct TeacherData {
    Dataset data;
    Weights teacher_weights;
};
TeacherData gen_teacher(const TeacherSpec& spec);

/// CSV rows of n0 feature fields followed by one label field. The radius is
/// the maximum row norm. Throws ParseError with the 1-based line number.
Dataset load_csv(const std::string& path, bool header = false);

/// Writes features-then-label rows with 17 significant digits, so a reload
/// is bit-identical.
void write_csv(const Dataset& data, const std::string& path);

/// IDX image/label pair (big-endian magic 2051/2049, dimension sizes, ubyte
/// payload). Pixels land in [0,1]; labels become 1 for `target_digit`, else
/// 0. Throws FormatError with the byte offset. limit <= 0 means all samples.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, int limit = 0,
                 int target_digit = 0);

/// Rescales inputs so the maximum input norm equals r_target; labels are
/// untouched. Throws InvalidInput when all inputs are zero.
Dataset normalize_radius(const Dataset& data, double r_target);

}  // namespace cvx::io
