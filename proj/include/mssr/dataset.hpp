#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mssr/image.hpp"
#include "mssr/trainer.hpp"

namespace mssr {

struct AugmentSpec {
    bool rotate = true;
    bool downscale = true;
    std::vector<int> rotations = {90, 180, 270};
    std::vector<double> downscale_factors = {0.9, 0.8, 0.7, 0.6};
    /// Downscaled variants with a side below this are dropped.
    std::size_t min_side = 41;

    /// Throws ArgumentError: rotations must be positive multiples of 90 below
    /// 360, factors must lie in (0, 1].
    void validate() const;
};

struct PairSpec {
    std::vector<int> scales = {2, 3, 4};
    std::size_t patch_size = 41;
    /// Must equal patch_size (non-overlapping tiles).
    std::size_t stride = 41;

    void validate() const;
};

struct AugmentedImage {
    ImagePlane image;
    int rotation = 0;     // degrees counter-clockwise
    double factor = 1.0;  // downscale factor
    std::string label() const;
};

/// The original plus each rotation, each at factor 1 and every downscale
/// factor: 4 x 5 = 20 variants with the default spec. Downscaled sizes are
/// floor(side * factor).
std::vector<AugmentedImage> augment_variants(const ImagePlane& img, const AugmentSpec& spec);
std::vector<ImagePlane> augment(const ImagePlane& img, const AugmentSpec& spec);

/// For each scale: modulo-crop, bicubic down by s, bicubic back up to the
/// cropped size giving x, residual r = hr_crop - x, then tile both into
/// aligned non-overlapping patches (row-major tile order).
std::vector<TrainSample> make_pairs(const ImagePlane& hr, const PairSpec& spec);

/// One manifest row per stored sample.
struct SampleRecord {
    std::string source;
    std::string variant;
    int scale = 0;
    std::size_t patch_index = 0;
};

struct BuildReport {
    std::size_t images_found = 0;
    std::size_t images_used = 0;
    std::size_t warnings = 0;
    std::size_t total_samples = 0;
    std::map<int, std::size_t> samples_per_scale;
};

/// Image files (by extension) directly inside `dir`, sorted by filename.
/// Throws IoError if `dir` is not a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Runs augment + make_pairs over every image in `dirs` and writes a sample
/// store to `out_store`. Undecodable files are reported on `log` and skipped.
/// Throws IoError for a missing directory and DatasetError when no image is usable.
BuildReport build_training_set(const std::vector<std::filesystem::path>& dirs, const AugmentSpec& augment_spec,
                               const PairSpec& pair_spec, std::uint64_t seed,
                               const std::filesystem::path& out_store, std::ostream* log = nullptr);

struct BenchmarkPair {
    std::string name;
    ImagePlane x;  // bicubic down/up round trip of y
    ImagePlane y;  // modulo-cropped HR luminance
};

/// Full-image evaluation pairs for one scale, sorted by filename.
std::vector<BenchmarkPair> load_benchmark(const std::filesystem::path& dir, int scale, std::ostream* log = nullptr);

/// Bicubic down-by-`scale` then up-by-`scale` of an image whose sides are
/// multiples of `scale`.
ImagePlane degrade(const ImagePlane& hr, int scale);

}  // namespace mssr
