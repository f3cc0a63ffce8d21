#include "mssr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mssr/errors.hpp"
#include "mssr/image_io.hpp"
#include "mssr/resize.hpp"
#include "mssr/sample_store.hpp"

namespace mssr {

namespace fs = std::filesystem;

void AugmentSpec::validate() const {
    for (int r : rotations) {
        if (r <= 0 || r >= 360 || r % 90 != 0) {
            throw ArgumentError("augment: rotation " + std::to_string(r) + " is not 90, 180 or 270");
        }
    }
    for (double f : downscale_factors) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw ArgumentError("augment: downscale factor must lie in (0, 1]");
        }
    }
}

void PairSpec::validate() const {
    if (patch_size == 0 || stride != patch_size) {
        throw ArgumentError("pairs: stride must equal a non-zero patch size");
    }
    if (scales.empty()) {
        throw ArgumentError("pairs: no scales given");
    }
    for (int s : scales) {
        if (s < 2) {
            throw ArgumentError("pairs: scale factors must be >= 2");
        }
    }
}

std::string AugmentedImage::label() const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "rot%d_x%.2f", rotation, factor);
    return buf;
}

namespace {

// floor(side * factor), tolerant of products like 30 * 0.7 = 20.999999999999996.
std::size_t scaled_side(std::size_t side, double factor) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(side) * factor + 1e-9));
}

}  // namespace

std::vector<AugmentedImage> augment_variants(const ImagePlane& img, const AugmentSpec& spec) {
    spec.validate();
    std::vector<int> rotations = {0};
    if (spec.rotate) {
        rotations.insert(rotations.end(), spec.rotations.begin(), spec.rotations.end());
    }
    std::vector<double> factors = {1.0};
    if (spec.downscale) {
        for (double f : spec.downscale_factors) {
            if (f != 1.0) factors.push_back(f);
        }
    }

    std::vector<AugmentedImage> out;
    for (int rot : rotations) {
        ImagePlane rotated = rotate90(img, rot / 90);
        for (double f : factors) {
            if (f == 1.0) {
                out.push_back({rotated, rot, f});
                continue;
            }
            const std::size_t h = scaled_side(rotated.height(), f);
            const std::size_t w = scaled_side(rotated.width(), f);
            if (h < spec.min_side || w < spec.min_side) {
                continue;
            }
            out.push_back({bicubic_resize(rotated, h, w), rot, f});
        }
    }
    return out;
}

std::vector<ImagePlane> augment(const ImagePlane& img, const AugmentSpec& spec) {
    std::vector<ImagePlane> out;
    for (auto& v : augment_variants(img, spec)) {
        out.push_back(std::move(v.image));
    }
    return out;
}

ImagePlane degrade(const ImagePlane& hr, int scale) {
    const auto s = static_cast<std::size_t>(scale);
    if (scale < 1 || hr.height() % s != 0 || hr.width() % s != 0) {
        throw ArgumentError("degrade: image sides must be multiples of the scale");
    }
    const ImagePlane lr = bicubic_resize(hr, hr.height() / s, hr.width() / s);
    return bicubic_resize(lr, hr.height(), hr.width());
}

std::vector<TrainSample> make_pairs(const ImagePlane& hr, const PairSpec& spec) {
    spec.validate();
    const std::size_t P = spec.patch_size;
    std::vector<TrainSample> out;
    for (int scale : spec.scales) {
        const auto s = static_cast<std::size_t>(scale);
        if (hr.height() < s || hr.width() < s) {
            continue;
        }
        const ImagePlane y = modcrop(hr, s);
        const std::size_t rows = y.height() / P;
        const std::size_t cols = y.width() / P;
        if (rows == 0 || cols == 0) {
            continue;
        }
        const ImagePlane x = degrade(y, scale);
        for (std::size_t ty = 0; ty < rows; ++ty) {
            for (std::size_t tx = 0; tx < cols; ++tx) {
                TrainSample sample{ImagePlane(P, P), ImagePlane(P, P), scale};
                for (std::size_t i = 0; i < P; ++i) {
                    for (std::size_t j = 0; j < P; ++j) {
                        const double xv = x(ty * P + i, tx * P + j);
                        sample.x(i, j) = xv;
                        sample.r(i, j) = y(ty * P + i, tx * P + j) - xv;
                    }
                }
                out.push_back(std::move(sample));
            }
        }
    }
    return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && has_image_extension(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

BuildReport build_training_set(const std::vector<fs::path>& dirs, const AugmentSpec& augment_spec,
                               const PairSpec& pair_spec, std::uint64_t seed, const fs::path& out_store,
                               std::ostream* log) {
    augment_spec.validate();
    pair_spec.validate();
    if (dirs.empty()) {
        throw ArgumentError("build_training_set: no input directories");
    }
    std::vector<fs::path> files;
    for (const auto& dir : dirs) {
        auto listed = list_images(dir);
        files.insert(files.end(), listed.begin(), listed.end());
    }

    struct PerImage {
        std::vector<SampleRecord> records;
        std::vector<TrainSample> samples;
        std::string error;
    };
    std::vector<PerImage> results(files.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < files.size(); ++i) {
        PerImage& res = results[i];
        try {
            const ImagePlane y = luminance_of(read_image(files[i]));
            for (auto& variant : augment_variants(y, augment_spec)) {
                auto pairs = make_pairs(variant.image, pair_spec);
                std::map<int, std::size_t> index_in_scale;
                for (auto& p : pairs) {
                    res.records.push_back({files[i].string(), variant.label(), p.scale, index_in_scale[p.scale]++});
                    res.samples.push_back(std::move(p));
                }
            }
        } catch (const std::exception& e) {
            res.records.clear();
            res.samples.clear();
            res.error = e.what();
        }
    }

    BuildReport report;
    report.images_found = files.size();
    SampleStore store;
    store.patch_size = pair_spec.patch_size;
    store.seed = seed;
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto& res = results[i];
        if (!res.error.empty()) {
            ++report.warnings;
            if (log) {
                *log << "warning: skipping " << files[i].string() << ": " << res.error << '\n';
            }
            continue;
        }
        ++report.images_used;
        for (std::size_t k = 0; k < res.samples.size(); ++k) {
            ++report.samples_per_scale[res.samples[k].scale];
            store.records.push_back(std::move(res.records[k]));
            store.samples.push_back(std::move(res.samples[k]));
        }
    }
    if (report.images_used == 0) {
        throw DatasetError("no usable images found in the given directories");
    }
    report.total_samples = store.samples.size();
    write_sample_store(out_store, store);
    return report;
}

std::vector<BenchmarkPair> load_benchmark(const fs::path& dir, int scale, std::ostream* log) {
    if (scale < 2 || scale > 4) {
        throw ArgumentError("load_benchmark: scale must be 2, 3 or 4");
    }
    std::vector<BenchmarkPair> out;
    for (const auto& file : list_images(dir)) {
        try {
            const ImagePlane y = modcrop(luminance_of(read_image(file)), static_cast<std::size_t>(scale));
            out.push_back({file.filename().string(), degrade(y, scale), y});
        } catch (const std::exception& e) {
            if (log) {
                *log << "warning: skipping " << file.string() << ": " << e.what() << '\n';
            }
        }
    }
    if (out.empty()) {
        throw DatasetError("no usable benchmark images in " + dir.string());
    }
    return out;
}

}  // namespace mssr
