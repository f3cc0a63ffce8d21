#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mssr/dataset.hpp"

namespace mssr {

/// A sample store is a directory holding two files:
///
/// manifest.txt   line 1: "# mssr-samples v1 patch=<P> count=<N> seed=<S>"
///                line 2: "index\tsource\tvariant\tscale\tpatch"
///                then one tab-separated row per sample, in store order.
/// samples.bin    N fixed-size records: u8 scale, then P*P little-endian f32
///                values of x, then P*P of r (row-major).
inline constexpr const char* kManifestName = "manifest.txt";
inline constexpr const char* kSamplesName = "samples.bin";

struct SampleStore {
    std::size_t patch_size = 41;
    std::uint64_t seed = 0;
    std::vector<SampleRecord> records;
    std::vector<TrainSample> samples;
};

void write_sample_store(const std::filesystem::path& dir, const SampleStore& store);

/// Throws IoError if the files are missing, FormatError on any mismatch
/// between manifest and payload.
SampleStore read_sample_store(const std::filesystem::path& dir);

}  // namespace mssr
