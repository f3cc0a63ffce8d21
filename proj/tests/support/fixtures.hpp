#pragma once

#include <filesystem>
#include <string>
#include <system_error>
#include <unistd.h>

#include "mssr/image_io.hpp"
#include "oracles.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("mssr_" + tag + "_" + std::to_string(::getpid()));
        std::error_code ec;
        fs::remove_all(path_, ec);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline mssr::RgbImage smooth_rgb(std::size_t h, std::size_t w, std::uint64_t seed) {
    return mssr::RgbImage(oracle::smooth_plane(h, w, seed), oracle::smooth_plane(h, w, seed + 101),
                          oracle::smooth_plane(h, w, seed + 202));
}

// Writes `count` images named img0.png, img1.png, ... with the given sizes.
inline void write_corpus(const fs::path& dir, const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
                         std::uint64_t seed) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto [h, w] = sizes[i];
        mssr::Image img;
        if (i % 2 == 0) {
            img = smooth_rgb(h, w, seed + i);
        } else {
            img = oracle::smooth_plane(h, w, seed + i);
        }
        mssr::write_image(dir / ("img" + std::to_string(i) + ".png"), img);
    }
}

}  // namespace fixture
