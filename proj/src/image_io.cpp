#include "mssr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "mssr/color.hpp"
#include "mssr/errors.hpp"
#include "mssr/metrics.hpp"

namespace mssr {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Image from_interleaved(const std::vector<std::uint8_t>& px, std::size_t H, std::size_t W, int channels,
                       double maxval) {
    if (channels == 1) {
        ImagePlane p(H, W);
        for (std::size_t i = 0; i < H * W; ++i) p.values()[i] = px[i] / maxval;
        return p;
    }
    ImagePlane r(H, W), g(H, W), b(H, W);
    for (std::size_t i = 0; i < H * W; ++i) {
        r.values()[i] = px[3 * i] / maxval;
        g.values()[i] = px[3 * i + 1] / maxval;
        b.values()[i] = px[3 * i + 2] / maxval;
    }
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return from_interleaved(px, image.height, image.width, color ? 3 : 1, 255.0);
}

// Netpbm header tokens, skipping '#' comments.
class PnmHeader {
public:
    PnmHeader(const std::vector<std::uint8_t>& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    long next_int(const std::filesystem::path& path) {
        skip_space_and_comments();
        long v = 0;
        bool any = false;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            ++pos_;
            any = true;
            if (v > 1000000000L) break;
        }
        if (!any) {
            throw IoError("malformed netpbm header in " + path.string());
        }
        return v;
    }
    std::size_t pos() const { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_;
};

Image decode_pnm(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    const char kind = static_cast<char>(bytes[1]);
    const int channels = (kind == '3' || kind == '6') ? 3 : 1;
    const bool ascii = kind == '2' || kind == '3';
    PnmHeader hdr(bytes, 2);
    const long W = hdr.next_int(path);
    const long H = hdr.next_int(path);
    const long maxval = hdr.next_int(path);
    if (W < 1 || H < 1 || maxval < 1 || maxval > 255) {
        throw IoError("unsupported netpbm dimensions or maxval in " + path.string());
    }
    const std::size_t count = static_cast<std::size_t>(W) * static_cast<std::size_t>(H) * channels;
    std::vector<std::uint8_t> px(count);
    if (ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = hdr.next_int(path);
            if (v > maxval) throw IoError("netpbm sample exceeds maxval in " + path.string());
            px[i] = static_cast<std::uint8_t>(v);
        }
    } else {
        const std::size_t start = hdr.pos() + 1;  // single whitespace after maxval
        if (start > bytes.size() || bytes.size() - start < count) {
            throw IoError("truncated netpbm data in " + path.string());
        }
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, px.begin());
    }
    return from_interleaved(px, static_cast<std::size_t>(H), static_cast<std::size_t>(W), channels,
                            static_cast<double>(maxval));
}

std::vector<std::uint8_t> interleave(const Image& img, int& channels, std::size_t& H, std::size_t& W) {
    if (const auto* p = std::get_if<ImagePlane>(&img)) {
        channels = 1;
        H = p->height();
        W = p->width();
        return quantize_8bit(*p);
    }
    const auto& rgb = std::get<RgbImage>(img);
    channels = 3;
    H = rgb.height();
    W = rgb.width();
    std::vector<std::uint8_t> px(3 * H * W);
    for (std::size_t i = 0; i < H * W; ++i) {
        px[3 * i] = quantize_8bit(rgb.r.values()[i]);
        px[3 * i + 1] = quantize_8bit(rgb.g.values()[i]);
        px[3 * i + 2] = quantize_8bit(rgb.b.values()[i]);
    }
    return px;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    int channels = 0;
    std::size_t H = 0, W = 0;
    const auto px = interleave(img, channels, H, W);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(W);
    image.height = static_cast<png_uint_32>(H);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, px.data(), 0, nullptr)) {
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

}  // namespace

bool has_image_extension(const std::filesystem::path& path) {
    const auto ext = lower_extension(path);
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

Image read_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
        return decode_png(bytes, path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '3' || bytes[1] == '5' || bytes[1] == '6')) {
        return decode_pnm(bytes, path);
    }
    throw IoError("unrecognized image format: " + path.string());
}

void write_pnm(const std::filesystem::path& path, const Image& img, bool ascii) {
    int channels = 0;
    std::size_t H = 0, W = 0;
    const auto px = interleave(img, channels, H, W);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const char kind = channels == 3 ? (ascii ? '3' : '6') : (ascii ? '2' : '5');
    f << 'P' << kind << '\n' << W << ' ' << H << "\n255\n";
    if (ascii) {
        for (std::size_t i = 0; i < px.size(); ++i) {
            f << static_cast<int>(px[i]) << ((i + 1) % (W * channels) == 0 ? '\n' : ' ');
        }
    } else {
        f.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    }
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

void write_image(const std::filesystem::path& path, const Image& img) {
    const auto ext = lower_extension(path);
    if (ext == ".png") {
        write_png(path, img);
    } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        const bool gray = std::holds_alternative<ImagePlane>(img);
        if ((ext == ".pgm" && !gray) || (ext == ".ppm" && gray)) {
            throw IoError("extension of " + path.string() + " does not match the image channel count");
        }
        write_pnm(path, img, false);
    } else {
        throw IoError("unsupported output image extension: " + path.string());
    }
}

ImagePlane luminance_of(const Image& img) {
    if (const auto* p = std::get_if<ImagePlane>(&img)) {
        return *p;
    }
    return luminance(std::get<RgbImage>(img));
}

}  // namespace mssr
