#include "mssr/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mssr/errors.hpp"

namespace mssr {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'S', 'R'};

class Writer {
public:
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v & 0xff));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void f32(float f) {
        const auto v = std::bit_cast<std::uint32_t>(f);
        for (int i = 0; i < 4; ++i) {
            out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
        }
    }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("model file truncated while reading ") + what, pos_);
        }
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    float f32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return std::bit_cast<float>(v);
    }
    std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint16_t to_u16(std::size_t v, const char* what) {
    if (v > 0xffff) {
        throw ArgumentError(std::string("model field ") + what + " does not fit in 16 bits");
    }
    return static_cast<std::uint16_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const MssrModel<float>& model) {
    Writer w;
    w.raw(kMagic, sizeof(kMagic));
    w.u16(kModelFormatVersion);
    w.u16(to_u16(model.config.n_long, "n_long"));
    w.u16(to_u16(model.config.n_short, "n_short"));
    w.u16(to_u16(model.config.n_recon, "n_recon"));
    w.u16(to_u16(model.config.width, "width"));
    for (const auto* l : model.layers()) {
        w.u16(to_u16(l->out_channels, "out_channels"));
        w.u16(to_u16(l->in_channels, "in_channels"));
        for (float v : l->weights) w.f32(v);
        for (float v : l->bias) w.f32(v);
    }
    return w.take();
}

MssrModel<float> decode_model(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    auto magic = r.raw(sizeof(kMagic), "magic");
    if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("bad magic, not an MSSR model file", 0);
    }
    const std::size_t version_at = r.offset();
    const auto version = r.u16("version");
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version), version_at);
    }
    const std::size_t header_at = r.offset();
    ModelConfig cfg;
    cfg.n_long = r.u16("n_long");
    cfg.n_short = r.u16("n_short");
    cfg.n_recon = r.u16("n_recon");
    cfg.width = r.u16("width");
    try {
        cfg.validate();
    } catch (const ArgumentError& e) {
        throw ModelShapeError(std::string("invalid header: ") + e.what(), header_at);
    }

    MssrModel<float> model(cfg);
    std::size_t index = 0;
    for (auto* l : model.layers()) {
        const std::size_t at = r.offset();
        const std::size_t out = r.u16("layer shape");
        const std::size_t in = r.u16("layer shape");
        if (out != l->out_channels || in != l->in_channels) {
            throw ModelShapeError("layer " + std::to_string(index) + " is " + std::to_string(out) + "x" +
                                      std::to_string(in) + " but the header implies " +
                                      std::to_string(l->out_channels) + "x" + std::to_string(l->in_channels),
                                  at);
        }
        r.need(4 * (l->weights.size() + l->bias.size()), "layer parameters");
        for (float& v : l->weights) v = r.f32();
        for (float& v : l->bias) v = r.f32();
        ++index;
    }
    if (!r.at_end()) {
        throw FormatError("trailing bytes after last layer", r.offset());
    }
    return model;
}

void save_model(const MssrModel<float>& model, const std::filesystem::path& path) {
    const auto bytes = encode_model(model);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

void save_model(const MssrModel<double>& model, const std::filesystem::path& path) {
    save_model(model.cast<float>(), path);
}

MssrModel<float> load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open model file " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_model(bytes);
}

}  // namespace mssr
