#include "mssr/sample_store.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mssr/errors.hpp"

namespace mssr {

namespace fs = std::filesystem;

namespace {

void put_f32(std::vector<char>& buf, double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
}

double get_f32(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
        bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<float>(bits);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

void write_sample_store(const fs::path& dir, const SampleStore& store) {
    if (store.records.size() != store.samples.size()) {
        throw ArgumentError("write_sample_store: record and sample counts differ");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) {
        throw IoError("cannot create sample store directory " + dir.string());
    }
    const std::size_t P = store.patch_size;

    std::ofstream manifest(dir / kManifestName, std::ios::trunc);
    std::ofstream payload(dir / kSamplesName, std::ios::binary | std::ios::trunc);
    if (!manifest || !payload) {
        throw IoError("cannot write sample store in " + dir.string());
    }
    manifest << "# mssr-samples v1 patch=" << P << " count=" << store.samples.size() << " seed=" << store.seed
             << '\n';
    manifest << "index\tsource\tvariant\tscale\tpatch\n";

    std::vector<char> buf;
    buf.reserve(1 + 8 * P * P);
    for (std::size_t i = 0; i < store.samples.size(); ++i) {
        const auto& rec = store.records[i];
        const auto& s = store.samples[i];
        if (s.x.height() != P || s.x.width() != P || !s.r.same_size(s.x)) {
            throw ShapeError("write_sample_store: sample " + std::to_string(i) + " is not " + std::to_string(P) +
                             "x" + std::to_string(P));
        }
        manifest << i << '\t' << rec.source << '\t' << rec.variant << '\t' << rec.scale << '\t' << rec.patch_index
                 << '\n';
        buf.clear();
        buf.push_back(static_cast<char>(s.scale));
        for (double v : s.x.values()) put_f32(buf, v);
        for (double v : s.r.values()) put_f32(buf, v);
        payload.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    if (!manifest || !payload) {
        throw IoError("failed writing sample store in " + dir.string());
    }
}

SampleStore read_sample_store(const fs::path& dir) {
    std::ifstream manifest(dir / kManifestName);
    std::ifstream payload(dir / kSamplesName, std::ios::binary);
    if (!manifest || !payload) {
        throw IoError("no sample store in " + dir.string());
    }
    std::string line;
    std::getline(manifest, line);
    SampleStore store;
    std::size_t count = 0;
    {
        std::istringstream head(line);
        std::string hash, tag, version, patch, cnt, seed;
        head >> hash >> tag >> version >> patch >> cnt >> seed;
        if (hash != "#" || tag != "mssr-samples" || version != "v1" || patch.rfind("patch=", 0) != 0 ||
            cnt.rfind("count=", 0) != 0 || seed.rfind("seed=", 0) != 0) {
            throw FormatError("bad sample store manifest header", 0);
        }
        try {
            store.patch_size = std::stoul(patch.substr(6));
            count = std::stoul(cnt.substr(6));
            store.seed = std::stoull(seed.substr(5));
        } catch (const std::exception&) {
            throw FormatError("bad numbers in sample store manifest header", 0);
        }
    }
    std::getline(manifest, line);  // column header

    const std::size_t P = store.patch_size;
    const std::size_t record_bytes = 1 + 8 * P * P;
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(payload)), std::istreambuf_iterator<char>());
    if (bytes.size() != count * record_bytes) {
        throw FormatError("samples.bin holds " + std::to_string(bytes.size()) + " bytes, expected " +
                              std::to_string(count * record_bytes),
                          std::min(bytes.size(), count * record_bytes));
    }

    store.records.reserve(count);
    store.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(manifest, line)) {
            throw FormatError("manifest ends after " + std::to_string(i) + " of " + std::to_string(count) + " rows",
                              i * record_bytes);
        }
        const auto cols = split_tabs(line);
        if (cols.size() != 5) {
            throw FormatError("manifest row " + std::to_string(i) + " has " + std::to_string(cols.size()) +
                                  " columns",
                              i * record_bytes);
        }
        SampleRecord rec{cols[1], cols[2], std::stoi(cols[3]), static_cast<std::size_t>(std::stoul(cols[4]))};
        const unsigned char* p = bytes.data() + i * record_bytes;
        if (static_cast<int>(p[0]) != rec.scale) {
            throw FormatError("scale tag of record " + std::to_string(i) + " disagrees with the manifest",
                              i * record_bytes);
        }
        TrainSample s{ImagePlane(P, P), ImagePlane(P, P), rec.scale};
        const unsigned char* q = p + 1;
        for (double& v : s.x.values()) {
            v = get_f32(q);
            q += 4;
        }
        for (double& v : s.r.values()) {
            v = get_f32(q);
            q += 4;
        }
        store.records.push_back(std::move(rec));
        store.samples.push_back(std::move(s));
    }
    return store;
}

}  // namespace mssr
