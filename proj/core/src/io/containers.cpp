#include "refinder/io/containers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

class Reader {
public:
    Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

    std::size_t offset() const noexcept { return off_; }
    std::size_t remaining() const noexcept { return bytes_.size() - off_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw IngestError(source_ + ": " + what + " at byte offset " + std::to_string(off_));
    }

    void expect_magic(std::string_view magic) {
        if (remaining() < magic.size() || bytes_.substr(off_, magic.size()) != magic)
            fail("bad magic, expected \"" + std::string(magic) + "\"");
        off_ += magic.size();
    }

    std::uint32_t u32(const char* field) {
        if (remaining() < 4) fail(std::string("truncated ") + field);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes_[off_ + static_cast<std::size_t>(i)]);
        off_ += 4;
        return v;
    }

    void floats(std::size_t n, std::vector<float>& out, const char* what) {
        if (n > remaining() / 4) fail(std::string("truncated ") + what + " (need " + std::to_string(n * 4) + " bytes, " +
                                      std::to_string(remaining()) + " left)");
        const std::size_t start = out.size();
        out.resize(start + n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = off_;
            const std::uint32_t bits = u32(what);
            const float f = std::bit_cast<float>(bits);
            if (!std::isfinite(f)) {
                off_ = at;
                fail(std::string("non-finite value in ") + what);
            }
            out[start + i] = f;
        }
    }

    void expect_end() {
        if (remaining() != 0) fail(std::to_string(remaining()) + " trailing bytes");
    }

private:
    std::string_view bytes_;
    const std::string& source_;
    std::size_t off_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffu) throw ParameterError(std::string(what) + " does not fit in u32");
    return static_cast<std::uint32_t>(v);
}

void put_floats(std::string& out, std::span<const float> values) {
    for (float f : values) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IngestError("write to '" + path.string() + "' failed");
}

DescriptorBlock parse_descriptors(std::string_view bytes, const std::string& source) {
    Reader r(bytes, source);
    r.expect_magic(kDescriptorMagic);
    DescriptorBlock block;
    block.count = r.u32("count");
    block.dim = r.u32("dim");
    if (block.dim == 0 && block.count > 0) r.fail("zero descriptor dimension");
    block.values.reserve(std::min(block.count * block.dim, r.remaining() / 4));
    r.floats(block.count * block.dim, block.values, "descriptor data");
    r.expect_end();
    return block;
}

DescriptorBlock read_descriptors(const std::filesystem::path& path) {
    return parse_descriptors(read_file_bytes(path), path.string());
}

std::string encode_descriptors(const DescriptorBlock& block) {
    if (block.values.size() != block.count * block.dim)
        throw ParameterError("descriptor block holds the wrong number of values");
    std::string out(kDescriptorMagic);
    put_u32(out, checked_u32(block.count, "count"));
    put_u32(out, checked_u32(block.dim, "dim"));
    put_floats(out, block.values);
    return out;
}

void write_descriptors(const std::filesystem::path& path, const DescriptorBlock& block) {
    write_file_bytes(path, encode_descriptors(block));
}

std::vector<FeatureMap> parse_feature_maps(std::string_view bytes, const std::string& source) {
    Reader r(bytes, source);
    r.expect_magic(kFeatureMapMagic);
    const std::uint32_t count = r.u32("count");
    std::vector<FeatureMap> maps;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t at = r.offset();
        const std::size_t h = r.u32("height");
        const std::size_t w = r.u32("width");
        const std::size_t c = r.u32("channels");
        if (h == 0 || w == 0 || c == 0)
            throw IngestError(source + ": feature map " + std::to_string(i) + " has a zero extent at byte offset " +
                              std::to_string(at));
        std::vector<float> data;
        r.floats(h * w * c, data, "feature map data");
        maps.emplace_back(h, w, c, std::move(data));
    }
    r.expect_end();
    return maps;
}

std::vector<FeatureMap> read_feature_maps(const std::filesystem::path& path) {
    return parse_feature_maps(read_file_bytes(path), path.string());
}

std::string encode_feature_maps(std::span<const FeatureMap> maps) {
    std::string out(kFeatureMapMagic);
    put_u32(out, checked_u32(maps.size(), "count"));
    for (const FeatureMap& fm : maps) {
        put_u32(out, checked_u32(fm.height(), "height"));
        put_u32(out, checked_u32(fm.width(), "width"));
        put_u32(out, checked_u32(fm.channels(), "channels"));
        put_floats(out, fm.data());
    }
    return out;
}

void write_feature_maps(const std::filesystem::path& path, std::span<const FeatureMap> maps) {
    write_file_bytes(path, encode_feature_maps(maps));
}

}  // namespace refinder
