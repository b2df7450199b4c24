#include "relievo/image.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace relievo {

uint8_t quantize8(real v) {
    real c = v < 0 ? 0 : (v > 1 ? real(1) : v);
    return static_cast<uint8_t>(std::lround(double(c) * 255.0));
}

namespace {

void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
    buf.push_back(static_cast<uint8_t>(v >> 24));
    buf.push_back(static_cast<uint8_t>(v >> 16));
    buf.push_back(static_cast<uint8_t>(v >> 8));
    buf.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& data) {
    std::vector<uint8_t> hdr;
    put_u32(hdr, static_cast<uint32_t>(data.size()));
    out.write(reinterpret_cast<const char*>(hdr.data()), 4);
    uint8_t typed[4];
    std::memcpy(typed, type, 4);
    out.write(reinterpret_cast<const char*>(typed), 4);
    if (!data.empty()) out.write(reinterpret_cast<const char*>(data.data()), data.size());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, typed, 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    std::vector<uint8_t> crcb;
    put_u32(crcb, static_cast<uint32_t>(crc));
    out.write(reinterpret_cast<const char*>(crcb.data()), 4);
}

constexpr uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

}  // namespace

void save_png(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::runtime_error("save_png: only gray or RGB images");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write PNG: " + path);
    out.write(reinterpret_cast<const char*>(kSig), 8);

    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(img.width));
    put_u32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);           // gray / truecolor
    ihdr.push_back(0);                                   // compression
    ihdr.push_back(0);                                   // filter
    ihdr.push_back(0);                                   // interlace
    write_chunk(out, "IHDR", ihdr);

    // raw scanlines, filter type 0 per row
    const size_t stride = static_cast<size_t>(img.width) * img.channels;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) raw.push_back(quantize8(img.at(x, y)[c]));
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("PNG deflate failed: " + path);
    comp.resize(comp_len);
    write_chunk(out, "IDAT", comp);
    write_chunk(out, "IEND", {});
    if (!out) throw std::runtime_error("failed writing PNG: " + path);
}

Image load_png(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open PNG: " + path);
    std::vector<uint8_t> file((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (file.size() < 8 || std::memcmp(file.data(), kSig, 8) != 0)
        throw std::runtime_error("not a PNG file: " + path);

    int width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<uint8_t> idat;
    size_t pos = 8;
    while (pos + 8 <= file.size()) {
        uint32_t len = get_u32(&file[pos]);
        const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
        const uint8_t* data = &file[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            width = static_cast<int>(get_u32(data));
            height = static_cast<int>(get_u32(data + 4));
            bit_depth = data[8];
            int color = data[9];
            if (bit_depth != 8 || (color != 0 && color != 2) || data[12] != 0)
                throw std::runtime_error("unsupported PNG variant: " + path);
            channels = color == 0 ? 1 : 3;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (width <= 0 || height <= 0) throw std::runtime_error("bad PNG header: " + path);

    const size_t stride = static_cast<size_t>(width) * channels;
    std::vector<uint8_t> raw((stride + 1) * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw std::runtime_error("PNG inflate failed: " + path);

    // undo per-row filters
    const int bpp = channels;
    std::vector<uint8_t> prev(stride, 0);
    Image img(width, height, channels);
    for (int y = 0; y < height; ++y) {
        uint8_t filter = raw[(stride + 1) * y];
        uint8_t* row = &raw[(stride + 1) * y + 1];
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<size_t>(bpp) ? row[i - bpp] : 0;
            int b = prev[i];
            int c = i >= static_cast<size_t>(bpp) ? prev[i - bpp] : 0;
            int x = row[i];
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: {
                    int p = a + b - c;
                    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    x += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
                    break;
                }
                default: throw std::runtime_error("bad PNG filter: " + path);
            }
            row[i] = static_cast<uint8_t>(x);
        }
        std::memcpy(prev.data(), row, stride);
        for (int xpx = 0; xpx < width; ++xpx)
            for (int ch = 0; ch < channels; ++ch)
                img.at(xpx, y)[ch] = row[static_cast<size_t>(xpx) * channels + ch] / real(255);
    }
    return img;
}

}  // namespace relievo
