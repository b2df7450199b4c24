#include "relievo/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace relievo {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'I', 'E', 'V', 'O', '1'};
constexpr int kFormatVersion = 1;

void write_doubles(std::ofstream& out, const real* v, size_t n) {
#ifdef RELIEVO_SINGLE
    std::vector<double> tmp(v, v + n);
    out.write(reinterpret_cast<const char*>(tmp.data()), n * sizeof(double));
#else
    out.write(reinterpret_cast<const char*>(v), n * sizeof(double));
#endif
}

void read_doubles(std::ifstream& in, real* v, size_t n) {
#ifdef RELIEVO_SINGLE
    std::vector<double> tmp(n);
    in.read(reinterpret_cast<char*>(tmp.data()), n * sizeof(double));
    for (size_t i = 0; i < n; ++i) v[i] = static_cast<real>(tmp[i]);
#else
    in.read(reinterpret_cast<char*>(v), n * sizeof(double));
#endif
}

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a relievo checkpoint: " + path);
    uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    std::string hdr(len, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
    nlohmann::json j = nlohmann::json::parse(hdr);
    if (j.value("version", 0) != kFormatVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path +
                                 " (expected " + std::to_string(kFormatVersion) + ")");
    return j;
}

CheckpointInfo info_from(const nlohmann::json& j) {
    CheckpointInfo info;
    info.adam_step = j.value("adam_step", 0L);
    info.has_moments = j.value("has_moments", false);
    if (j.contains("extra"))
        for (auto& [key, val] : j.at("extra").items()) info.extra[key] = val.get<std::string>();
    return info;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params, const Adam* optimizer,
                     const std::map<std::string, std::string>& extra) {
    nlohmann::json j;
    j["version"] = kFormatVersion;
    j["has_moments"] = optimizer != nullptr;
    j["adam_step"] = optimizer ? optimizer->step_count() : 0L;
    j["extra"] = extra;
    auto tensors = nlohmann::json::array();
    for (int i = 0; i < params.count(); ++i)
        tensors.push_back({{"name", params[i].name}, {"rows", params[i].rows},
                           {"cols", params[i].cols}});
    j["tensors"] = tensors;
    const std::string hdr = j.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    const uint64_t len = hdr.size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (int i = 0; i < params.count(); ++i)
        write_doubles(out, params[i].v.data(), params[i].size());
    if (optimizer) {
        auto& opt = *const_cast<Adam*>(optimizer);
        for (int i = 0; i < params.count(); ++i)
            write_doubles(out, opt.moments1()[i].data(), opt.moments1()[i].size());
        for (int i = 0; i < params.count(); ++i)
            write_doubles(out, opt.moments2()[i].data(), opt.moments2()[i].size());
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

CheckpointInfo load_checkpoint(const std::string& path, ParamStore& params) {
    if (params.count() != 0) throw std::runtime_error("load_checkpoint: param store not empty");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j = read_header(in, path);
    for (const auto& t : j.at("tensors")) {
        int id = params.add(t.at("name").get<std::string>(), t.at("rows").get<int>(),
                            t.at("cols").get<int>());
        read_doubles(in, params[id].v.data(), params[id].size());
    }
    if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
    return info_from(j);
}

void restore_optimizer(const std::string& path, Adam& optimizer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j = read_header(in, path);
    if (!j.value("has_moments", false))
        throw std::runtime_error("checkpoint has no optimizer state: " + path);
    // skip over the value payload
    size_t total = 0;
    size_t count = 0;
    for (const auto& t : j.at("tensors")) {
        total += static_cast<size_t>(t.at("rows").get<int>()) * t.at("cols").get<int>();
        ++count;
    }
    in.seekg(static_cast<std::streamoff>(total * sizeof(double)), std::ios::cur);
    if (optimizer.moments1().size() != count)
        throw std::runtime_error("optimizer shape mismatch restoring " + path);
    for (auto& m : optimizer.moments1()) read_doubles(in, m.data(), m.size());
    for (auto& m : optimizer.moments2()) read_doubles(in, m.data(), m.size());
    if (!in) throw std::runtime_error("truncated optimizer state: " + path);
    optimizer.set_step_count(j.value("adam_step", 0L));
}

CheckpointInfo peek_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return info_from(read_header(in, path));
}

}  // namespace relievo
