#include <stdexcept>

#include "relievo/kernels.hpp"

namespace relievo::kern {
namespace {

const Backend* g_active = nullptr;

const Backend* pick_auto() {
    if (const Backend* v = avx2_backend()) return v;
    return &scalar_backend();
}

}  // namespace

const Backend& active() {
    if (!g_active) g_active = pick_auto();
    return *g_active;
}

void force_backend(const std::string& name) {
    if (name == "auto") {
        g_active = pick_auto();
    } else if (name == "scalar") {
        g_active = &scalar_backend();
    } else if (name == "avx2") {
        const Backend* v = avx2_backend();
        if (!v) throw std::runtime_error("avx2 backend not available on this host");
        g_active = v;
    } else {
        throw std::runtime_error("unknown kernel backend: " + name);
    }
}

}  // namespace relievo::kern
