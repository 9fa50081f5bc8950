#include "subgcache/kernels.hpp"

#include <atomic>
#include <string>

#include "subgcache/errors.hpp"

namespace subgcache::kernels {
namespace {

std::atomic<const Backend*> g_active{nullptr};

const Backend* pick_default() {
#if defined(SUBGCACHE_HAVE_AVX2)
    if (avx2_supported()) return &avx2_backend();
#endif
    return &scalar_backend();
}

}  // namespace

const Backend& active() {
    const Backend* b = g_active.load(std::memory_order_acquire);
    if (!b) {
        b = pick_default();
        g_active.store(b, std::memory_order_release);
    }
    return *b;
}

void force_backend(std::string_view name) {
    if (name == "auto") {
        g_active.store(pick_default(), std::memory_order_release);
        return;
    }
    if (name == "scalar") {
        g_active.store(&scalar_backend(), std::memory_order_release);
        return;
    }
#if defined(SUBGCACHE_HAVE_AVX2)
    if (name == "avx2") {
        if (!avx2_supported()) throw DomainError("avx2 kernels not supported on this CPU");
        g_active.store(&avx2_backend(), std::memory_order_release);
        return;
    }
#endif
    throw DomainError("unknown kernel backend: " + std::string(name));
}

}  // namespace subgcache::kernels
