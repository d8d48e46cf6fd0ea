#include "uhmc/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace uhmc::simd {

const Kernels* avx2_kernels_impl();  // defined in kernels_avx2.cpp

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return avx2_kernels_impl() != nullptr && __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Kernels* kernels_by_name(std::string_view name) {
    if (name == "scalar") return &scalar_kernels();
    if (name == "avx2" && avx2_available()) return avx2_kernels_impl();
    return nullptr;
}

namespace {
const Kernels* select() {
    if (const char* env = std::getenv("UHMC_KERNELS")) {
        if (const Kernels* k = kernels_by_name(env)) return k;
    }
    if (avx2_available()) return avx2_kernels_impl();
    return &scalar_kernels();
}
}  // namespace

const Kernels& active() {
    static const Kernels* k = select();
    return *k;
}

}  // namespace uhmc::simd
