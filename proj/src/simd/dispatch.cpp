#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ops_impl.hpp"

namespace rts::simd {

namespace {

bool cpu_has_avx2() {
#if defined(RTS_SPH_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("RTS_SPH_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

Isa& current() {
  static Isa isa = initial_isa();
  return isa;
}

const Ops*& table() {
  static const Ops* t = nullptr;
  return t;
}

}  // namespace

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

const Ops& ops_for(Isa isa) {
#if defined(RTS_SPH_HAVE_AVX2)
  if (isa == Isa::avx2 && cpu_has_avx2()) return detail::avx2_ops();
#endif
  if (isa != Isa::scalar) throw std::invalid_argument("instruction set not available");
  return detail::scalar_ops();
}

const Ops& ops() {
  if (table() == nullptr) table() = &ops_for(current());
  return *table();
}

Isa active_isa() { return current(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("instruction set not available");
  current() = isa;
  table() = &ops_for(isa);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace rts::simd
