#include "fiberpeel/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace fiberpeel::kernels {
namespace {

Isa default_isa() {
  if (const char* env = std::getenv("FIBERPEEL_SIMD"); env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

Isa& current() {
  static Isa isa = default_isa();
  return isa;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported;
#else
  return false;
#endif
}

Isa active_isa() { return current(); }

void select_isa(Isa isa) { current() = (isa == Isa::Avx2 && !avx2_supported()) ? Isa::Scalar : isa; }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void accumulate_row(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
                    const ColumnAccumulators& acc, RowResult& out) {
  if (current() == Isa::Avx2)
    row_avx2(law, ax, ay, wa, cols, acc, out);
  else
    row_scalar(law, ax, ay, wa, cols, acc, out);
}

}  // namespace fiberpeel::kernels
