#include "fiberpeel/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define FIBERPEEL_HAVE_X86 1
#endif

#include "kernel_row_scalar.hpp"

namespace fiberpeel::kernels {

#if defined(FIBERPEEL_HAVE_X86)

namespace {

struct LawLanes {
  __m256d value;
  __m256d d1;
  __m256d d2;
};

__attribute__((target("avx2"))) inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

__attribute__((target("avx2"))) inline void bump(double* p, __m256d wa, __m256d v, __m256d mask) {
  _mm256_storeu_pd(p, _mm256_add_pd(_mm256_loadu_pd(p), _mm256_and_pd(_mm256_mul_pd(wa, v), mask)));
}

__attribute__((target("avx2"))) inline LawLanes law_lanes(const LawParams& p, __m256d d) {
  const __m256d one = _mm256_set1_pd(1.0);
  if (p.kind == LawKind::Electrostatic) {
    const __m256d inv = _mm256_div_pd(one, d);
    const __m256d v = _mm256_mul_pd(_mm256_set1_pd(p.c_elstat), inv);
    const __m256d d1 = _mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), v), inv);
    const __m256d d2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), d1), inv);
    return {v, d1, d2};
  }
  const __m256d g = _mm256_sub_pd(d, _mm256_set1_pd(p.radius_sum));
  const __m256d ig = _mm256_div_pd(one, g);
  const __m256d isq = _mm256_sqrt_pd(ig);
  const __m256d ig2 = _mm256_mul_pd(ig, ig);
  const __m256d ig4 = _mm256_mul_pd(ig2, ig2);
  const __m256d ig8 = _mm256_mul_pd(ig4, ig4);
  const __m256d v1 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(p.c_vdw), ig2), isq);
  const __m256d a1 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-2.5), v1), ig);
  const __m256d b1 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-3.5), a1), ig);
  const __m256d v2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(p.c_rep), ig8), isq);
  const __m256d a2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-8.5), v2), ig);
  const __m256d b2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(-9.5), a2), ig);
  LawLanes raw{_mm256_add_pd(v1, v2), _mm256_add_pd(a1, a2), _mm256_add_pd(b1, b2)};
  if (!(p.g_reg > -std::numeric_limits<double>::infinity())) return raw;

  const __m256d greg = _mm256_set1_pd(p.g_reg);
  const __m256d below = _mm256_cmp_pd(g, greg, _CMP_LT_OQ);
  if (_mm256_movemask_pd(below) == 0) return raw;
  const __m256d delta = _mm256_sub_pd(g, greg);
  const __m256d rd1 = _mm256_set1_pd(p.reg_d1);
  const __m256d rd2 = _mm256_set1_pd(p.reg_d2);
  const __m256d rv = _mm256_add_pd(
      _mm256_add_pd(_mm256_set1_pd(p.reg_value), _mm256_mul_pd(rd1, delta)),
      _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), rd2), delta), delta));
  const __m256d rf = _mm256_add_pd(rd1, _mm256_mul_pd(rd2, delta));
  return {_mm256_blendv_pd(raw.value, rv, below), _mm256_blendv_pd(raw.d1, rf, below),
          _mm256_blendv_pd(raw.d2, rd2, below)};
}

}  // namespace

__attribute__((target("avx2"))) void row_avx2(const LawParams& law, double ax, double ay, double wa,
                                              const ColumnData& cols, const ColumnAccumulators& acc,
                                              RowResult& out) {
  out = RowResult{};
  const std::size_t n4 = cols.count & ~std::size_t{3};
  const __m256d vax = _mm256_set1_pd(ax);
  const __m256d vay = _mm256_set1_pd(ay);
  const __m256d vwa = _mm256_set1_pd(wa);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d cutoff = _mm256_set1_pd(law.cutoff_sq);
  __m256d energy = _mm256_setzero_pd();
  __m256d fx = _mm256_setzero_pd();
  __m256d fy = _mm256_setzero_pd();
  __m256d sxx = _mm256_setzero_pd();
  __m256d sxy = _mm256_setzero_pd();
  __m256d syy = _mm256_setzero_pd();
  __m256d t[4][3];
  for (auto& row : t)
    for (auto& v : row) v = _mm256_setzero_pd();

  for (std::size_t j = 0; j < n4; j += 4) {
    const __m256d dx = _mm256_sub_pd(vax, _mm256_loadu_pd(cols.x + j));
    const __m256d dy = _mm256_sub_pd(vay, _mm256_loadu_pd(cols.y + j));
    const __m256d dist_sq = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d inside = _mm256_cmp_pd(dist_sq, cutoff, _CMP_LE_OQ);
    const int lanes = _mm256_movemask_pd(inside);
    if (lanes == 0) continue;
    const __m256d d = _mm256_sqrt_pd(dist_sq);
    const LawLanes e = law_lanes(law, d);
    const __m256d inv_d = _mm256_div_pd(one, d);
    const __m256d nx = _mm256_mul_pd(dx, inv_d);
    const __m256d ny = _mm256_mul_pd(dy, inv_d);
    const __m256d q1 = _mm256_mul_pd(e.d1, inv_d);
    const __m256d nxx = _mm256_mul_pd(nx, nx);
    const __m256d nxy = _mm256_mul_pd(nx, ny);
    const __m256d nyy = _mm256_mul_pd(ny, ny);
    const __m256d hxx = _mm256_add_pd(_mm256_mul_pd(e.d2, nxx), _mm256_mul_pd(q1, _mm256_sub_pd(one, nxx)));
    const __m256d hxy = _mm256_mul_pd(_mm256_sub_pd(e.d2, q1), nxy);
    const __m256d hyy = _mm256_add_pd(_mm256_mul_pd(e.d2, nyy), _mm256_mul_pd(q1, _mm256_sub_pd(one, nyy)));
    // Lanes beyond the cutoff contribute exactly zero.
    const __m256d w = _mm256_and_pd(_mm256_loadu_pd(cols.w + j), inside);
    const __m256d wd1 = _mm256_and_pd(_mm256_mul_pd(w, e.d1), inside);
    const __m256d wfx = _mm256_mul_pd(wd1, nx);
    const __m256d wfy = _mm256_mul_pd(wd1, ny);
    const __m256d whxx = _mm256_and_pd(_mm256_mul_pd(w, hxx), inside);
    const __m256d whxy = _mm256_and_pd(_mm256_mul_pd(w, hxy), inside);
    const __m256d whyy = _mm256_and_pd(_mm256_mul_pd(w, hyy), inside);
    energy = _mm256_add_pd(energy, _mm256_and_pd(_mm256_mul_pd(w, e.value), inside));
    fx = _mm256_add_pd(fx, _mm256_and_pd(wfx, inside));
    fy = _mm256_add_pd(fy, _mm256_and_pd(wfy, inside));
    sxx = _mm256_add_pd(sxx, whxx);
    sxy = _mm256_add_pd(sxy, whxy);
    syy = _mm256_add_pd(syy, whyy);
    for (int l = 0; l < 4; ++l) {
      const __m256d nl = _mm256_loadu_pd(cols.n[l] + j);
      t[l][0] = _mm256_add_pd(t[l][0], _mm256_mul_pd(nl, whxx));
      t[l][1] = _mm256_add_pd(t[l][1], _mm256_mul_pd(nl, whxy));
      t[l][2] = _mm256_add_pd(t[l][2], _mm256_mul_pd(nl, whyy));
    }
    bump(acc.fx + j, vwa, wfx, inside);
    bump(acc.fy + j, vwa, wfy, inside);
    bump(acc.hxx + j, vwa, whxx, inside);
    bump(acc.hxy + j, vwa, whxy, inside);
    bump(acc.hyy + j, vwa, whyy, inside);
  }

  out.energy = hsum(energy);
  out.fx = hsum(fx);
  out.fy = hsum(fy);
  out.sxx = hsum(sxx);
  out.sxy = hsum(sxy);
  out.syy = hsum(syy);
  for (int l = 0; l < 4; ++l)
    for (int c = 0; c < 3; ++c) out.t[l][c] = hsum(t[l][c]);
  detail::row_scalar_range(law, ax, ay, wa, cols, acc, out, n4, cols.count);
}

#else

void row_avx2(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
              const ColumnAccumulators& acc, RowResult& out) {
  row_scalar(law, ax, ay, wa, cols, acc, out);
}

#endif

}  // namespace fiberpeel::kernels
