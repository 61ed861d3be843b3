#pragma once

#include "fiberpeel/kernels.hpp"

namespace fiberpeel::kernels::detail {

// Columns [begin, end) of one row, accumulated into `out`.
inline void row_scalar_range(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
                             const ColumnAccumulators& acc, RowResult& out, std::size_t begin, std::size_t end) {
  for (std::size_t j = begin; j < end; ++j) {
    const double dx = ax - cols.x[j];
    const double dy = ay - cols.y[j];
    const double dist_sq = dx * dx + dy * dy;
    if (!(dist_sq <= law.cutoff_sq)) continue;
    const double d = std::sqrt(dist_sq);
    const LawEval e = evaluate_law(law, d);
    const double inv_d = 1.0 / d;
    const double nx = dx * inv_d;
    const double ny = dy * inv_d;
    const double q1 = e.d1 * inv_d;
    const double nxx = nx * nx;
    const double nxy = nx * ny;
    const double nyy = ny * ny;
    const double hxx = e.d2 * nxx + q1 * (1.0 - nxx);
    const double hxy = (e.d2 - q1) * nxy;
    const double hyy = e.d2 * nyy + q1 * (1.0 - nyy);
    const double w = cols.w[j];
    const double wd1 = w * e.d1;
    const double wfx = wd1 * nx;
    const double wfy = wd1 * ny;
    const double whxx = w * hxx;
    const double whxy = w * hxy;
    const double whyy = w * hyy;
    out.energy += w * e.value;
    out.fx += wfx;
    out.fy += wfy;
    out.sxx += whxx;
    out.sxy += whxy;
    out.syy += whyy;
    for (int l = 0; l < 4; ++l) {
      const double nl = cols.n[l][j];
      out.t[l][0] += nl * whxx;
      out.t[l][1] += nl * whxy;
      out.t[l][2] += nl * whyy;
    }
    acc.fx[j] += wa * wfx;
    acc.fy[j] += wa * wfy;
    acc.hxx[j] += wa * whxx;
    acc.hxy[j] += wa * whxy;
    acc.hyy[j] += wa * whyy;
  }
}

}  // namespace fiberpeel::kernels::detail
