#include "fiberpeel/kernels.hpp"

#include "kernel_row_scalar.hpp"

namespace fiberpeel::kernels {

void row_scalar(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
                const ColumnAccumulators& acc, RowResult& out) {
  out = RowResult{};
  detail::row_scalar_range(law, ax, ay, wa, cols, acc, out, 0, cols.count);
}

}  // namespace fiberpeel::kernels
