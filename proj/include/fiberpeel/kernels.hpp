#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>

namespace fiberpeel::kernels {

enum class LawKind : int { Electrostatic = 0, LennardJones = 1 };

/// Flattened SSIP law consumed by the batch kernels. Built by interaction::make_kernel_law.
struct LawParams {
  LawKind kind = LawKind::Electrostatic;
  double c_elstat = 0.0;    // pi = c_elstat / d
  double c_vdw = 0.0;       // pi = c_vdw * g^(-5/2)
  double c_rep = 0.0;       //    + c_rep * g^(-17/2)
  double radius_sum = 0.0;  // g = d - radius_sum
  double g_reg = -std::numeric_limits<double>::infinity();
  double reg_value = 0.0;  // potential and its first two derivatives at g_reg
  double reg_d1 = 0.0;
  double reg_d2 = 0.0;
  double cutoff_sq = std::numeric_limits<double>::infinity();
};

struct LawEval {
  double value;
  double d1;
  double d2;
};

/// Reference scalar law evaluation as a function of the centroid distance d.
/// The AVX2 path performs the same operations in the same order.
inline LawEval evaluate_law(const LawParams& p, double d) {
  if (p.kind == LawKind::Electrostatic) {
    const double inv = 1.0 / d;
    const double v = p.c_elstat * inv;
    const double d1 = -v * inv;
    return {v, d1, -2.0 * d1 * inv};
  }
  const double g = d - p.radius_sum;
  if (g < p.g_reg) {
    const double delta = g - p.g_reg;
    return {p.reg_value + p.reg_d1 * delta + 0.5 * p.reg_d2 * delta * delta, p.reg_d1 + p.reg_d2 * delta, p.reg_d2};
  }
  const double ig = 1.0 / g;
  const double isq = std::sqrt(ig);
  const double ig2 = ig * ig;
  const double ig4 = ig2 * ig2;
  const double ig8 = ig4 * ig4;
  const double v1 = p.c_vdw * ig2 * isq;
  const double a1 = -2.5 * v1 * ig;
  const double b1 = -3.5 * a1 * ig;
  const double v2 = p.c_rep * ig8 * isq;
  const double a2 = -8.5 * v2 * ig;
  const double b2 = -9.5 * a2 * ig;
  return {v1 + v2, a1 + a2, b1 + b2};
}

/// Gauss points of the second element of a pair, structure-of-arrays.
struct ColumnData {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* w = nullptr;  // weight times Jacobian
  const double* n[4] = {nullptr, nullptr, nullptr, nullptr};
  std::size_t count = 0;
};

/// Per-column sums over rows (already multiplied by the row weight).
struct ColumnAccumulators {
  double* fx = nullptr;
  double* fy = nullptr;
  double* hxx = nullptr;
  double* hxy = nullptr;
  double* hyy = nullptr;
};

/// Row sums over columns (not yet multiplied by the row weight).
/// f = sum_j w_j pi'(d) n_ij, s = sum_j w_j H_ij, t[l] = sum_j N_l(j) w_j H_ij,
/// with H = pi'' n n^T + pi'/d (I - n n^T) and n = (r_a - r_b)/d.
struct RowResult {
  double energy = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  double t[4][3] = {};
};

using RowKernel = void (*)(const LawParams&, double ax, double ay, double wa, const ColumnData&,
                           const ColumnAccumulators&, RowResult&);

void row_scalar(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
                const ColumnAccumulators& acc, RowResult& out);
void row_avx2(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
              const ColumnAccumulators& acc, RowResult& out);

enum class Isa { Scalar, Avx2 };

bool avx2_supported();
/// Currently selected implementation. Defaults to AVX2 when the CPU supports it,
/// unless FIBERPEEL_SIMD=scalar is set in the environment.
Isa active_isa();
/// Forces a kernel; selecting Avx2 on an unsupported CPU falls back to scalar.
void select_isa(Isa isa);
std::string_view isa_name(Isa isa);

void accumulate_row(const LawParams& law, double ax, double ay, double wa, const ColumnData& cols,
                    const ColumnAccumulators& acc, RowResult& out);

}  // namespace fiberpeel::kernels
