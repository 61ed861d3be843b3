#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fiberpeel/contact.hpp"
#include "fiberpeel/model.hpp"

namespace fiberpeel::output {

inline constexpr const char* kCurveHeader = "step,u_x,u_x_over_l,F_x,F_x_normalized,newton_iters,branch";

struct CurveRecord {
  int step = 0;
  double u_x = 0.0;
  double u_x_over_l = 0.0;
  double f_x = 0.0;
  double f_x_normalized = 0.0;
  int newton_iters = 0;
  model::Branch branch = model::Branch::Contact;
};

/// 17 significant digits, shortest form for integers.
std::string format_number(double v);

void write_curve_csv(const std::vector<CurveRecord>& records, const std::string& path);
/// Throws ValidationError if the header does not match the fixed schema.
std::vector<CurveRecord> read_curve_csv(const std::string& path);
model::Branch parse_branch(const std::string& s);

struct Summary {
  double f_ref = 0.0;
  double u_at_max = 0.0;
  double f_max = 0.0;
  double u_at_min = 0.0;
  double f_min = 0.0;
  double branch_terminus_u = 0.0;
  double mean_newton_iters = 0.0;
  std::optional<double> min_gap_over_r;
  // Additional context.
  std::string scenario;
  std::string branch;
  double f_ref_own = 0.0;  // reference force of the run's own Young's modulus
  double f_max_normalized = 0.0;
  double f_min_normalized = 0.0;
  int n_points = 0;
  bool terminated = false;
  std::string termination_reason;
};

/// Extrema over raw forces; u values are absolute displacements.
Summary summarize(const std::vector<CurveRecord>& records, double f_ref);

void write_summary(const Summary& summary, const std::string& path);
Summary read_summary(const std::string& path);

/// Centerlines as polylines, 10 points per element, point data "fiber_id".
void write_vtk_centerlines(const model::Model& model, const Vector& q, const std::string& path);
/// Gap-sample midpoints with scalar "gap_over_R".
void write_vtk_gaps(const std::vector<contact::GapSample>& samples, double radius, const std::string& path);

inline constexpr int kVtkPointsPerElement = 10;

}  // namespace fiberpeel::output
