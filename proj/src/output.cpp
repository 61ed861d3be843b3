#include "fiberpeel/output.hpp"

#include <json.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fiberpeel/errors.hpp"
#include "fiberpeel/hermite.hpp"

namespace fiberpeel::output {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

model::Branch parse_branch(const std::string& s) {
  if (s == "contact") return model::Branch::Contact;
  if (s == "separated") return model::Branch::Separated;
  if (s == "unstable") return model::Branch::Unstable;
  throw ValidationError("unknown branch label '" + s + "'", "branch");
}

void write_curve_csv(const std::vector<CurveRecord>& records, const std::string& path) {
  auto out = open_out(path);
  out << kCurveHeader << '\n';
  for (const auto& r : records)
    out << r.step << ',' << format_number(r.u_x) << ',' << format_number(r.u_x_over_l) << ','
        << format_number(r.f_x) << ',' << format_number(r.f_x_normalized) << ',' << r.newton_iters << ','
        << model::to_string(r.branch) << '\n';
}

std::vector<CurveRecord> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) throw ValidationError("curve header mismatch", path);
  std::vector<CurveRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw ValidationError("malformed curve row: " + line, path);
    CurveRecord r;
    r.step = std::stoi(f[0]);
    r.u_x = std::stod(f[1]);
    r.u_x_over_l = std::stod(f[2]);
    r.f_x = std::stod(f[3]);
    r.f_x_normalized = std::stod(f[4]);
    r.newton_iters = std::stoi(f[5]);
    r.branch = parse_branch(f[6]);
    out.push_back(r);
  }
  return out;
}

Summary summarize(const std::vector<CurveRecord>& records, double f_ref) {
  Summary s;
  s.f_ref = f_ref;
  s.f_ref_own = f_ref;
  s.n_points = static_cast<int>(records.size());
  if (records.empty()) return s;
  std::size_t imax = 0, imin = 0;
  double iters = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].f_x > records[imax].f_x) imax = i;
    if (records[i].f_x < records[imin].f_x) imin = i;
    iters += records[i].newton_iters;
  }
  s.u_at_max = records[imax].u_x;
  s.f_max = records[imax].f_x;
  s.f_max_normalized = records[imax].f_x_normalized;
  s.u_at_min = records[imin].u_x;
  s.f_min = records[imin].f_x;
  s.f_min_normalized = records[imin].f_x_normalized;
  s.branch_terminus_u = records.back().u_x;
  s.mean_newton_iters = iters / static_cast<double>(records.size());
  return s;
}

void write_summary(const Summary& s, const std::string& path) {
  nlohmann::ordered_json j;
  j["F_ref"] = s.f_ref;
  j["u_at_max"] = s.u_at_max;
  j["F_max"] = s.f_max;
  j["u_at_min"] = s.u_at_min;
  j["F_min"] = s.f_min;
  j["branch_terminus_u"] = s.branch_terminus_u;
  j["mean_newton_iters"] = s.mean_newton_iters;
  j["min_gap_over_R"] = s.min_gap_over_r ? nlohmann::ordered_json(*s.min_gap_over_r) : nullptr;
  j["scenario"] = s.scenario;
  j["branch"] = s.branch;
  j["F_ref_own"] = s.f_ref_own;
  j["F_max_normalized"] = s.f_max_normalized;
  j["F_min_normalized"] = s.f_min_normalized;
  j["n_points"] = s.n_points;
  j["terminated"] = s.terminated;
  j["termination_reason"] = s.termination_reason;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Summary read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  const auto j = nlohmann::json::parse(in);
  Summary s;
  s.f_ref = j.at("F_ref");
  s.u_at_max = j.at("u_at_max");
  s.f_max = j.at("F_max");
  s.u_at_min = j.at("u_at_min");
  s.f_min = j.at("F_min");
  s.branch_terminus_u = j.at("branch_terminus_u");
  s.mean_newton_iters = j.at("mean_newton_iters");
  if (!j.at("min_gap_over_R").is_null()) s.min_gap_over_r = j.at("min_gap_over_R").get<double>();
  s.scenario = j.value("scenario", "");
  s.branch = j.value("branch", "");
  s.f_ref_own = j.value("F_ref_own", 0.0);
  s.f_max_normalized = j.value("F_max_normalized", 0.0);
  s.f_min_normalized = j.value("F_min_normalized", 0.0);
  s.n_points = j.value("n_points", 0);
  s.terminated = j.value("terminated", false);
  s.termination_reason = j.value("termination_reason", "");
  return s;
}

void write_vtk_centerlines(const model::Model& model, const Vector& q, const std::string& path) {
  std::vector<Vec2> points;
  std::vector<int> ids;
  std::vector<std::pair<std::size_t, std::size_t>> lines;  // first point, count
  for (int f = 0; f < static_cast<int>(model.fibers().size()); ++f) {
    const auto& mesh = model.fiber(f);
    const std::size_t first = points.size();
    for (int e = 0; e < mesh.n_elements; ++e) {
      const Vec8 qe = model.element_dofs(q, f, e);
      const int count = e + 1 == mesh.n_elements ? kVtkPointsPerElement + 1 : kVtkPointsPerElement;
      for (int k = 0; k < count; ++k) {
        const double xi = -1.0 + 2.0 * k / kVtkPointsPerElement;
        points.push_back(combine(hermite_values(xi, mesh.element_length()), qe));
        ids.push_back(f);
      }
    }
    lines.emplace_back(first, points.size() - first);
  }
  auto out = open_out(path);
  out << "# vtk DataFile Version 4.2\nfiber centerlines\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << points.size() << " double\n";
  for (const auto& p : points) out << format_number(p.x()) << ' ' << format_number(p.y()) << " 0\n";
  std::size_t size = 0;
  for (const auto& l : lines) size += l.second + 1;
  out << "LINES " << lines.size() << ' ' << size << '\n';
  for (const auto& [first, count] : lines) {
    out << count;
    for (std::size_t k = 0; k < count; ++k) out << ' ' << first + k;
    out << '\n';
  }
  out << "POINT_DATA " << points.size() << "\nSCALARS fiber_id int 1\nLOOKUP_TABLE default\n";
  for (int id : ids) out << id << '\n';
}

void write_vtk_gaps(const std::vector<contact::GapSample>& samples, double radius, const std::string& path) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 4.2\ngap samples\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << samples.size() << " double\n";
  for (const auto& s : samples) out << format_number(s.midpoint.x()) << ' ' << format_number(s.midpoint.y()) << " 0\n";
  out << "VERTICES " << samples.size() << ' ' << 2 * samples.size() << '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) out << "1 " << k << '\n';
  out << "POINT_DATA " << samples.size() << "\nSCALARS gap_over_R double 1\nLOOKUP_TABLE default\n";
  for (const auto& s : samples) out << format_number(s.gap / radius) << '\n';
}

}  // namespace fiberpeel::output
