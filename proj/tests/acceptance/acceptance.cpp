// Runs the preset scenarios end to end and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--out DIR] [A1 A2 ...]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fiberpeel/config.hpp"
#include "fiberpeel/interaction.hpp"
#include "fiberpeel/scenario.hpp"
#include "fiberpeel/verification.hpp"

using namespace fiberpeel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "" : "!") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

fs::path g_out = "acceptance_out";
std::map<std::string, scenario::RunResult> g_runs;

const scenario::RunResult& run_cached(const std::string& key, const config::ScenarioConfig& c, model::Branch b) {
  auto it = g_runs.find(key);
  if (it != g_runs.end()) return it->second;
  scenario::RunOptions o;
  o.out_dir = g_out / key;
  std::fprintf(stderr, "running %s ...\n", key.c_str());
  return g_runs.emplace(key, scenario::run(c, b, o)).first->second;
}

config::ScenarioConfig variant(const std::string& preset, const std::string& name) {
  const auto c = scenario::preset(preset);
  for (const auto& v : c.variants)
    if (v.name == name) return config::apply_variant(c, v);
  throw std::runtime_error("no variant " + name + " in " + preset);
}

const scenario::RunResult& baseline(model::Branch b) {
  return run_cached("elstat-baseline-16/" + model::to_string(b), scenario::preset("elstat-baseline-16"), b);
}

const scenario::RunResult& lj_baseline() {
  return run_cached("lj-baseline-64", scenario::preset("lj-baseline-64"), model::Branch::Contact);
}

struct Curve {
  std::vector<double> u;  // u_x / l
  std::vector<double> f;  // normalized force
};

Curve curve(const scenario::RunResult& r) {
  Curve c;
  for (const auto& rec : r.records) {
    c.u.push_back(rec.u_x_over_l);
    c.f.push_back(rec.f_x_normalized);
  }
  return c;
}

std::size_t argmax_in(const Curve& c, double lo, double hi) {
  std::size_t best = c.u.size();
  for (std::size_t i = 0; i < c.u.size(); ++i)
    if (c.u[i] >= lo && c.u[i] <= hi && (best == c.u.size() || c.f[i] > c.f[best])) best = i;
  return best;
}

std::size_t argmin_in(const Curve& c, double lo, double hi) {
  std::size_t best = c.u.size();
  for (std::size_t i = 0; i < c.u.size(); ++i)
    if (c.u[i] >= lo && c.u[i] <= hi && (best == c.u.size() || c.f[i] < c.f[best])) best = i;
  return best;
}

// Initiation peak: largest force before the curve first falls to its post-peak valley.
std::size_t initiation_peak(const Curve& c) { return argmax_in(c, 0.0, 0.1); }

double interp(const Curve& c, double u) {
  if (u <= c.u.front()) return c.f.front();
  for (std::size_t i = 1; i < c.u.size(); ++i)
    if (u <= c.u[i]) return c.f[i - 1] + (c.f[i] - c.f[i - 1]) * (u - c.u[i - 1]) / (c.u[i] - c.u[i - 1]);
  return c.f.back();
}

// Longest u/l window whose force stays within 10% relative variation.
double plateau_width(const Curve& c) {
  double best = 0.0;
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    double lo = c.f[i], hi = c.f[i];
    for (std::size_t j = i + 1; j < c.u.size(); ++j) {
      lo = std::min(lo, c.f[j]);
      hi = std::max(hi, c.f[j]);
      const double mean = 0.5 * (lo + hi);
      if (mean <= 0.0 || (hi - lo) / mean >= 0.1) break;
      best = std::max(best, c.u[j] - c.u[i]);
    }
  }
  return best;
}

// Sign changes of the divided second difference inside [lo, hi].
int second_difference_sign_changes(const Curve& c, double lo, double hi) {
  std::vector<double> d2;
  for (std::size_t i = 1; i + 1 < c.u.size(); ++i) {
    if (c.u[i - 1] < lo || c.u[i + 1] > hi) continue;
    const double s1 = (c.f[i] - c.f[i - 1]) / (c.u[i] - c.u[i - 1]);
    const double s2 = (c.f[i + 1] - c.f[i]) / (c.u[i + 1] - c.u[i]);
    d2.push_back((s2 - s1) / (0.5 * (c.u[i + 1] - c.u[i - 1])));
  }
  int changes = 0;
  for (std::size_t i = 1; i < d2.size(); ++i)
    if (d2[i] * d2[i - 1] < 0.0) ++changes;
  return changes;
}

// Width in u/l of the region around the initiation peak where the force stays above half the peak.
double half_width(const Curve& c) {
  const std::size_t p = initiation_peak(c);
  const double half = 0.5 * c.f[p];
  double left = c.u.front();
  for (std::size_t i = p; i > 0; --i)
    if (c.f[i - 1] < half) {
      left = c.u[i - 1] + (half - c.f[i - 1]) * (c.u[i] - c.u[i - 1]) / (c.f[i] - c.f[i - 1]);
      break;
    }
  double right = c.u.back();
  for (std::size_t i = p + 1; i < c.u.size(); ++i)
    if (c.f[i] < half) {
      right = c.u[i - 1] + (c.f[i - 1] - half) * (c.u[i] - c.u[i - 1]) / (c.f[i - 1] - c.f[i]);
      break;
    }
  return right - left;
}

Outcome a1() {
  Outcome o;
  const auto& r = baseline(model::Branch::Contact);
  const Curve c = curve(r);
  const double f0 = c.f.front();
  o.require(f0 >= -1.6 && f0 <= -0.3, "F(0)=" + fmt("%.3f", f0));
  const std::size_t p = initiation_peak(c);
  o.require(p > 0 && p + 1 < c.u.size() && c.f[p] > c.f[p - 1] && c.f[p] >= c.f[p + 1], "peak is a local max");
  o.require(within(c.f[p], 3.9, 0.3), "peak=" + fmt("%.3f", c.f[p]));
  o.require(c.u[p] >= 0.003 && c.u[p] <= 0.03, "peak at u/l=" + fmt("%.4f", c.u[p]));
  const std::size_t m = argmin_in(c, c.u[p], c.u.back());
  o.require(within(c.f[m], 1.74, 0.3), "min=" + fmt("%.3f", c.f[m]));
  o.require(std::abs(c.u[m] - 0.5) <= 0.1, "min at u/l=" + fmt("%.3f", c.u[m]));
  const double ut = c.u.back(), ft = c.f.back();
  o.require(r.terminated, "branch terminates");
  o.require(ut >= 0.7 && ut <= 0.9, "terminus u/l=" + fmt("%.3f", ut));
  o.require(within(ft, 5.4, 0.3), "terminus F=" + fmt("%.3f", ft));
  o.require(within(c.f[p] / c.f[m], 2.24, 0.25), "max/min=" + fmt("%.3f", c.f[p] / c.f[m]));
  o.require(within(ft / c.f[m], 3.10, 0.25), "terminus/min=" + fmt("%.3f", ft / c.f[m]));
  o.require(within(std::abs(f0) / c.f[p], 0.205, 0.5), "|F0|/max=" + fmt("%.3f", std::abs(f0) / c.f[p]));
  return o;
}

Outcome a2() {
  Outcome o;
  const auto& r = baseline(model::Branch::Contact);
  const double radius = scenario::preset("elstat-baseline-16").fiber.radius;
  const auto it = std::min_element(r.min_gap.begin(), r.min_gap.end());
  const auto i = static_cast<std::size_t>(it - r.min_gap.begin());
  o.require(*it / radius > -0.15, "min g/R=" + fmt("%.4f", *it / radius));
  o.require(r.records[i].u_x_over_l >= 0.5 && r.records[i].u_x_over_l <= 0.7,
            "at u/l=" + fmt("%.3f", r.records[i].u_x_over_l));
  o.require(std::abs(r.min_gap_s[i] / 5.0 - 0.5) < 0.1, "at s=" + fmt("%.3f", r.min_gap_s[i]));
  return o;
}

Outcome a3() {
  Outcome o;
  const Curve contact = curve(baseline(model::Branch::Contact));
  const Curve sep = curve(baseline(model::Branch::Separated));
  const auto& unstable = baseline(model::Branch::Unstable);

  Curve up;  // separated branch in increasing u
  for (std::size_t i = sep.u.size(); i-- > 0;) {
    up.u.push_back(sep.u[i]);
    up.f.push_back(sep.f[i]);
  }
  o.require(!up.u.empty() && up.u.front() <= 0.85 && up.u.back() >= 1.2 - 1e-12,
            "separated range [" + fmt("%.3f", up.u.empty() ? 0.0 : up.u.front()) + ", " +
                fmt("%.3f", up.u.empty() ? 0.0 : up.u.back()) + "]");
  bool monotone = true;
  for (std::size_t i = 1; i < up.u.size(); ++i)
    if (up.u[i] >= 0.85 && !(up.f[i] < up.f[i - 1] && up.f[i] > 0.0)) monotone = false;
  o.require(monotone, "monotone decay on [0.85, 1.2]");

  int both = 0;
  for (double u = 0.65; u <= 0.8 + 1e-12; u += 0.01) {
    const bool in_contact = u <= contact.u.back();
    const bool in_sep = !up.u.empty() && u >= up.u.front() && u <= up.u.back();
    if (in_contact && in_sep && std::abs(interp(contact, u) - interp(up, u)) > 0.1) ++both;
  }
  int relaxed = 0;
  for (const auto& rec : unstable.records)
    if (rec.u_x_over_l >= 0.65 && rec.u_x_over_l <= 0.8 && rec.u_x_over_l <= contact.u.back()) ++relaxed;
  o.require(both > 0 || relaxed > 0, "coexisting u/l samples: " + std::to_string(both) + " swept, " +
                                         std::to_string(relaxed) + " relaxed");
  return o;
}

Outcome a4() {
  Outcome o;
  const std::vector<std::string> names = {"E1e+04", "E1e+05", "E1e+06"};
  std::vector<double> peaks;
  std::vector<Curve> curves;
  std::vector<const scenario::RunResult*> runs;
  for (const auto& n : names) {
    const auto& r = run_cached("elstat-paramstudy-32/" + n, variant("elstat-paramstudy-32", n), model::Branch::Contact);
    runs.push_back(&r);
    curves.push_back(curve(r));
    peaks.push_back(curves.back().f[initiation_peak(curves.back())]);
  }
  o.require(peaks[0] < peaks[1] && peaks[1] < peaks[2],
            "peaks " + fmt("%.3f", peaks[0]) + " < " + fmt("%.3f", peaks[1]) + " < " + fmt("%.3f", peaks[2]));
  const double w_soft = plateau_width(curves[0]);
  const double w_stiff = plateau_width(curves[2]);
  o.require(w_soft >= 0.15, "E=1e4 plateau width " + fmt("%.3f", w_soft));
  o.require(w_stiff < 0.15, "E=1e6 plateau width " + fmt("%.3f", w_stiff));
  double pull = 0.0;
  for (const auto& rec : runs[0]->records) pull = std::max(pull, rec.f_x);
  o.require(pull / runs[0]->f_ref_own >= 30.0, "E=1e4 pull-off/own F_ref=" + fmt("%.1f", pull / runs[0]->f_ref_own));
  return o;
}

Outcome a5() {
  Outcome o;
  std::map<std::string, Curve> c;
  for (const char* n : {"n8", "n16", "n32", "n8-doubled-gp"})
    c[n] = curve(run_cached(std::string("elstat-meshstudy/") + n, variant("elstat-meshstudy", n), model::Branch::Contact));
  const double end = std::min(c["n16"].u.back(), c["n32"].u.back());
  double num = 0.0, den = 0.0;
  const int samples = 1000;
  for (int k = 0; k <= samples; ++k) {
    const double u = end * k / samples;
    const double a = interp(c["n16"], u), b = interp(c["n32"], u);
    num += (a - b) * (a - b);
    den += b * b;
  }
  const double rms = std::sqrt(num / den);
  o.require(rms < 0.03, "16 vs 32 RMS " + fmt("%.4f", rms));
  const double lo = 0.1, hi = 0.45;
  const int coarse = second_difference_sign_changes(c["n8"], lo, hi);
  const int fine = second_difference_sign_changes(c["n32"], lo, hi);
  const int doubled = second_difference_sign_changes(c["n8-doubled-gp"], lo, hi);
  o.require(coarse >= 3, "n8 sign changes " + std::to_string(coarse));
  o.require(fine < 3, "n32 sign changes " + std::to_string(fine));
  o.require(doubled >= 3, "n8 doubled GPs sign changes " + std::to_string(doubled));
  return o;
}

Outcome a6() {
  Outcome o;
  const interaction::LennardJones lj;
  const double r_eq = interaction::lj_point_equilibrium(lj);
  const double g_eq = interaction::lj_equilibrium_gap(lj);
  const auto sig5 = [](double v, double ref) { return std::abs(v - ref) <= 0.5e-4 * std::pow(10.0, std::floor(std::log10(ref))); };
  o.require(sig5(r_eq, 1.4678e-3), "r_eq=" + fmt("%.5e", r_eq));
  o.require(sig5(g_eq, 8.3913e-4), "g_eq=" + fmt("%.5e", g_eq));
  o.require(std::abs(g_eq / 0.02 - 4.2e-2) <= 0.1e-2, "g_eq/R=" + fmt("%.4e", g_eq / 0.02));
  o.require(std::abs(g_eq / 5.0 - 1.7e-4) <= 0.05e-4, "g_eq/l=" + fmt("%.4e", g_eq / 5.0));
  return o;
}

Outcome a7() {
  Outcome o;
  const auto& r = lj_baseline();
  const Curve lj = curve(r);
  const Curve el = curve(baseline(model::Branch::Contact));
  o.require(std::abs(lj.u.front() - 1.6e-4) < 1e-9, "first u/l=" + fmt("%.2e", lj.u.front()));
  o.require(lj.f.front() < 0.0, "first F=" + fmt("%.3f", lj.f.front()));
  const auto gmax = static_cast<std::size_t>(std::max_element(lj.f.begin(), lj.f.end()) - lj.f.begin());
  o.require(lj.u[gmax] < 0.05, "LJ global max at u/l=" + fmt("%.4f", lj.u[gmax]));
  const auto emax = static_cast<std::size_t>(std::max_element(el.f.begin(), el.f.end()) - el.f.begin());
  // The last converged points sit on the fold, where the force turns over.
  o.require(el.u.back() - el.u[emax] < 0.01, "electrostatic global max at u/l=" + fmt("%.4f", el.u[emax]) +
                                                 ", terminus " + fmt("%.4f", el.u.back()));
  const double w_lj = half_width(lj), w_el = half_width(el);
  o.require(w_el >= 2.0 * w_lj, "half-widths LJ " + fmt("%.2e", w_lj) + " vs electrostatic " + fmt("%.2e", w_el));
  o.require(lj.u.back() > 0.5, "LJ branch reaches u/l=" + fmt("%.3f", lj.u.back()));
  return o;
}

Outcome a8() {
  Outcome o;
  // The unregularized variant equals the LJ baseline up to its shorter sweep; reuse that run.
  auto none = variant("lj-regularization", "greg-none");
  auto base = scenario::preset("lj-baseline-64");
  none.name = base.name;
  none.sweep.u_end = base.sweep.u_end;
  o.require(none == base, "greg-none matches lj-baseline-64");
  const auto& raw = lj_baseline();
  const double u_limit = scenario::preset("lj-regularization").sweep.u_end;
  std::map<double, std::pair<double, int>> reference;
  double raw_iters = 0.0;
  int raw_steps = 0;
  for (const auto& rec : raw.records)
    if (rec.u_x <= u_limit) {
      reference[rec.u_x] = {rec.f_x, rec.newton_iters};
      raw_iters += rec.newton_iters;
      ++raw_steps;
    }
  raw_iters /= std::max(raw_steps, 1);

  for (const char* n : {"greg-0.3", "greg-0.6", "greg-1.0", "greg-1.2"}) {
    const auto& r = run_cached(std::string("lj-regularization/") + n, variant("lj-regularization", n), model::Branch::Contact);
    double worst = 0.0, worst_before = 0.0;
    int shared = 0;
    double iters = 0.0;
    for (const auto& rec : r.records) {
      iters += rec.newton_iters;
      const auto it = reference.find(rec.u_x);
      if (it == reference.end()) continue;
      ++shared;
      const double rel = std::abs(rec.f_x - it->second.first) / std::abs(it->second.first);
      worst = std::max(worst, rel);
      if (rec.u_x_over_l < 0.25) worst_before = std::max(worst_before, rel);
    }
    iters /= std::max<std::size_t>(r.records.size(), 1);
    const std::string tag = std::string(n) + ": ";
    if (std::string(n) == "greg-1.2") {
      const bool early = r.terminated && r.records.back().u_x_over_l < 0.25;
      o.require(early || worst_before > 1e-10,
                tag + "max rel diff before u/l=0.25 " + fmt("%.2e", worst_before) + ", ends at u/l=" +
                    fmt("%.3f", r.records.empty() ? 0.0 : r.records.back().u_x_over_l));
      continue;
    }
    o.require(shared > 0 && r.records.back().u_x >= u_limit - 1e-12,
              tag + std::to_string(shared) + " shared steps, ends at u/l=" + fmt("%.3f", r.records.back().u_x_over_l));
    o.require(worst <= 1e-10, tag + "max rel diff " + fmt("%.2e", worst));
    o.require(raw_iters >= 2.0 * iters, tag + "mean iterations " + fmt("%.1f", raw_iters) + " -> " + fmt("%.1f", iters));
  }
  return o;
}

Outcome a9() {
  Outcome o;
  for (const char* preset : {"elstat-baseline-16", "lj-baseline-64"})
    for (const auto& c : verification::run_property_suite(scenario::preset(preset)))
      o.require(c.passed, std::string(preset) + ": " + c.name + " " + fmt("%.2e", c.value));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else {
      only.insert(a);
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}};
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    std::ostringstream line;
    for (std::size_t i = 0; i < out.notes.size(); ++i) line << (i ? "; " : "") << out.notes[i];
    std::printf("%s %s  %s\n", id.c_str(), out.pass ? "PASS" : "FAIL", line.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
