#include "fiberpeel/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fiberpeel/errors.hpp"

namespace fiberpeel::config {
namespace {

// Reads one JSON object; missing keys take defaults, unknown keys are rejected by finish().
class Reader {
 public:
  Reader(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
    if (!json_.is_object()) throw ValidationError("expected an object", path_);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = json_.find(key);
    return it == json_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError("expected a number", field(key));
    return v->get<double>();
  }

  std::optional<double> optional_number(const std::string& key, std::optional<double> fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (v->is_null()) return std::nullopt;
    if (!v->is_number()) throw ValidationError("expected a number or null", field(key));
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ValidationError("expected an integer", field(key));
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ValidationError("expected true or false", field(key));
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError("expected a string", field(key));
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& item : json_.items())
      if (!seen_.count(item.key())) throw ValidationError("unknown key", field(item.key()));
  }

 private:
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

model::SupportType parse_supports(const std::string& s, const std::string& field) {
  if (s == "pin_roller") return model::SupportType::PinRoller;
  if (s == "pin_pin") return model::SupportType::PinPin;
  throw ValidationError("expected pin_roller or pin_pin", field);
}

Json quadrature_json(const QuadratureConfig& q) { return {{"n_segments", q.n_segments}, {"n_gp", q.n_gp}}; }

QuadratureConfig read_quadrature(Reader& parent, const std::string& key, QuadratureConfig fallback) {
  const Json* v = parent.find(key);
  if (!v) return fallback;
  Reader r(*v, parent.field(key));
  QuadratureConfig q{r.integer("n_segments", fallback.n_segments), r.integer("n_gp", fallback.n_gp)};
  r.finish();
  return q;
}

Json sweep_json(const SweepConfig& s) {
  return {{"u_start", s.u_start},
          {"u_end", s.u_end},
          {"step_initial", s.step_initial},
          {"step_min", s.step_min},
          {"step_max", s.step_max},
          {"growth", s.growth},
          {"contact_gap_threshold", optional_json(s.contact_gap_threshold)}};
}

SweepConfig read_sweep(Reader& parent, const std::string& key, const SweepConfig& d) {
  const Json* v = parent.find(key);
  if (!v) return d;
  Reader r(*v, parent.field(key));
  SweepConfig s;
  s.u_start = r.number("u_start", d.u_start);
  s.u_end = r.number("u_end", d.u_end);
  s.step_initial = r.number("step_initial", d.step_initial);
  s.step_min = r.number("step_min", d.step_min);
  s.step_max = r.number("step_max", d.step_max);
  s.growth = r.number("growth", d.growth);
  s.contact_gap_threshold = r.optional_number("contact_gap_threshold", d.contact_gap_threshold);
  r.finish();
  return s;
}

template <class F>
void read_section(Reader& parent, const std::string& key, F&& body) {
  const Json* v = parent.find(key);
  if (!v) return;
  Reader r(*v, parent.field(key));
  body(r);
  r.finish();
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ValidationError("must be positive", field);
}

void check_quadrature(const QuadratureConfig& q, const std::string& field) {
  if (q.n_segments < 1) throw ValidationError("must be at least 1", field + ".n_segments");
  if (q.n_gp < 1) throw ValidationError("must be at least 1", field + ".n_gp");
}

void check_sweep(const SweepConfig& s, const std::string& field) {
  positive(s.step_initial, field + ".step_initial");
  positive(s.step_min, field + ".step_min");
  positive(s.step_max, field + ".step_max");
  if (s.step_min > s.step_initial) throw ValidationError("must not exceed step_initial", field + ".step_min");
  if (s.step_max < s.step_initial) throw ValidationError("must not be below step_initial", field + ".step_max");
  if (s.u_start == s.u_end) throw ValidationError("must differ from u_start", field + ".u_end");
  if (!(s.growth >= 1.0)) throw ValidationError("must be at least 1", field + ".growth");
  if (s.contact_gap_threshold) positive(*s.contact_gap_threshold, field + ".contact_gap_threshold");
}

}  // namespace

std::string to_string(InteractionType type) {
  switch (type) {
    case InteractionType::None: return "none";
    case InteractionType::Electrostatic: return "electrostatic";
    case InteractionType::LennardJones: return "lennard_jones";
  }
  return "none";
}

std::string to_string(model::SupportType supports) {
  return supports == model::SupportType::PinPin ? "pin_pin" : "pin_roller";
}

Json to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["fiber"] = {{"length", c.fiber.length},
                {"radius", c.fiber.radius},
                {"youngs_modulus", c.fiber.youngs_modulus},
                {"poisson_ratio", c.fiber.poisson_ratio},
                {"n_elements", c.fiber.n_elements}};
  j["geometry"] = {{"separation", c.geometry.separation}, {"supports", to_string(c.geometry.supports)}};

  Json inter{{"type", to_string(c.interaction.type)}};
  const auto& i = c.interaction;
  if (i.type == InteractionType::Electrostatic) {
    inter["sigma1"] = i.sigma1;
    inter["sigma2"] = i.sigma2;
    inter["k"] = i.k;
    inter["quadrature"] = quadrature_json(i.quadrature);
  } else if (i.type == InteractionType::LennardJones) {
    inter["rho1"] = i.rho1;
    inter["rho2"] = i.rho2;
    inter["k_vdw"] = i.k_vdw;
    inter["k_replj"] = i.k_replj;
    inter["g_reg"] = optional_json(i.g_reg);
    inter["g_reg_over_g_eq"] = optional_json(i.g_reg_over_g_eq);
    inter["allow_reg_above_equilibrium"] = i.allow_reg_above_equilibrium;
    inter["cutoff_radius"] = optional_json(i.cutoff_radius);
    inter["quadrature"] = quadrature_json(i.quadrature);
  }
  j["interaction"] = inter;

  j["contact"] = {{"enabled", c.contact.enabled},
                  {"penalty", c.contact.penalty},
                  {"gbar", c.contact.gbar},
                  {"quadrature", quadrature_json(c.contact.quadrature)}};
  j["sweep"] = sweep_json(c.sweep);
  j["separated_sweep"] = sweep_json(c.separated_sweep);
  j["unstable"] = {{"u_values", c.unstable.u_values}};
  j["solver"] = {{"tol_residual", optional_json(c.solver.tol_residual)},
                 {"tol_increment", optional_json(c.solver.tol_increment)},
                 {"max_iter", c.solver.max_iter},
                 {"du_max", c.solver.du_max}};
  j["relaxation"] = {{"drag", c.relaxation.drag},
                     {"dt_initial", c.relaxation.dt_initial},
                     {"steady_tol", c.relaxation.steady_tol},
                     {"step_budget", c.relaxation.step_budget}};
  j["normalization"] = {{"reference_youngs_modulus", optional_json(c.normalization.reference_youngs_modulus)},
                        {"supports", to_string(c.normalization.supports)}};
  j["outputs"] = {{"curve_csv", c.outputs.curve_csv},
                  {"snapshots_every_n", c.outputs.snapshots_every_n},
                  {"vtk_dir", c.outputs.vtk_dir},
                  {"summary", c.outputs.summary},
                  {"gap_csv", c.outputs.gap_csv}};
  Json variants = Json::array();
  for (const auto& v : c.variants) variants.push_back({{"name", v.name}, {"overrides", v.overrides}});
  j["variants"] = variants;
  return j;
}

ScenarioConfig from_json(const Json& json) {
  ScenarioConfig c;
  Reader root(json, "");
  c.name = root.string("name", c.name);

  read_section(root, "fiber", [&](Reader& r) {
    c.fiber.length = r.number("length", c.fiber.length);
    c.fiber.radius = r.number("radius", c.fiber.radius);
    c.fiber.youngs_modulus = r.number("youngs_modulus", c.fiber.youngs_modulus);
    c.fiber.poisson_ratio = r.number("poisson_ratio", c.fiber.poisson_ratio);
    c.fiber.n_elements = r.integer("n_elements", c.fiber.n_elements);
  });
  read_section(root, "geometry", [&](Reader& r) {
    c.geometry.separation = r.number("separation", c.geometry.separation);
    c.geometry.supports = parse_supports(r.string("supports", "pin_roller"), r.field("supports"));
  });
  read_section(root, "interaction", [&](Reader& r) {
    auto& i = c.interaction;
    const std::string type = r.string("type", "electrostatic");
    if (type == "none") {
      i.type = InteractionType::None;
    } else if (type == "electrostatic") {
      i.type = InteractionType::Electrostatic;
      i.sigma1 = r.number("sigma1", i.sigma1);
      i.sigma2 = r.number("sigma2", i.sigma2);
      i.k = r.number("k", i.k);
      i.quadrature = read_quadrature(r, "quadrature", {2, 10});
    } else if (type == "lennard_jones") {
      i.type = InteractionType::LennardJones;
      i.rho1 = r.number("rho1", i.rho1);
      i.rho2 = r.number("rho2", i.rho2);
      i.k_vdw = r.number("k_vdw", i.k_vdw);
      i.k_replj = r.number("k_replj", i.k_replj);
      i.g_reg = r.optional_number("g_reg", std::nullopt);
      i.g_reg_over_g_eq = r.optional_number("g_reg_over_g_eq", std::nullopt);
      i.allow_reg_above_equilibrium = r.boolean("allow_reg_above_equilibrium", false);
      i.cutoff_radius = r.optional_number("cutoff_radius", std::nullopt);
      i.quadrature = read_quadrature(r, "quadrature", {5, 10});
    } else {
      throw ValidationError("expected none, electrostatic or lennard_jones", r.field("type"));
    }
  });
  read_section(root, "contact", [&](Reader& r) {
    c.contact.enabled = r.boolean("enabled", c.contact.enabled);
    c.contact.penalty = r.number("penalty", c.contact.penalty);
    c.contact.gbar = r.number("gbar", c.contact.gbar);
    c.contact.quadrature = read_quadrature(r, "quadrature", c.contact.quadrature);
  });
  c.sweep = read_sweep(root, "sweep", c.sweep);
  c.separated_sweep = read_sweep(root, "separated_sweep", c.separated_sweep);
  read_section(root, "unstable", [&](Reader& r) {
    const Json* v = r.find("u_values");
    if (!v) return;
    if (!v->is_array()) throw ValidationError("expected an array of numbers", r.field("u_values"));
    for (const auto& x : *v) {
      if (!x.is_number()) throw ValidationError("expected an array of numbers", r.field("u_values"));
      c.unstable.u_values.push_back(x.get<double>());
    }
  });
  read_section(root, "solver", [&](Reader& r) {
    c.solver.tol_residual = r.optional_number("tol_residual", c.solver.tol_residual);
    c.solver.tol_increment = r.optional_number("tol_increment", c.solver.tol_increment);
    c.solver.max_iter = r.integer("max_iter", c.solver.max_iter);
    c.solver.du_max = r.number("du_max", c.solver.du_max);
  });
  read_section(root, "relaxation", [&](Reader& r) {
    c.relaxation.drag = r.number("drag", c.relaxation.drag);
    c.relaxation.dt_initial = r.number("dt_initial", c.relaxation.dt_initial);
    c.relaxation.steady_tol = r.number("steady_tol", c.relaxation.steady_tol);
    c.relaxation.step_budget = r.integer("step_budget", c.relaxation.step_budget);
  });
  read_section(root, "normalization", [&](Reader& r) {
    c.normalization.reference_youngs_modulus =
        r.optional_number("reference_youngs_modulus", c.normalization.reference_youngs_modulus);
    c.normalization.supports = parse_supports(r.string("supports", "pin_roller"), r.field("supports"));
  });
  read_section(root, "outputs", [&](Reader& r) {
    c.outputs.curve_csv = r.string("curve_csv", c.outputs.curve_csv);
    c.outputs.snapshots_every_n = r.integer("snapshots_every_n", c.outputs.snapshots_every_n);
    c.outputs.vtk_dir = r.string("vtk_dir", c.outputs.vtk_dir);
    c.outputs.summary = r.string("summary", c.outputs.summary);
    c.outputs.gap_csv = r.string("gap_csv", c.outputs.gap_csv);
  });
  if (const Json* v = root.find("variants")) {
    if (!v->is_array()) throw ValidationError("expected an array", "variants");
    for (std::size_t k = 0; k < v->size(); ++k) {
      Reader r((*v)[k], "variants[" + std::to_string(k) + "]");
      Variant var;
      var.name = r.string("name", "");
      if (const Json* o = r.find("overrides")) {
        if (!o->is_object()) throw ValidationError("expected an object", r.field("overrides"));
        var.overrides = *o;
      }
      r.finish();
      c.variants.push_back(std::move(var));
    }
  }
  root.finish();
  return c;
}

std::string serialize(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

ScenarioConfig parse(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return from_json(j);
}

ScenarioConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void save(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << serialize(config);
}

void validate(const ScenarioConfig& c) {
  positive(c.fiber.length, "fiber.length");
  positive(c.fiber.radius, "fiber.radius");
  positive(c.fiber.youngs_modulus, "fiber.youngs_modulus");
  if (!(c.fiber.poisson_ratio > -1.0 && c.fiber.poisson_ratio < 0.5))
    throw ValidationError("must lie in (-1, 0.5)", "fiber.poisson_ratio");
  if (c.fiber.n_elements < 1) throw ValidationError("must be at least 1", "fiber.n_elements");
  if (c.fiber.n_elements % 2 != 0)
    throw ValidationError("must be even: the reference-force experiment loads the midpoint node", "fiber.n_elements");
  positive(c.geometry.separation, "geometry.separation");

  const auto& i = c.interaction;
  if (i.type != InteractionType::None) check_quadrature(i.quadrature, "interaction.quadrature");
  if (i.type == InteractionType::LennardJones) {
    if (c.contact.enabled)
      throw ValidationError("penalty contact cannot be combined with Lennard-Jones adhesion", "contact.enabled");
    if (i.g_reg && i.g_reg_over_g_eq)
      throw ValidationError("set either g_reg or g_reg_over_g_eq, not both", "interaction.g_reg");
    if (i.g_reg_over_g_eq) positive(*i.g_reg_over_g_eq, "interaction.g_reg_over_g_eq");
  }
  if (i.type == InteractionType::Electrostatic && !c.contact.enabled)
    throw ValidationError("electrostatic attraction needs penalty contact", "contact.enabled");
  if (const auto law = interaction_law(c)) interaction::validate(*law);
  if (c.contact.enabled) {
    positive(c.contact.penalty, "contact.penalty");
    positive(c.contact.gbar, "contact.gbar");
    check_quadrature(c.contact.quadrature, "contact.quadrature");
  }
  check_sweep(c.sweep, "sweep");
  check_sweep(c.separated_sweep, "separated_sweep");
  if (c.solver.tol_residual) positive(*c.solver.tol_residual, "solver.tol_residual");
  if (c.solver.tol_increment) positive(*c.solver.tol_increment, "solver.tol_increment");
  if (c.solver.max_iter < 1) throw ValidationError("must be at least 1", "solver.max_iter");
  positive(c.solver.du_max, "solver.du_max");
  positive(c.relaxation.drag, "relaxation.drag");
  positive(c.relaxation.dt_initial, "relaxation.dt_initial");
  positive(c.relaxation.steady_tol, "relaxation.steady_tol");
  if (c.relaxation.step_budget < 1) throw ValidationError("must be at least 1", "relaxation.step_budget");
  if (c.normalization.reference_youngs_modulus)
    positive(*c.normalization.reference_youngs_modulus, "normalization.reference_youngs_modulus");
  if (c.outputs.snapshots_every_n < 0) throw ValidationError("must not be negative", "outputs.snapshots_every_n");

  std::set<std::string> names;
  for (std::size_t k = 0; k < c.variants.size(); ++k) {
    const auto& v = c.variants[k];
    const std::string field = "variants[" + std::to_string(k) + "]";
    if (v.name.empty()) throw ValidationError("needs a name", field + ".name");
    if (v.name.find_first_of("/\\") != std::string::npos)
      throw ValidationError("must not contain path separators", field + ".name");
    if (!names.insert(v.name).second) throw ValidationError("duplicate variant name", field + ".name");
    if (v.overrides.contains("variants")) throw ValidationError("variants cannot nest", field + ".overrides");
    try {
      validate(apply_variant(c, v));
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), field);
    }
  }
}

ScenarioConfig apply_variant(const ScenarioConfig& config, const Variant& variant) {
  Json base = to_json(config);
  base["variants"] = Json::array();
  base.merge_patch(variant.overrides);
  ScenarioConfig out = from_json(base);
  out.name = config.name + "/" + variant.name;
  out.variants.clear();
  return out;
}

std::vector<ScenarioConfig> expand_variants(const ScenarioConfig& config) {
  if (config.variants.empty()) return {config};
  std::vector<ScenarioConfig> out;
  for (const auto& v : config.variants) out.push_back(apply_variant(config, v));
  return out;
}

model::TwoFiberSpec two_fiber_spec(const ScenarioConfig& c) {
  model::TwoFiberSpec s;
  s.length = c.fiber.length;
  s.radius = c.fiber.radius;
  s.youngs_modulus = c.fiber.youngs_modulus;
  s.poisson_ratio = c.fiber.poisson_ratio;
  s.n_elements = c.fiber.n_elements;
  s.separation = c.geometry.separation;
  s.supports = c.geometry.supports;
  s.midpoint_node_required = true;
  return s;
}

model::FiberMesh reference_fiber(const ScenarioConfig& c) {
  const double e = c.normalization.reference_youngs_modulus.value_or(c.fiber.youngs_modulus);
  return model::make_straight_fiber(Vec2(0.0, 0.0), Vec2(0.0, 1.0), c.fiber.length, c.fiber.radius, e,
                                    c.fiber.poisson_ratio, c.fiber.n_elements);
}

std::optional<interaction::InteractionLaw> interaction_law(const ScenarioConfig& c) {
  const auto& i = c.interaction;
  const double r = c.fiber.radius;
  if (i.type == InteractionType::Electrostatic) return interaction::Electrostatic{i.sigma1, i.sigma2, i.k, r, r};
  if (i.type == InteractionType::None) return std::nullopt;
  interaction::LennardJones lj{i.rho1, i.rho2, i.k_vdw, i.k_replj, r, r, std::nullopt, i.cutoff_radius,
                               i.allow_reg_above_equilibrium};
  if (i.g_reg) lj.g_reg = *i.g_reg;
  if (i.g_reg_over_g_eq && *i.g_reg_over_g_eq > 0.0 && lj.k_vdw < 0.0 && lj.k_replj > 0.0)
    lj.g_reg = *i.g_reg_over_g_eq * interaction::lj_equilibrium_gap(lj);
  return lj;
}

contact::ContactLaw contact_law(const ScenarioConfig& c) { return {c.contact.penalty, c.contact.gbar}; }

solver::NewtonSettings newton_settings(const ScenarioConfig& c) {
  const double ea = c.fiber.youngs_modulus * kPi * c.fiber.radius * c.fiber.radius;
  solver::NewtonSettings s;
  s.tol_residual = c.solver.tol_residual.value_or(1e-8 * ea / c.fiber.length);
  s.tol_increment = c.solver.tol_increment.value_or(1e-10 * c.fiber.length);
  s.max_iterations = c.solver.max_iter;
  s.du_max = c.solver.du_max;
  return s;
}

solver::ContinuationSettings continuation_settings(const SweepConfig& sweep) {
  solver::ContinuationSettings s;
  s.u_start = sweep.u_start;
  s.u_end = sweep.u_end;
  s.step_initial = sweep.step_initial;
  s.step_min = sweep.step_min;
  s.step_max = sweep.step_max;
  s.growth = sweep.growth;
  return s;
}

solver::RelaxationSettings relaxation_settings(const ScenarioConfig& c) {
  return {c.relaxation.drag, c.relaxation.dt_initial, c.relaxation.steady_tol, c.relaxation.step_budget};
}

double contact_gap_threshold(const ScenarioConfig& c) {
  if (c.sweep.contact_gap_threshold) return *c.sweep.contact_gap_threshold;
  if (c.interaction.type == InteractionType::LennardJones) {
    const auto law = std::get<interaction::LennardJones>(*interaction_law(c));
    return 10.0 * interaction::lj_equilibrium_gap(law);
  }
  if (c.contact.enabled) return c.contact.gbar;
  return c.fiber.radius;
}

}  // namespace fiberpeel::config
