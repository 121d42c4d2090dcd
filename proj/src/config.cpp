#include "twolevel/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "twolevel/error.hpp"
#include "twolevel/scaling.hpp"

namespace twolevel {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::SchemaError, path + ": " + reason);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void allow(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) schema(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) schema(join(path, it.key()), "unknown field");
  }
}

double number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) schema(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(join(path, key), "must be finite");
  return d;
}

double positive(const json& j, const std::string& path, const char* key, double fallback) {
  const double d = number(j, path, key, fallback);
  if (!(d > 0.0)) schema(join(path, key), "must be positive");
  return d;
}

std::uint64_t count(const json& j, const std::string& path, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) schema(join(path, key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool boolean(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) schema(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const std::string& path, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) schema(join(path, key), "expected a string");
  return j.at(key).get<std::string>();
}

const json& child(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

Trait trait_value(const json& j, const std::string& path, std::size_t dim) {
  if (j.is_number()) {
    if (dim != 1) schema(path, "expected " + std::to_string(dim) + " coordinates");
    return Trait{j.get<double>()};
  }
  if (!j.is_array() || j.size() != dim) schema(path, "expected " + std::to_string(dim) + " coordinates");
  Trait t(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    if (!j[k].is_number()) schema(path + "[" + std::to_string(k) + "]", "expected a number");
    t[k] = j[k].get<double>();
  }
  return t;
}

json trait_json(const Trait& t) {
  json a = json::array();
  for (double v : t.coords()) a.push_back(v);
  return a;
}

// ----- forms

TraitForm trait_form(const json& j, const std::string& path) {
  if (j.is_number()) return TraitForm::constant(j.get<double>());
  allow(j, path, {"form", "c0", "slope", "center", "width"});
  const std::string form = text(j, path, "form", "constant");
  TraitForm f;
  f.c0 = number(j, path, "c0", 0.0);
  if (form == "constant") {
    f.kind = TraitForm::Kind::Constant;
  } else if (form == "linear") {
    f.kind = TraitForm::Kind::Linear;
    f.slope = number(j, path, "slope", 0.0);
  } else if (form == "gaussian") {
    f.kind = TraitForm::Kind::Gaussian;
    f.center = number(j, path, "center", 0.0);
    f.width = positive(j, path, "width", 1.0);
  } else {
    throw Error(ErrorCode::UnknownRateForm, join(path, "form") + ": '" + form + "' (known: constant, linear, gaussian)");
  }
  return f;
}

json to_json(const TraitForm& f) {
  json j{{"form", std::string(kind_name(f.kind))}, {"c0", f.c0}};
  if (f.kind == TraitForm::Kind::Linear) j["slope"] = f.slope;
  if (f.kind == TraitForm::Kind::Gaussian) {
    j["center"] = f.center;
    j["width"] = f.width;
  }
  return j;
}

RateForm rate_form(const json& j, const std::string& path) {
  if (j.is_number()) return RateForm::constant(j.get<double>());
  allow(j, path, {"form", "c0", "c1", "c2", "factor"});
  const std::string form = text(j, path, "form", "constant");
  RateForm r;
  r.c0 = number(j, path, "c0", 0.0);
  r.c1 = number(j, path, "c1", 0.0);
  r.c2 = number(j, path, "c2", 0.0);
  if (form == "constant") {
    r.kind = RateForm::Kind::Constant;
    r.c1 = r.c2 = 0.0;
  } else if (form == "affine") {
    r.kind = RateForm::Kind::Affine;
  } else if (form == "product") {
    r.kind = RateForm::Kind::Product;
  } else if (form == "proportion") {
    r.kind = RateForm::Kind::Proportion;
    r.c2 = 0.0;
  } else {
    throw Error(ErrorCode::UnknownRateForm,
                join(path, "form") + ": '" + form + "' (known: constant, affine, product, proportion)");
  }
  if (r.kind == RateForm::Kind::Product || r.kind == RateForm::Kind::Proportion)
    r.factor = j.contains("factor") ? trait_form(j.at("factor"), join(path, "factor")) : TraitForm::constant(1.0);
  return r;
}

json to_json(const RateForm& r) {
  json j{{"form", std::string(kind_name(r.kind))}, {"c0", r.c0}};
  if (r.kind != RateForm::Kind::Constant) j["c1"] = r.c1;
  if (r.kind == RateForm::Kind::Affine || r.kind == RateForm::Kind::Product) j["c2"] = r.c2;
  if (r.kind == RateForm::Kind::Product || r.kind == RateForm::Kind::Proportion) j["factor"] = to_json(r.factor);
  return j;
}

KernelForm kernel_form(const json& j, const std::string& path) {
  if (j.is_number()) return KernelForm::constant(j.get<double>());
  allow(j, path, {"form", "u0", "width"});
  const std::string form = text(j, path, "form", "constant");
  const double u0 = number(j, path, "u0", 0.0);
  if (form == "constant") return KernelForm::constant(u0);
  if (form == "gaussian") return KernelForm::gaussian(u0, positive(j, path, "width", 1.0));
  throw Error(ErrorCode::UnknownRateForm, join(path, "form") + ": '" + form + "' (known: constant, gaussian)");
}

json to_json(const KernelForm& k) {
  json j{{"form", std::string(kind_name(k.kind))}, {"u0", k.u0}};
  if (k.kind == KernelForm::Kind::Gaussian) j["width"] = k.width;
  return j;
}

ScalarForm scalar_form(const json& j, const std::string& path) {
  if (j.is_number()) return ScalarForm::constant(j.get<double>());
  allow(j, path, {"form", "a", "b"});
  const std::string form = text(j, path, "form", "constant");
  const double a = number(j, path, "a", 1.0), b = number(j, path, "b", 1.0);
  if (form == "constant") return ScalarForm::constant(a);
  if (form == "identity") return ScalarForm::identity();
  if (form == "power") {
    if (a < 0 || a != std::floor(a)) schema(join(path, "a"), "power must be a nonnegative integer");
    return ScalarForm::power(static_cast<int>(a));
  }
  if (form == "gaussian") {
    if (!(b > 0.0)) schema(join(path, "b"), "must be positive");
    return ScalarForm::gaussian(a, b);
  }
  if (form == "exponential") return ScalarForm::exponential(a);
  if (form == "capped") return ScalarForm::capped(a);
  throw Error(ErrorCode::UnknownRateForm,
              join(path, "form") + ": '" + form + "' (known: constant, identity, power, gaussian, exponential, capped)");
}

json to_json(const ScalarForm& s) {
  json j{{"form", std::string(kind_name(s.kind))}};
  if (s.kind != ScalarForm::Kind::Identity) j["a"] = s.a;
  if (s.kind == ScalarForm::Kind::Gaussian) j["b"] = s.b;
  return j;
}

// ----- blocks

ModelParams model_block(const json& j, const std::string& path) {
  allow(j, path,
        {"dim", "box", "birth", "death", "selection", "competition", "mutation_prob", "mutation_sd", "cell_birth",
         "cell_death", "cell_competition", "lambda", "acceleration", "envelopes"});
  ModelParams p;
  const std::size_t dim = count(j, path, "dim", 1);
  if (dim < 1 || dim > kMaxTraitDim) schema(join(path, "dim"), "must be between 1 and " + std::to_string(kMaxTraitDim));
  p.box = TraitBox::unit(dim);
  if (j.contains("box")) {
    const json& b = j.at("box");
    const std::string bp = join(path, "box");
    allow(b, bp, {"lower", "upper"});
    if (!b.contains("lower") || !b.contains("upper")) schema(bp, "needs lower and upper");
    p.box.lower = trait_value(b.at("lower"), join(bp, "lower"), dim);
    p.box.upper = trait_value(b.at("upper"), join(bp, "upper"), dim);
    for (std::size_t k = 0; k < dim; ++k)
      if (!(p.box.upper[k] > p.box.lower[k])) schema(bp, "upper must exceed lower in every coordinate");
  }
  auto rate = [&](const char* key, RateForm& out) {
    if (j.contains(key)) out = rate_form(j.at(key), join(path, key));
  };
  rate("birth", p.birth);
  rate("death", p.death);
  rate("selection", p.selection);
  if (j.contains("competition")) p.competition = kernel_form(j.at("competition"), join(path, "competition"));
  if (j.contains("mutation_prob")) p.mutation_prob = trait_form(j.at("mutation_prob"), join(path, "mutation_prob"));
  if (j.contains("mutation_sd")) p.mutation_sd = trait_form(j.at("mutation_sd"), join(path, "mutation_sd"));
  auto pair_of = [&](const char* key, std::array<TraitForm, 2>& out) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 2) schema(join(path, key), "expected two entries (cell types 1 and 2)");
    for (std::size_t i = 0; i < 2; ++i) out[i] = trait_form(a[i], join(path, key) + "[" + std::to_string(i) + "]");
  };
  pair_of("cell_birth", p.cell_birth);
  pair_of("cell_death", p.cell_death);
  pair_of("cell_competition", p.cell_competition);
  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    const std::string lp = join(path, "lambda");
    if (!l.is_array() || l.size() != 2)
      schema(lp, "expected a 2x2 matrix, got " + (l.is_array() ? std::to_string(l.size()) + " rows" : "no array"));
    for (std::size_t r = 0; r < 2; ++r) {
      if (!l[r].is_array() || l[r].size() != 2) schema(lp + "[" + std::to_string(r) + "]", "expected 2 entries");
      for (std::size_t c = 0; c < 2; ++c) {
        if (!l[r][c].is_number()) schema(lp + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", "expected a number");
        p.lambda[r][c] = l[r][c].get<double>();
      }
    }
  }
  if (j.contains("acceleration")) {
    const json& a = j.at("acceleration");
    const std::string ap = join(path, "acceleration");
    allow(a, ap, {"Gamma", "gamma", "sigma"});
    Acceleration acc;
    if (a.contains("Gamma")) acc.Gamma = rate_form(a.at("Gamma"), join(ap, "Gamma"));
    if (a.contains("gamma")) acc.gamma = trait_form(a.at("gamma"), join(ap, "gamma"));
    if (a.contains("sigma")) acc.sigma = trait_form(a.at("sigma"), join(ap, "sigma"));
    p.acceleration = acc;
  }
  if (j.contains("envelopes")) {
    const json& e = j.at("envelopes");
    const std::string ep = join(path, "envelopes");
    allow(e, ep, {"birth", "death", "selection", "kernel", "mutation", "mutation_sd"});
    p.envelopes.birth = number(e, ep, "birth", Envelopes::kUnset);
    p.envelopes.death = number(e, ep, "death", Envelopes::kUnset);
    p.envelopes.selection = number(e, ep, "selection", Envelopes::kUnset);
    p.envelopes.kernel = number(e, ep, "kernel", Envelopes::kUnset);
    p.envelopes.mutation = number(e, ep, "mutation", Envelopes::kUnset);
    p.envelopes.mutation_sd = number(e, ep, "mutation_sd", Envelopes::kUnset);
  }
  return p;
}

json to_json(const ModelParams& p) {
  json j;
  j["dim"] = p.box.dim();
  j["box"] = {{"lower", trait_json(p.box.lower)}, {"upper", trait_json(p.box.upper)}};
  j["birth"] = to_json(p.birth);
  j["death"] = to_json(p.death);
  j["selection"] = to_json(p.selection);
  j["competition"] = to_json(p.competition);
  j["mutation_prob"] = to_json(p.mutation_prob);
  j["mutation_sd"] = to_json(p.mutation_sd);
  j["cell_birth"] = {to_json(p.cell_birth[0]), to_json(p.cell_birth[1])};
  j["cell_death"] = {to_json(p.cell_death[0]), to_json(p.cell_death[1])};
  j["cell_competition"] = {to_json(p.cell_competition[0]), to_json(p.cell_competition[1])};
  j["lambda"] = {{p.lambda[0][0], p.lambda[0][1]}, {p.lambda[1][0], p.lambda[1][1]}};
  if (p.acceleration)
    j["acceleration"] = {{"Gamma", to_json(p.acceleration->Gamma)},
                         {"gamma", to_json(p.acceleration->gamma)},
                         {"sigma", to_json(p.acceleration->sigma)}};
  const Envelopes& e = p.envelopes;
  json env = json::object();
  auto put = [&](const char* key, double v) {
    if (!std::isnan(v)) env[key] = v;
  };
  put("birth", e.birth);
  put("death", e.death);
  put("selection", e.selection);
  put("kernel", e.kernel);
  put("mutation", e.mutation);
  put("mutation_sd", e.mutation_sd);
  j["envelopes"] = env;
  return j;
}

ScalingRegime regime_block(const json& j, const std::string& path) {
  allow(j, path, {"K", "K1", "K2", "eta", "tag"});
  ScalingRegime r;
  const std::string tag = text(j, path, "tag", "none");
  if (tag == "none") r.tag = RegimeTag::None;
  else if (tag == "H2") r.tag = RegimeTag::H2;
  else if (tag == "H3-deterministic") r.tag = RegimeTag::H3Deterministic;
  else if (tag == "H3-super") r.tag = RegimeTag::H3Super;
  else schema(join(path, "tag"), "'" + tag + "' is not one of none, H2, H3-deterministic, H3-super");
  r.K = positive(j, path, "K", 1.0);
  r.K1 = positive(j, path, "K1", r.K);
  r.K2 = positive(j, path, "K2", r.K);
  r.eta = number(j, path, "eta", 1.0);
  if (!(r.eta > 0.0 && r.eta <= 1.0)) schema(join(path, "eta"), "must lie in (0, 1]");
  if (r.tag == RegimeTag::H3Super && r.eta != 1.0) schema(join(path, "eta"), "H3-super needs eta = 1");
  if (r.tag == RegimeTag::H3Deterministic && r.eta >= 1.0) schema(join(path, "eta"), "H3-deterministic needs eta < 1");
  return r;
}

std::string tag_text(RegimeTag t) {
  switch (t) {
    case RegimeTag::None: return "none";
    case RegimeTag::H2: return "H2";
    case RegimeTag::H3Deterministic: return "H3-deterministic";
    case RegimeTag::H3Super: return "H3-super";
  }
  return "none";
}

InitialCondition initial_block(const json& j, const std::string& path, std::size_t dim, const TraitBox& box) {
  allow(j, path, {"kind", "particles", "sampler", "measure", "density"});
  InitialCondition ic;
  const std::string kind = text(j, path, "kind", "particles");
  if (kind == "particles") {
    ic.kind = InitialKind::Particles;
    static const json none = json::array();
    const json& list = j.contains("particles") ? j.at("particles") : none;
    if (!list.is_array()) schema(join(path, "particles"), "expected a list of {x, n1, n2, count}");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string pp = join(path, "particles") + "[" + std::to_string(k) + "]";
      allow(list[k], pp, {"x", "n1", "n2", "count"});
      if (!list[k].contains("x")) schema(pp, "needs x");
      const Trait x = trait_value(list[k].at("x"), join(pp, "x"), dim);
      if (!box.contains(x)) schema(join(pp, "x"), "outside the trait box");
      const Individual ind{x, static_cast<std::int64_t>(count(list[k], pp, "n1", 0)),
                           static_cast<std::int64_t>(count(list[k], pp, "n2", 0))};
      const auto copies = count(list[k], pp, "count", 1);
      for (std::uint64_t c = 0; c < copies; ++c) ic.particles.push_back(ind);
    }
  } else if (kind == "sampler") {
    ic.kind = InitialKind::Sampler;
    const json& s = child(j, "sampler");
    const std::string sp = join(path, "sampler");
    allow(s, sp, {"count", "lower", "upper", "n1_mean", "n2_mean", "poisson"});
    ic.sampler.count = count(s, sp, "count", 10);
    ic.sampler.lower = s.contains("lower") ? trait_value(s.at("lower"), join(sp, "lower"), dim) : box.lower;
    ic.sampler.upper = s.contains("upper") ? trait_value(s.at("upper"), join(sp, "upper"), dim) : box.upper;
    if (!box.contains(ic.sampler.lower) || !box.contains(ic.sampler.upper)) schema(sp, "trait range outside the box");
    ic.sampler.n1_mean = number(s, sp, "n1_mean", 0.0);
    ic.sampler.n2_mean = number(s, sp, "n2_mean", 0.0);
    if (ic.sampler.n1_mean < 0 || ic.sampler.n2_mean < 0) schema(sp, "cell means must be nonnegative");
    ic.sampler.poisson = boolean(s, sp, "poisson", true);
  } else if (kind == "measure") {
    ic.kind = InitialKind::Measure;
    if (!j.contains("measure") || !j.at("measure").is_array())
      schema(join(path, "measure"), "expected a list of {x, y1, y2, w}");
    const json& list = j.at("measure");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string mp = join(path, "measure") + "[" + std::to_string(k) + "]";
      allow(list[k], mp, {"x", "y1", "y2", "w"});
      if (!list[k].contains("x")) schema(mp, "needs x");
      WeightedAtom a{trait_value(list[k].at("x"), join(mp, "x"), dim), number(list[k], mp, "y1", 0.0),
                     number(list[k], mp, "y2", 0.0), number(list[k], mp, "w", 1.0)};
      if (a.y1 < 0 || a.y2 < 0 || a.w < 0) schema(mp, "y1, y2 and w must be nonnegative");
      ic.measure.push_back(a);
    }
  } else if (kind == "density") {
    ic.kind = InitialKind::Density;
    const json& d = child(j, "density");
    const std::string dp = join(path, "density");
    allow(d, dp, {"x_center", "x_width", "y1_center", "y2_center", "width", "mass"});
    ic.bump.x_center = number(d, dp, "x_center", 0.5);
    ic.bump.x_width = number(d, dp, "x_width", 0.0);
    ic.bump.y1_center = number(d, dp, "y1_center", 0.5);
    ic.bump.y2_center = number(d, dp, "y2_center", 0.5);
    ic.bump.width = positive(d, dp, "width", 0.1);
    ic.bump.mass = positive(d, dp, "mass", 1.0);
    if (ic.bump.x_width < 0) schema(join(dp, "x_width"), "must be nonnegative");
  } else {
    schema(join(path, "kind"), "'" + kind + "' is not one of particles, sampler, measure, density");
  }
  return ic;
}

json to_json(const InitialCondition& ic) {
  json j;
  switch (ic.kind) {
    case InitialKind::Particles: {
      j["kind"] = "particles";
      json list = json::array();
      // runs of identical individuals are written back with a count
      for (std::size_t k = 0; k < ic.particles.size();) {
        std::size_t e = k;
        while (e < ic.particles.size() && ic.particles[e] == ic.particles[k]) ++e;
        list.push_back({{"x", trait_json(ic.particles[k].trait)},
                        {"n1", ic.particles[k].n1},
                        {"n2", ic.particles[k].n2},
                        {"count", e - k}});
        k = e;
      }
      j["particles"] = list;
      break;
    }
    case InitialKind::Sampler:
      j["kind"] = "sampler";
      j["sampler"] = {{"count", ic.sampler.count},     {"lower", trait_json(ic.sampler.lower)},
                      {"upper", trait_json(ic.sampler.upper)}, {"n1_mean", ic.sampler.n1_mean},
                      {"n2_mean", ic.sampler.n2_mean}, {"poisson", ic.sampler.poisson}};
      break;
    case InitialKind::Measure: {
      j["kind"] = "measure";
      json list = json::array();
      for (const auto& a : ic.measure) list.push_back({{"x", trait_json(a.x)}, {"y1", a.y1}, {"y2", a.y2}, {"w", a.w}});
      j["measure"] = list;
      break;
    }
    case InitialKind::Density:
      j["kind"] = "density";
      j["density"] = {{"x_center", ic.bump.x_center}, {"x_width", ic.bump.x_width}, {"y1_center", ic.bump.y1_center},
                      {"y2_center", ic.bump.y2_center}, {"width", ic.bump.width},   {"mass", ic.bump.mass}};
      break;
  }
  return j;
}

RunBlock run_block(const json& j, const std::string& path) {
  allow(j, path,
        {"T", "grid_intervals", "replicates", "seed", "event_budget", "audit_interval", "tree_threshold",
         "mass_ceiling", "second_moment_ceiling"});
  RunBlock r;
  r.T = positive(j, path, "T", r.T);
  r.grid_intervals = count(j, path, "grid_intervals", r.grid_intervals);
  if (r.grid_intervals == 0) schema(join(path, "grid_intervals"), "must be at least 1");
  r.replicates = count(j, path, "replicates", r.replicates);
  if (r.replicates == 0) schema(join(path, "replicates"), "must be at least 1");
  r.seed = count(j, path, "seed", r.seed);
  r.event_budget = count(j, path, "event_budget", r.event_budget);
  r.audit_interval = count(j, path, "audit_interval", r.audit_interval);
  r.tree_threshold = count(j, path, "tree_threshold", r.tree_threshold);
  r.mass_ceiling = positive(j, path, "mass_ceiling", r.mass_ceiling);
  r.second_moment_ceiling = positive(j, path, "second_moment_ceiling", r.second_moment_ceiling);
  return r;
}

json to_json(const RunBlock& r) {
  return {{"T", r.T},
          {"grid_intervals", r.grid_intervals},
          {"replicates", r.replicates},
          {"seed", r.seed},
          {"event_budget", r.event_budget},
          {"audit_interval", r.audit_interval},
          {"tree_threshold", r.tree_threshold},
          {"mass_ceiling", r.mass_ceiling},
          {"second_moment_ceiling", r.second_moment_ceiling}};
}

AnalysisBlock analysis_block(const json& j, const std::string& path, std::size_t dim) {
  allow(j, path, {"test_functions", "se_band", "qv_tolerance", "slope_tolerance"});
  AnalysisBlock a;
  if (j.contains("test_functions")) {
    const json& list = j.at("test_functions");
    if (!list.is_array()) schema(join(path, "test_functions"), "expected a list");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string tp = join(path, "test_functions") + "[" + std::to_string(k) + "]";
      allow(list[k], tp, {"name", "f", "g1", "g2", "coord"});
      TestFunction tf;
      tf.name = text(list[k], tp, "name", "tf" + std::to_string(k));
      if (list[k].contains("f")) tf.f = scalar_form(list[k].at("f"), join(tp, "f"));
      if (list[k].contains("g1")) tf.g1 = scalar_form(list[k].at("g1"), join(tp, "g1"));
      if (list[k].contains("g2")) tf.g2 = scalar_form(list[k].at("g2"), join(tp, "g2"));
      tf.coord = count(list[k], tp, "coord", 0);
      if (tf.coord >= dim) schema(join(tp, "coord"), "exceeds the trait dimension");
      a.test_functions.push_back(tf);
    }
  } else {
    a.test_functions.push_back(TestFunction::one());
  }
  a.se_band = positive(j, path, "se_band", a.se_band);
  a.qv_tolerance = positive(j, path, "qv_tolerance", a.qv_tolerance);
  a.slope_tolerance = positive(j, path, "slope_tolerance", a.slope_tolerance);
  return a;
}

json to_json(const AnalysisBlock& a) {
  json list = json::array();
  for (const auto& tf : a.test_functions)
    list.push_back({{"name", tf.name}, {"f", to_json(tf.f)}, {"g1", to_json(tf.g1)}, {"g2", to_json(tf.g2)}, {"coord", tf.coord}});
  return {{"test_functions", list},
          {"se_band", a.se_band},
          {"qv_tolerance", a.qv_tolerance},
          {"slope_tolerance", a.slope_tolerance}};
}

SolverBlock solver_block(const json& j, const std::string& path, const TraitBox& box) {
  allow(j, path,
        {"kind", "grid", "dt", "dt_out", "picard_tol", "picard_max", "ode", "convention", "require_ellipticity",
         "second_moment_ceiling", "equilibrium_trait"});
  SolverBlock s;
  const std::string kind = text(j, path, "kind", "meanfield");
  if (kind == "meanfield") s.kind = SolverKind::MeanField;
  else if (kind == "characteristic") s.kind = SolverKind::Characteristic;
  else if (kind == "transport") s.kind = SolverKind::Transport;
  else if (kind == "reaction-diffusion") s.kind = SolverKind::ReactionDiffusion;
  else schema(join(path, "kind"), "'" + kind + "' is not one of meanfield, characteristic, transport, reaction-diffusion");
  s.grid.x_lo = box.lower[0];
  s.grid.x_hi = box.upper[0];
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const std::string gp = join(path, "grid");
    allow(g, gp, {"nx", "ny1", "ny2", "y1_max", "y2_max"});
    s.grid.nx = count(g, gp, "nx", s.grid.nx);
    s.grid.ny1 = count(g, gp, "ny1", s.grid.ny1);
    s.grid.ny2 = count(g, gp, "ny2", s.grid.ny2);
    s.grid.y1_max = positive(g, gp, "y1_max", s.grid.y1_max);
    s.grid.y2_max = positive(g, gp, "y2_max", s.grid.y2_max);
    if (s.grid.nx == 0 || s.grid.ny1 == 0 || s.grid.ny2 == 0) schema(gp, "every axis needs at least one cell");
  }
  s.dt = positive(j, path, "dt", s.dt);
  s.dt_out = positive(j, path, "dt_out", s.dt_out);
  s.picard_tol = positive(j, path, "picard_tol", s.picard_tol);
  s.picard_max = count(j, path, "picard_max", s.picard_max);
  if (j.contains("ode")) {
    const json& o = j.at("ode");
    const std::string op = join(path, "ode");
    allow(o, op, {"atol", "rtol", "max_steps"});
    s.ode.atol = positive(o, op, "atol", s.ode.atol);
    s.ode.rtol = positive(o, op, "rtol", s.ode.rtol);
    s.ode.max_steps = count(o, op, "max_steps", s.ode.max_steps);
  }
  const std::string conv = text(j, path, "convention", "printed");
  if (conv == "printed") s.convention = DiffusionConvention::Printed;
  else if (conv == "generator") s.convention = DiffusionConvention::Generator;
  else schema(join(path, "convention"), "'" + conv + "' is not one of printed, generator");
  s.require_ellipticity = boolean(j, path, "require_ellipticity", s.require_ellipticity);
  s.second_moment_ceiling = positive(j, path, "second_moment_ceiling", s.second_moment_ceiling);
  s.equilibrium_trait = j.contains("equilibrium_trait")
                            ? trait_value(j.at("equilibrium_trait"), join(path, "equilibrium_trait"), box.dim())
                            : box.lower;
  return s;
}

json to_json(const SolverBlock& s) {
  return {{"kind", std::string(solver_name(s.kind))},
          {"grid", {{"nx", s.grid.nx}, {"ny1", s.grid.ny1}, {"ny2", s.grid.ny2}, {"y1_max", s.grid.y1_max},
                    {"y2_max", s.grid.y2_max}}},
          {"dt", s.dt},
          {"dt_out", s.dt_out},
          {"picard_tol", s.picard_tol},
          {"picard_max", s.picard_max},
          {"ode", {{"atol", s.ode.atol}, {"rtol", s.ode.rtol}, {"max_steps", s.ode.max_steps}}},
          {"convention", std::string(convention_name(s.convention))},
          {"require_ellipticity", s.require_ellipticity},
          {"second_moment_ceiling", s.second_moment_ceiling},
          {"equilibrium_trait", trait_json(s.equilibrium_trait)}};
}

}  // namespace

std::string_view solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::MeanField: return "meanfield";
    case SolverKind::Characteristic: return "characteristic";
    case SolverKind::Transport: return "transport";
    case SolverKind::ReactionDiffusion: return "reaction-diffusion";
  }
  return "?";
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_config(const std::string& text_in) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "top level must be an object");
  allow(doc, "", {"model", "regime", "initial", "run", "analysis", "solver"});
  if (!doc.contains("model")) schema("model", "missing");

  ExperimentConfig cfg;
  const ModelParams raw = model_block(doc.at("model"), "model");
  cfg.regime = regime_block(child(doc, "regime"), "regime");
  cfg.initial = initial_block(child(doc, "initial"), "initial", raw.box.dim(), raw.box);
  cfg.run = run_block(child(doc, "run"), "run");
  cfg.analysis = analysis_block(child(doc, "analysis"), "analysis", raw.box.dim());
  cfg.solver = solver_block(child(doc, "solver"), "solver", raw.box);

  // resolved form is written before validation fills in sampled envelopes
  json resolved;
  resolved["model"] = to_json(raw);
  resolved["regime"] = {{"K", cfg.regime.K}, {"K1", cfg.regime.K1}, {"K2", cfg.regime.K2},
                        {"eta", cfg.regime.eta}, {"tag", tag_text(cfg.regime.tag)}};
  resolved["initial"] = to_json(cfg.initial);
  resolved["run"] = to_json(cfg.run);
  resolved["analysis"] = to_json(cfg.analysis);
  resolved["solver"] = to_json(cfg.solver);
  cfg.resolved_json = resolved.dump(2);
  cfg.hash = fnv1a(cfg.resolved_json);

  try {
    cfg.base = validate_params(raw);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NegativeRate) throw;
    schema("model", e.what());
  }
  const bool h3 = cfg.regime.tag == RegimeTag::H3Deterministic || cfg.regime.tag == RegimeTag::H3Super;
  cfg.params = h3 ? rescale_params_h3(cfg.base, cfg.regime, cfg.solver.require_ellipticity)
                  : rescale_params(cfg.base, cfg.regime);
  return cfg;
}

ExperimentConfig with_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  json doc = json::parse(cfg.resolved_json);
  doc["run"]["seed"] = seed;
  return parse_config(doc.dump());
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace twolevel
