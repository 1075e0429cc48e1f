#include "lensopt/scenario.hpp"

#include "lensopt/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace lensopt {

using nlohmann::json;

Scalar Region::signed_distance(Scalar x, Scalar y) const {
  if (kind == Kind::disk) return std::hypot(x - center.x(), y - center.y()) - radius;
  const Scalar dx = std::max(min.x() - x, x - max.x());
  const Scalar dy = std::max(min.y() - y, y - max.y());
  if (dx <= 0 && dy <= 0) return std::max(dx, dy);
  return std::hypot(std::max<Scalar>(dx, 0), std::max<Scalar>(dy, 0));
}

bool Region::inside_box(Scalar lx, Scalar ly) const {
  if (kind == Kind::disk) {
    return radius > 0 && center.x() - radius >= 0 && center.x() + radius <= lx &&
           center.y() - radius >= 0 && center.y() + radius <= ly;
  }
  return min.x() < max.x() && min.y() < max.y() && min.x() >= 0 && min.y() >= 0 &&
         max.x() <= lx && max.y() <= ly;
}

Vector rasterize(const Grid& grid, const PhaseSpec& spec) {
  if (spec.constant) return Vector::Constant(grid.node_count(), spec.value);
  return grid.interpolate([&](Scalar x, Scalar y) {
    const Scalar d = spec.region.signed_distance(x, y);
    Scalar s = d <= 0 ? 1 : 0;
    if (spec.width > 0) s = std::clamp(0.5 - d / spec.width, 0.0, 1.0);
    return spec.outside + (spec.inside - spec.outside) * s;
  });
}

Vector rasterize_indicator(const Grid& grid, const Region& region) {
  return grid.interpolate(
      [&](Scalar x, Scalar y) { return region.signed_distance(x, y) <= 0 ? 1.0 : 0.0; });
}

Scalar PulseSpec::time_factor(Scalar t) const {
  if (profile == "sine") return amplitude * std::sin(omega * t);
  if (t > duration) return 0;
  const Scalar s = std::sin(std::numbers::pi * t / duration);
  return amplitude * s * s;
}

int Scenario::steps() const { return static_cast<int>(std::lround(final_time / time_step)); }

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (nx < 2 || ny < 2) fail("grid: nx and ny must be at least 2");
  if (!(lx > 0) || !(ly > 0)) fail("grid: lx and ly must be positive");
  if (!(final_time > 0)) fail("final_time must be positive");
  if (!(time_step > 0)) fail("time_step must be positive");
  const int n = steps();
  if (n < 3) fail("time_step: need at least 3 steps up to final_time");
  if (std::abs(n * time_step - final_time) > 1e-9 * final_time) {
    fail("time_step must divide final_time into an integer number of steps");
  }
  try {
    medium.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("medium: ") + e.what());
  }
  try {
    gl.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("phase_field: ") + e.what());
  }
  if (alpha.kind != "constant" && alpha.kind != "modulated") fail("alpha.type must be constant or modulated");
  if (!(alpha.value > 0)) fail("alpha.value must be positive");
  if (alpha.kind == "modulated" && !(std::abs(alpha.amplitude) < alpha.value)) {
    fail("alpha.amplitude must be smaller than alpha.value in magnitude");
  }
  if (source.profile != "sin2" && source.profile != "sine") fail("source.profile must be sin2 or sine");
  if (source.shape != "uniform" && source.shape != "gaussian") fail("source.shape must be uniform or gaussian");
  if (!(source.duration > 0)) fail("source.duration must be positive");
  if (!(source.spread > 0)) fail("source.spread must be positive");
  if (!std::isfinite(source.amplitude)) fail("source.amplitude must be finite");
  if (!(initial.spread > 0)) fail("initial.spread must be positive");
  if (!focus.inside_box(lx, ly)) fail("focus: region must be nonempty and lie inside the domain");
  auto check_phase = [&](const PhaseSpec& p, const std::string& key) {
    auto in01 = [](Scalar v) { return v >= 0 && v <= 1; };
    if (p.constant ? !in01(p.value) : !(in01(p.inside) && in01(p.outside))) {
      fail(key + ": phase values must lie in [0, 1]");
    }
    if (!(p.width >= 0)) fail(key + ".width must be nonnegative");
  };
  check_phase(initial_phase, "initial_phase");
  if (target.mode != "synthesize" && target.mode != "file" && target.mode != "zero") {
    fail("target.mode must be synthesize, file or zero");
  }
  if (target.mode == "synthesize") check_phase(target.phi_true, "target.phi_true");
  if (target.mode == "file") {
    const std::filesystem::path base(target.prefix);
    const auto first = base.parent_path() / snapshot_name(base.filename().string(), 0, n);
    if (target.prefix.empty() || !std::filesystem::exists(first)) {
      fail("target.prefix: file " + first.string() + " does not exist");
    }
  }
  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("optimizer: ") + e.what());
  }
  if (!(solver.picard_tol > 0) || solver.picard_max < 1) fail("solver: bad Picard settings");
  if (!(solver.linear.tolerance > 0 && solver.linear.tolerance <= 1e-4)) {
    fail("solver.cg_tolerance must lie in (0, 1e-4]");
  }
  if (sweep.eps.empty()) fail("gamma_sweep.eps must not be empty");
  for (Scalar e : sweep.eps) {
    if (!(e > 0)) fail("gamma_sweep.eps entries must be positive");
  }
  if (profile.eps.empty()) fail("profile.eps must not be empty");
  if (profile.nodes < 3 || !(profile.length > 0)) fail("profile: need nodes >= 3 and length > 0");
  if (grad_check.probes < 1 || grad_check.deltas.empty()) fail("grad_check: need probes >= 1 and deltas");
  if (output.snapshot_stride < 1) fail("output.snapshot_stride must be >= 1");
}

namespace {

/// Typed, path-aware view of a JSON object that rejects unknown keys.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  void read_vec2(const char* key, Eigen::Vector2d& out) {
    std::vector<Scalar> v{out.x(), out.y()};
    read(key, v);
    if (v.size() != 2) throw ConfigError(where(key) + " must have two entries");
    out = {v[0], v[1]};
  }

  bool has(const char* key) const { return node_.contains(key); }

  Reader child(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    static const json empty = json::object();
    return Reader(it == node_.end() ? empty : *it, where(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key().c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_;
    if (key) p += (p.empty() ? "" : ".") + std::string(key);
    return p.empty() ? "<root>" : p;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_region(Reader r, Region& reg) {
  std::string type = reg.kind == Region::Kind::disk ? "disk" : "rectangle";
  r.read("type", type);
  if (type == "disk") {
    reg.kind = Region::Kind::disk;
  } else if (type == "rectangle") {
    reg.kind = Region::Kind::rectangle;
  } else {
    throw ConfigError(r.where("type") + " must be disk or rectangle");
  }
  r.read_vec2("center", reg.center);
  r.read("radius", reg.radius);
  r.read_vec2("min", reg.min);
  r.read_vec2("max", reg.max);
  r.finish();
}

void read_phase(Reader r, PhaseSpec& p) {
  std::string type = p.constant ? "constant" : (p.region.kind == Region::Kind::disk ? "disk" : "rectangle");
  r.read("type", type);
  if (type == "constant") {
    p.constant = true;
    r.read("value", p.value);
  } else if (type == "disk" || type == "rectangle") {
    p.constant = false;
    p.region.kind = type == "disk" ? Region::Kind::disk : Region::Kind::rectangle;
    r.read_vec2("center", p.region.center);
    r.read("radius", p.region.radius);
    r.read_vec2("min", p.region.min);
    r.read_vec2("max", p.region.max);
    r.read("inside", p.inside);
    r.read("outside", p.outside);
    r.read("width", p.width);
  } else {
    throw ConfigError(r.where("type") + " must be constant, disk or rectangle");
  }
  r.finish();
}

const char* side_name(Side s) {
  switch (s) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

json region_json(const Region& r) {
  if (r.kind == Region::Kind::disk) {
    return {{"type", "disk"}, {"center", {r.center.x(), r.center.y()}}, {"radius", r.radius}};
  }
  return {{"type", "rectangle"}, {"min", {r.min.x(), r.min.y()}}, {"max", {r.max.x(), r.max.y()}}};
}

json phase_json(const PhaseSpec& p) {
  if (p.constant) return {{"type", "constant"}, {"value", p.value}};
  json j = region_json(p.region);
  j["inside"] = p.inside;
  j["outside"] = p.outside;
  j["width"] = p.width;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": parse error: " + e.what());
  }
  Scenario sc;
  try {
    Reader r(root, "");
    {
      Reader g = r.child("grid");
      g.read("nx", sc.nx);
      g.read("ny", sc.ny);
      g.read("lx", sc.lx);
      g.read("ly", sc.ly);
      g.finish();
    }
    r.read("final_time", sc.final_time);
    r.read("time_step", sc.time_step);
    {
      Reader m = r.child("medium");
      m.read("c_lens", sc.medium.c_lens);
      m.read("c_fluid", sc.medium.c_fluid);
      m.read("b_lens", sc.medium.b_lens);
      m.read("b_fluid", sc.medium.b_fluid);
      m.read("k_lens", sc.medium.k_lens);
      m.read("k_fluid", sc.medium.k_fluid);
      m.finish();
    }
    {
      Reader p = r.child("phase_field");
      p.read("eps", sc.gl.eps);
      p.read("gamma", sc.gl.gamma);
      std::string quad = "consistent";
      p.read("quadrature", quad);
      if (quad == "consistent") {
        sc.quadrature = PotentialQuadrature::consistent;
      } else if (quad == "lumped") {
        sc.quadrature = PotentialQuadrature::lumped;
      } else {
        throw ConfigError(p.where("quadrature") + " must be consistent or lumped");
      }
      p.finish();
    }
    {
      Reader a = r.child("alpha");
      a.read("type", sc.alpha.kind);
      a.read("value", sc.alpha.value);
      a.read("amplitude", sc.alpha.amplitude);
      a.read("omega", sc.alpha.omega);
      a.finish();
    }
    {
      Reader s = r.child("source");
      if (s.has("edges")) {
        std::vector<std::string> names;
        s.read("edges", names);
        sc.source.edges.clear();
        for (const auto& n : names) {
          if (n == "bottom") sc.source.edges.push_back(Side::bottom);
          else if (n == "right") sc.source.edges.push_back(Side::right);
          else if (n == "top") sc.source.edges.push_back(Side::top);
          else if (n == "left") sc.source.edges.push_back(Side::left);
          else throw ConfigError(s.where("edges") + ": unknown edge '" + n + "'");
        }
      }
      s.read("amplitude", sc.source.amplitude);
      s.read("profile", sc.source.profile);
      s.read("duration", sc.source.duration);
      s.read("omega", sc.source.omega);
      s.read("shape", sc.source.shape);
      s.read("center", sc.source.center);
      s.read("spread", sc.source.spread);
      s.finish();
    }
    {
      Reader i = r.child("initial");
      i.read("amplitude", sc.initial.amplitude);
      i.read_vec2("center", sc.initial.center);
      i.read("spread", sc.initial.spread);
      i.finish();
    }
    read_region(r.child("focus"), sc.focus);
    {
      Reader t = r.child("target");
      t.read("mode", sc.target.mode);
      t.read("prefix", sc.target.prefix);
      read_phase(t.child("phi_true"), sc.target.phi_true);
      t.finish();
    }
    read_phase(r.child("initial_phase"), sc.initial_phase);
    {
      Reader o = r.child("optimizer");
      OptimizerConfig& c = sc.optimizer;
      o.read("step0", c.step0);
      o.read("armijo", c.armijo);
      o.read("backtrack", c.backtrack);
      o.read("step_growth", c.step_growth);
      o.read("max_iterations", c.max_iterations);
      o.read("max_backtracks", c.max_backtracks);
      o.read("stationarity_tol", c.stationarity_tol);
      o.read("smoothing", c.smoothing);
      o.read("barzilai_borwein", c.barzilai_borwein);
      o.read("history_stride", c.history_stride);
      o.read("pin_focus_to_fluid", c.pin_focus_to_fluid);
      o.finish();
    }
    {
      Reader s = r.child("solver");
      s.read("picard_tol", sc.solver.picard_tol);
      s.read("picard_max", sc.solver.picard_max);
      s.read("semi_lagged", sc.solver.semi_lagged);
      s.read("cg_tolerance", sc.solver.linear.tolerance);
      s.read("jacobi", sc.solver.linear.jacobi);
      s.finish();
    }
    {
      Reader s = r.child("gamma_sweep");
      s.read("eps", sc.sweep.eps);
      s.read("warm_start", sc.sweep.warm_start);
      s.finish();
    }
    {
      Reader p = r.child("profile");
      p.read("eps", sc.profile.eps);
      p.read("nodes", sc.profile.nodes);
      p.read("length", sc.profile.length);
      p.finish();
    }
    {
      Reader g = r.child("grad_check");
      g.read("probes", sc.grad_check.probes);
      g.read("deltas", sc.grad_check.deltas);
      g.finish();
    }
    {
      Reader o = r.child("output");
      o.read("directory", sc.output.directory);
      o.read("snapshot_stride", sc.output.snapshot_stride);
      o.finish();
    }
    r.finish();
    if (sc.target.mode == "file" && !base_dir.empty() && std::filesystem::path(sc.target.prefix).is_relative()) {
      sc.target.prefix = (base_dir / sc.target.prefix).string();
    }
    sc.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  return parse_scenario(ss.str(), path.string(), base);
}

std::string scenario_json(const Scenario& sc) {
  json j;
  j["grid"] = {{"nx", sc.nx}, {"ny", sc.ny}, {"lx", sc.lx}, {"ly", sc.ly}};
  j["final_time"] = sc.final_time;
  j["time_step"] = sc.time_step;
  const MediumParams& m = sc.medium;
  j["medium"] = {{"c_lens", m.c_lens}, {"c_fluid", m.c_fluid}, {"b_lens", m.b_lens},
                 {"b_fluid", m.b_fluid}, {"k_lens", m.k_lens}, {"k_fluid", m.k_fluid}};
  j["phase_field"] = {{"eps", sc.gl.eps},
                      {"gamma", sc.gl.gamma},
                      {"quadrature", sc.quadrature == PotentialQuadrature::consistent ? "consistent" : "lumped"}};
  j["alpha"] = {{"type", sc.alpha.kind}, {"value", sc.alpha.value}, {"amplitude", sc.alpha.amplitude},
                {"omega", sc.alpha.omega}};
  json edges = json::array();
  for (Side s : sc.source.edges) edges.push_back(side_name(s));
  j["source"] = {{"edges", edges},
                 {"amplitude", sc.source.amplitude},
                 {"profile", sc.source.profile},
                 {"duration", sc.source.duration},
                 {"omega", sc.source.omega},
                 {"shape", sc.source.shape},
                 {"center", sc.source.center},
                 {"spread", sc.source.spread}};
  j["initial"] = {{"amplitude", sc.initial.amplitude},
                  {"center", {sc.initial.center.x(), sc.initial.center.y()}},
                  {"spread", sc.initial.spread}};
  j["focus"] = region_json(sc.focus);
  j["target"] = {{"mode", sc.target.mode}, {"prefix", sc.target.prefix},
                 {"phi_true", phase_json(sc.target.phi_true)}};
  j["initial_phase"] = phase_json(sc.initial_phase);
  const OptimizerConfig& c = sc.optimizer;
  j["optimizer"] = {{"step0", c.step0},
                    {"armijo", c.armijo},
                    {"backtrack", c.backtrack},
                    {"step_growth", c.step_growth},
                    {"max_iterations", c.max_iterations},
                    {"max_backtracks", c.max_backtracks},
                    {"stationarity_tol", c.stationarity_tol},
                    {"smoothing", c.smoothing},
                    {"barzilai_borwein", c.barzilai_borwein},
                    {"history_stride", c.history_stride},
                    {"pin_focus_to_fluid", c.pin_focus_to_fluid}};
  j["solver"] = {{"picard_tol", sc.solver.picard_tol},
                 {"picard_max", sc.solver.picard_max},
                 {"semi_lagged", sc.solver.semi_lagged},
                 {"cg_tolerance", sc.solver.linear.tolerance},
                 {"jacobi", sc.solver.linear.jacobi}};
  j["gamma_sweep"] = {{"eps", sc.sweep.eps}, {"warm_start", sc.sweep.warm_start}};
  j["profile"] = {{"eps", sc.profile.eps}, {"nodes", sc.profile.nodes}, {"length", sc.profile.length}};
  j["grad_check"] = {{"probes", sc.grad_check.probes}, {"deltas", sc.grad_check.deltas}};
  j["output"] = {{"directory", sc.output.directory}, {"snapshot_stride", sc.output.snapshot_stride}};
  return j.dump(2);
}

Scenario refined(const Scenario& sc, int scale) {
  if (scale < 1) throw ConfigError("resolution scale must be >= 1");
  Scenario out = sc;
  out.nx *= scale;
  out.ny *= scale;
  out.time_step /= scale;
  out.validate();
  return out;
}

Grid scenario_grid(const Scenario& sc) { return build_grid(sc.nx, sc.ny, sc.lx, sc.ly); }

TimeGrid scenario_time(const Scenario& sc) { return {sc.final_time / sc.steps(), sc.steps()}; }

AlphaCoefficient scenario_alpha(const Scenario& sc) {
  if (sc.alpha.kind == "modulated") {
    return AlphaCoefficient::modulated(sc.alpha.value, sc.alpha.amplitude, sc.alpha.omega, sc.lx, sc.ly);
  }
  return AlphaCoefficient::constant(sc.alpha.value);
}

SourceSpec scenario_source(const Scenario& sc, const Grid& grid, const TimeGrid& time) {
  SourceSpec src = SourceSpec::zero(grid, time);
  BoundaryTrace shape = BoundaryTrace::zero(grid);
  for (Side s : sc.source.edges) {
    const bool horizontal = s == Side::bottom || s == Side::top;
    const int count = horizontal ? grid.nx() + 1 : grid.ny() + 1;
    const int cells = count - 1;
    for (int i = 0; i < count; ++i) {
      const Scalar frac = Scalar(i) / cells;
      const Scalar z = (frac - sc.source.center) / sc.source.spread;
      shape[s][i] = sc.source.shape == "gaussian" ? std::exp(-z * z) : 1.0;
    }
  }
  src.boundary.assign(time.levels(), BoundaryTrace::zero(grid));
  for (int n = 0; n < time.levels(); ++n) {
    const Scalar f = sc.source.time_factor(time.time(n));
    for (int s = 0; s < 4; ++s) src.boundary[n].sides[s] = f * shape.sides[s];
  }
  if (sc.initial.amplitude != 0) {
    src.u0 = grid.interpolate([&](Scalar x, Scalar y) {
      const Scalar r2 = (x - sc.initial.center.x()) * (x - sc.initial.center.x()) +
                        (y - sc.initial.center.y()) * (y - sc.initial.center.y());
      return sc.initial.amplitude * std::exp(-r2 / (sc.initial.spread * sc.initial.spread));
    });
  }
  return src;
}

Problem build_problem(const Scenario& sc) {
  sc.validate();
  const Grid grid = scenario_grid(sc);
  const TimeGrid time = scenario_time(sc);
  Problem pb{grid,
             time,
             sc.medium,
             sc.gl,
             scenario_alpha(sc),
             scenario_source(sc, grid, time),
             rasterize_indicator(grid, sc.focus),
             History::Zero(grid.node_count(), time.levels()),
             sc.solver,
             sc.quadrature};
  if (sc.target.mode == "synthesize") {
    const Vector phi_true = rasterize(grid, sc.target.phi_true);
    pb.target = solve_state(grid, phi_true, pb.medium, pb.alpha, pb.source, time, pb.solver).first.u;
  } else if (sc.target.mode == "file") {
    pb.target = read_trajectory(sc.target.prefix, grid, time.steps);
  }
  pb.validate();
  return pb;
}

}  // namespace lensopt
