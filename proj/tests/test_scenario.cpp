#include "lensopt/io.hpp"
#include "lensopt/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace lensopt;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& msg, const std::string& word) { return msg.find(word) != std::string::npos; }

}  // namespace

TEST_CASE("minimal file fills defaults") {
  const Scenario sc = parse_scenario("{}");
  CHECK(sc.nx == 32);
  CHECK(sc.steps() == 64);
  CHECK(sc.medium.c_fluid == 1.5);
  CHECK(sc.target.mode == "synthesize");
  CHECK(sc.initial_phase.constant);
  // Canonical output parses back to the same canonical text.
  CHECK(scenario_json(parse_scenario(scenario_json(sc))) == scenario_json(sc));
}

TEST_CASE("validation errors name the offending key") {
  CHECK(mentions(error_of(R"({"final_time": 1.0, "time_step": 0.3})"), "time_step"));
  CHECK(mentions(error_of(R"({"focus": {"type": "disk", "center": [0.95, 0.5], "radius": 0.2}})"), "focus"));
  CHECK(mentions(error_of(R"({"grid": {"nx": 1}})"), "grid"));
  CHECK(mentions(error_of(R"({"grid": {"nx": 8, "nz": 3}})"), "grid.nz"));
  CHECK(mentions(error_of(R"({"medium": {"c_lens": "fast"}})"), "medium.c_lens"));
  CHECK(mentions(error_of(R"({"medium": {"c_lens": 3.0}})"), "medium"));
  CHECK(mentions(error_of(R"({"source": {"edges": ["north"]}})"), "north"));
  CHECK(mentions(error_of(R"({"target": {"mode": "file", "prefix": "missing/ud"}})"), "target.prefix"));
  CHECK(mentions(error_of("{\n  \"grid\": {\"nx\": 4,\n}"), "line"));
}

TEST_CASE("refinement scales grid and step") {
  const Scenario sc = refined(parse_scenario(R"({"grid": {"nx": 8, "ny": 4}, "time_step": 0.125})"), 2);
  CHECK(sc.nx == 16);
  CHECK(sc.ny == 8);
  CHECK(sc.steps() == 16);
  CHECK_THROWS_AS(refined(sc, 0), ConfigError);
}

TEST_CASE("region geometry") {
  Region disk{Region::Kind::disk, {0.5, 0.5}, 0.2, {}, {}};
  CHECK(disk.signed_distance(0.5, 0.5) == doctest::Approx(-0.2));
  CHECK(disk.signed_distance(1.0, 0.5) == doctest::Approx(0.3));
  CHECK(disk.inside_box(1.0, 1.0));
  Region rect{Region::Kind::rectangle, {}, 0, {0.2, 0.2}, {0.6, 0.4}};
  CHECK(rect.signed_distance(0.4, 0.3) == doctest::Approx(-0.1));
  CHECK(rect.signed_distance(0.9, 0.8) == doctest::Approx(0.5));
  CHECK_FALSE(Region{Region::Kind::rectangle, {}, 0, {0.2, 0.2}, {1.6, 0.4}}.inside_box(1.0, 1.0));
}

TEST_CASE("synthetic target matches the forward solve at the truth") {
  const Scenario sc = parse_scenario(R"({
    "grid": {"nx": 8, "ny": 8}, "final_time": 0.25, "time_step": 0.03125,
    "target": {"phi_true": {"type": "disk", "center": [0.4, 0.5], "radius": 0.2}}
  })");
  const Problem pb = build_problem(sc);
  const Vector truth = rasterize(pb.grid, sc.target.phi_true);
  CHECK(evaluate_objective(pb, truth).tracking == 0.0);
  CHECK(pb.focus.sum() > 0);
  CHECK(pb.source.boundary.size() == 9u);
}

TEST_CASE("file targets are read from snapshots") {
  const Scenario synth = parse_scenario(R"({"grid": {"nx": 6, "ny": 6}, "final_time": 0.25, "time_step": 0.0625,
    "target": {"phi_true": {"type": "disk", "center": [0.4, 0.5], "radius": 0.2}}})");
  const Problem a = build_problem(synth);
  std::filesystem::create_directories("scenario_data");
  write_trajectory("scenario_data", a.grid, "ud", a.target);
  {
    std::ofstream cfg("scenario_data/file.json");
    cfg << R"({"grid": {"nx": 6, "ny": 6}, "final_time": 0.25, "time_step": 0.0625,
      "target": {"mode": "file", "prefix": "ud"}})";
  }
  const Problem b = build_problem(load_scenario("scenario_data/file.json"));
  CHECK(b.target == a.target);
}
