#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elastolab/field.hpp"
#include "elastolab/rng.hpp"

namespace elastolab {

enum class Edge { kLeft, kTop, kRight, kBottom };

inline const char* to_string(Edge e) {
  switch (e) {
    case Edge::kLeft: return "left";
    case Edge::kTop: return "top";
    case Edge::kRight: return "right";
    case Edge::kBottom: return "bottom";
  }
  throw std::invalid_argument("unknown edge");
}

inline Edge edge_from_string(const std::string& s) {
  if (s == "left") return Edge::kLeft;
  if (s == "top") return Edge::kTop;
  if (s == "right") return Edge::kRight;
  if (s == "bottom") return Edge::kBottom;
  throw std::invalid_argument("unknown edge: " + s);
}

struct Inclusion {
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
  double radius_mm = 0.0;
  double mu_pa = 0.0;
  double damping = 0.0;
};

struct Gradient {
  int axis = 0;  // 0 = x (columns), 1 = y (rows)
  double mu_start_pa = 0.0;
  double mu_end_pa = 0.0;
};

struct Excitation {
  Edge edge = Edge::kLeft;
  double amplitude_mm = 0.5;
};

/// Material sampling ranges; defaults follow the simulated dataset design.
struct PhantomRanges {
  double mu_min_pa = 1000.0;
  double mu_max_pa = 8000.0;
  double damping_min = 0.05;
  double damping_max = 0.3;
  double amplitude_min_mm = 0.3;
  double amplitude_max_mm = 0.9;
  double radius_min_mm = 5.0;
  double radius_max_mm = 20.0;
};

struct PhantomSpec {
  PhantomClass phantom_class = PhantomClass::kHomogeneous;
  double side_mm = 128.0;
  double spacing_mm = 1.0;
  double background_mu = 4000.0;
  double background_damping = 0.1;
  std::vector<Inclusion> inclusions;
  std::optional<Gradient> gradient;
  Excitation excitation;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(side_mm > 0.0) || !(spacing_mm > 0.0))
      throw std::invalid_argument("phantom side and spacing must be > 0");
    auto check_mu = [](double mu) {
      if (mu < 1000.0 || mu > 8000.0)
        throw std::invalid_argument("shear modulus outside [1000, 8000] Pa");
    };
    auto check_damping = [](double d) {
      if (d < 0.05 || d > 0.3) throw std::invalid_argument("damping outside [0.05, 0.3]");
    };
    check_mu(background_mu);
    check_damping(background_damping);
    if (excitation.amplitude_mm < 0.3 || excitation.amplitude_mm > 0.9)
      throw std::invalid_argument("excitation amplitude outside [0.3, 0.9] mm");
    if (gradient) {
      check_mu(gradient->mu_start_pa);
      check_mu(gradient->mu_end_pa);
      if (gradient->axis != 0 && gradient->axis != 1)
        throw std::invalid_argument("gradient axis must be 0 or 1");
    }
    for (const auto& inc : inclusions) {
      check_mu(inc.mu_pa);
      check_damping(inc.damping);
      if (!(inc.radius_mm > 0.0)) throw std::invalid_argument("inclusion radius must be > 0");
      if (inc.center_x_mm - inc.radius_mm < 0.0 || inc.center_x_mm + inc.radius_mm > side_mm ||
          inc.center_y_mm - inc.radius_mm < 0.0 || inc.center_y_mm + inc.radius_mm > side_mm)
        throw std::invalid_argument("inclusion not fully inside the domain");
    }
  }
};

namespace detail {

inline std::vector<Inclusion> sample_inclusions(Rng& rng, int count, bool fixed_centers,
                                                double side, const PhantomRanges& rg) {
  std::vector<Inclusion> out;
  out.reserve(count);
  const double qs[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    Inclusion inc;
    inc.radius_mm = rng.uniform(rg.radius_min_mm, rg.radius_max_mm);
    if (fixed_centers) {
      inc.center_x_mm = qs[out.size()][0] * side;
      inc.center_y_mm = qs[out.size()][1] * side;
      // Fixed quadrant centers; cap the radius so the disc stays inside.
      const double margin = std::min({inc.center_x_mm, inc.center_y_mm,
                                      side - inc.center_x_mm, side - inc.center_y_mm});
      inc.radius_mm = std::min(inc.radius_mm, 0.9 * margin);
    } else {
      inc.center_x_mm = rng.uniform(0.0, side);
      inc.center_y_mm = rng.uniform(0.0, side);
    }
    inc.mu_pa = rng.uniform(rg.mu_min_pa, rg.mu_max_pa);
    inc.damping = rng.uniform(rg.damping_min, rg.damping_max);

    const bool inside = inc.center_x_mm - inc.radius_mm >= 0.0 &&
                        inc.center_x_mm + inc.radius_mm <= side &&
                        inc.center_y_mm - inc.radius_mm >= 0.0 &&
                        inc.center_y_mm + inc.radius_mm <= side;
    bool overlaps = false;
    for (const auto& other : out) {
      const double dx = inc.center_x_mm - other.center_x_mm;
      const double dy = inc.center_y_mm - other.center_y_mm;
      if (std::sqrt(dx * dx + dy * dy) <= inc.radius_mm + other.radius_mm) overlaps = true;
    }
    if (inside && !overlaps) {
      out.push_back(inc);
      failures = 0;
    } else if (++failures > 1000) {
      throw std::runtime_error("inclusion rejection sampling exceeded 1000 retries");
    }
  }
  return out;
}

}  // namespace detail

inline PhantomSpec sample_spec(PhantomClass cls, std::uint64_t seed,
                               double side_mm = 128.0, double spacing_mm = 1.0,
                               const PhantomRanges& ranges = {}) {
  Rng rng(seed);
  PhantomSpec spec;
  spec.phantom_class = cls;
  spec.side_mm = side_mm;
  spec.spacing_mm = spacing_mm;
  spec.seed = seed;
  spec.background_mu = rng.uniform(ranges.mu_min_pa, ranges.mu_max_pa);
  spec.background_damping = rng.uniform(ranges.damping_min, ranges.damping_max);
  spec.excitation.amplitude_mm = rng.uniform(ranges.amplitude_min_mm, ranges.amplitude_max_mm);
  spec.excitation.edge = static_cast<Edge>(rng.below(4));

  switch (cls) {
    case PhantomClass::kHomogeneous:
      break;
    case PhantomClass::kLinearGradient: {
      Gradient g;
      g.axis = static_cast<int>(rng.below(2));
      g.mu_start_pa = rng.uniform(ranges.mu_min_pa, ranges.mu_max_pa);
      g.mu_end_pa = rng.uniform(ranges.mu_min_pa, ranges.mu_max_pa);
      spec.gradient = g;
      break;
    }
    case PhantomClass::kFourRandomInclusions:
      spec.inclusions = detail::sample_inclusions(rng, 4, false, side_mm, ranges);
      break;
    case PhantomClass::kTwoRandomInclusions:
      spec.inclusions = detail::sample_inclusions(rng, 2, false, side_mm, ranges);
      break;
    case PhantomClass::kFourFixedInclusions:
      spec.inclusions = detail::sample_inclusions(rng, 4, true, side_mm, ranges);
      break;
  }
  spec.validate();
  return spec;
}

// Renders the stiffness and damping maps on the node grid x = c*spacing,
// y = r*spacing with round(side/spacing)+1 nodes per axis. Region edges are
// hard: a node takes the value of the region containing it, no feathering.
inline std::pair<ScalarField, ScalarField> render_stiffness(const PhantomSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(std::lround(spec.side_mm / spec.spacing_mm)) + 1;
  ScalarField mu(n, n, spec.spacing_mm);
  ScalarField damping(n, n, spec.spacing_mm);

  for (int r = 0; r < n; ++r) {
    const double y = r * spec.spacing_mm;
    for (int c = 0; c < n; ++c) {
      const double x = c * spec.spacing_mm;
      double mu_v = spec.background_mu;
      double eta_v = spec.background_damping;
      if (spec.gradient) {
        const double t = (spec.gradient->axis == 0 ? x : y) / spec.side_mm;
        mu_v = spec.gradient->mu_start_pa + (spec.gradient->mu_end_pa - spec.gradient->mu_start_pa) * t;
      }
      for (const auto& inc : spec.inclusions) {
        const double dx = x - inc.center_x_mm;
        const double dy = y - inc.center_y_mm;
        if (dx * dx + dy * dy <= inc.radius_mm * inc.radius_mm) {
          mu_v = inc.mu_pa;
          eta_v = inc.damping;
          break;
        }
      }
      mu.at(r, c) = mu_v;
      damping.at(r, c) = eta_v;
    }
  }
  return {std::move(mu), std::move(damping)};
}

inline nlohmann::json to_json(const PhantomSpec& spec) {
  nlohmann::json j;
  j["phantom_class"] = to_string(spec.phantom_class);
  j["side_mm"] = spec.side_mm;
  j["spacing_mm"] = spec.spacing_mm;
  j["background_mu"] = spec.background_mu;
  j["background_damping"] = spec.background_damping;
  j["inclusions"] = nlohmann::json::array();
  for (const auto& inc : spec.inclusions) {
    j["inclusions"].push_back({{"center", {inc.center_x_mm, inc.center_y_mm}},
                               {"radius", inc.radius_mm},
                               {"mu", inc.mu_pa},
                               {"damping", inc.damping}});
  }
  if (spec.gradient) {
    j["gradient"] = {{"axis", spec.gradient->axis},
                     {"mu_start", spec.gradient->mu_start_pa},
                     {"mu_end", spec.gradient->mu_end_pa}};
  }
  j["excitation"] = {{"edge", to_string(spec.excitation.edge)},
                     {"amplitude", spec.excitation.amplitude_mm}};
  j["seed"] = spec.seed;
  return j;
}

inline PhantomSpec spec_from_json(const nlohmann::json& j) {
  PhantomSpec spec;
  spec.phantom_class = phantom_class_from_string(j.at("phantom_class").get<std::string>());
  spec.side_mm = j.at("side_mm").get<double>();
  spec.spacing_mm = j.at("spacing_mm").get<double>();
  spec.background_mu = j.at("background_mu").get<double>();
  spec.background_damping = j.at("background_damping").get<double>();
  for (const auto& ij : j.value("inclusions", nlohmann::json::array())) {
    Inclusion inc;
    inc.center_x_mm = ij.at("center")[0].get<double>();
    inc.center_y_mm = ij.at("center")[1].get<double>();
    inc.radius_mm = ij.at("radius").get<double>();
    inc.mu_pa = ij.at("mu").get<double>();
    inc.damping = ij.at("damping").get<double>();
    spec.inclusions.push_back(inc);
  }
  if (j.contains("gradient")) {
    Gradient g;
    g.axis = j["gradient"].at("axis").get<int>();
    g.mu_start_pa = j["gradient"].at("mu_start").get<double>();
    g.mu_end_pa = j["gradient"].at("mu_end").get<double>();
    spec.gradient = g;
  }
  spec.excitation.edge = edge_from_string(j.at("excitation").at("edge").get<std::string>());
  spec.excitation.amplitude_mm = j.at("excitation").at("amplitude").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

}  // namespace elastolab
