#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace nehari {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box in dimension 1 or 2. Only the first `dim` axes are used.
struct Box {
  int dim = 1;
  std::array<Interval, 2> axes{};

  static Box interval(double lo, double hi) { return Box{1, {Interval{lo, hi}, Interval{}}}; }
  static Box rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
    return Box{2, {Interval{x_lo, x_hi}, Interval{y_lo, y_hi}}};
  }

  bool contains_open(const Box& inner) const;  // closure of inner inside this open box
  bool overlaps(const Box& other) const;        // open boxes intersect
  double distance(const double* x) const;       // Euclidean distance to the closed box
  bool strictly_inside(const double* x) const;
  bool operator==(const Box&) const = default;
};

enum class Family { tilde, hat, bar };

std::string_view to_string(Family f);

struct Component {
  Family family = Family::tilde;
  Box region;
  double amp = 1.0;
};

struct ProblemSpec {
  Box domain;
  double p = 4.0;
  double mu = 100.0;
  double negative_amp = 1.0;
  double taper = 0.0;  // resolved to a positive value by parse_spec / resolve_taper
  std::vector<Component> components;

  int dim() const { return domain.dim; }
  std::vector<int> family_indices(Family f) const;
};

struct ValidationReport {
  int tilde = 0;
  int hat = 0;
  int bar = 0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  int total() const { return tilde + hat + bar; }
  bool ok() const { return errors.empty(); }
};

/// Checks every ProblemSpec invariant; never throws. An empty tilde or hat
/// family is a warning, and also an error when `for_solve` is set.
ValidationReport validate_spec(const ProblemSpec& spec, bool for_solve = false);

/// One tenth of the smallest gap between component regions (distances to
/// the domain boundary count as gaps).
double default_taper(const ProblemSpec& spec);

/// Parses the line-based `key = value` format; throws SpecError on the first
/// syntax or validation problem.
ProblemSpec parse_spec(std::string_view text);
ProblemSpec load_spec(const std::string& path);

}  // namespace nehari
