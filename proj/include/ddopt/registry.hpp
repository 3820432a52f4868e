#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddopt/model.hpp"

namespace ddopt {

/// Looks up a hand-coded problem or a generator expression such as
/// "rand-quad(seed=7,d=6,m=2)" or "rand-quad(seed=3,d=8,m=2,bounds=1)".
/// Throws UnknownProblem.
ProblemSpec registry_get(const std::string& name);

/// All fixed (non-generated) problem names, sorted.
std::vector<std::string> registry_names();
/// The equality-constrained benchmark set.
std::vector<std::string> equality_suite();
/// Problems with nonnegativity bounds that admit a feasible point.
std::vector<std::string> bounded_suite();

struct RandQuadParams {
  std::uint64_t seed = 0;
  std::size_t d = 6;
  std::size_t m = 2;
  bool bounds = false;
};

std::optional<RandQuadParams> parse_rand_quad(const std::string& name);
std::string rand_quad_name(const RandQuadParams& p);

/// Convex quadratic objective, linear equalities and (optionally) x >= 0,
/// with a planted KKT point (x*, lambda*, mu*): the linear term is chosen so
/// that grad f(x*) + A lambda* - mu* = 0.
ProblemSpec make_rand_quad(const RandQuadParams& params);

/// The slack-form inequality example before lifting (for tests).
GeneralProblem slack_example_general();

}  // namespace ddopt
