#include "dcuc/emission.hpp"

#include <algorithm>
#include <cmath>

namespace dcuc::emission {

double ramp_fraction(double g_from, double g_to, double g_max, double tau) {
  if (g_max <= 0.0) throw ValidationError("ramp_fraction: g_max must be positive");
  if (tau <= 0.0) throw ValidationError("ramp_fraction: tau must be positive");
  return std::abs(g_to - g_from) / (tau * g_max);
}

double static_hourly_emission(const StaticEmissionParams& p, double g) {
  if (g < 0.0) throw ValidationError("static_hourly_emission: negative output");
  return p.f0 + p.f1 * std::pow(g, p.n1);
}

std::array<TrajectorySegment, 3> transition_profile(double g_prev, double g,
                                                    double g_next, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ValidationError("transition_profile: tau must be in (0,1)");
  double half = 0.5 * tau;
  double in0 = 0.5 * (g_prev + g);
  double out1 = 0.5 * (g + g_next);
  return {TrajectorySegment{0.0, half, in0, g, std::abs(g - g_prev)},
          TrajectorySegment{half, 1.0 - half, g, g, 0.0},
          TrajectorySegment{1.0 - half, 1.0, g, out1, std::abs(g_next - g)}};
}

namespace {

// Integral over a half-transition of f1*g(t)^n1, expressed via the chord of
// x^(n1+1) between g and the adjacent midpoint. The quotient is 0/0 for a
// flat transition; below the switch threshold the analytic limit
// (n1+1)/2 * g^n1 is used instead.
double half_transition_chord(double g, double g_adj, double n1) {
  double scale = std::max({std::abs(g), std::abs(g_adj), 1.0});
  if (std::abs(g_adj - g) < 1e-9 * scale) {
    return 0.5 * (n1 + 1.0) * std::pow(g, n1);
  }
  double mid = 0.5 * (g + g_adj);
  return (std::pow(mid, n1 + 1.0) - std::pow(g, n1 + 1.0)) / (g_adj - g);
}

}  // namespace

double dynamic_increment(const DynamicEmissionParams& pd, double g_prev,
                         double g, double g_next) {
  double a = std::abs(g - g_prev);
  double b = std::abs(g_next - g);
  double up = (a > 0.0) ? std::pow(a, pd.n2) : 0.0;
  double dn = (b > 0.0) ? std::pow(b, pd.n2) : 0.0;
  return pd.b * pd.tau * (up + dn);
}

double dynamic_hourly_emission(const StaticEmissionParams& ps,
                               const DynamicEmissionParams& pd, double g_prev,
                               double g, double g_next) {
  if (g_prev < 0.0 || g < 0.0 || g_next < 0.0)
    throw ValidationError("dynamic_hourly_emission: negative output");
  double base = ps.f0 + ps.f1 * std::pow(g, ps.n1);
  // F0: static emission corrected for the time spent off g during the two
  // half-transitions assigned to this hour.
  double chord_out = half_transition_chord(g, g_next, ps.n1);
  double chord_in = half_transition_chord(g, g_prev, ps.n1);
  double f0_term = base + ps.f1 * pd.tau / (ps.n1 + 1.0) *
                              (-(ps.n1 + 1.0) * std::pow(g, ps.n1) + chord_out + chord_in);
  return f0_term + dynamic_increment(pd, g_prev, g, g_next);
}

std::vector<EmissionBlock> build_emission_blocks(
    const DynamicEmissionParams& pd, const std::vector<double>& breakpoints) {
  if (breakpoints.size() < 2)
    throw ValidationError("build_emission_blocks: need at least two breakpoints");
  if (breakpoints.front() != 0.0)
    throw ValidationError("build_emission_blocks: breakpoints must start at 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ValidationError("build_emission_blocks: breakpoints must be strictly increasing");
  }
  std::vector<EmissionBlock> blocks;
  blocks.reserve(breakpoints.size() - 1);
  double e = pd.n2 + 1.0;
  double prev_rate = 0.0;
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    double lo = breakpoints[i - 1];
    double hi = breakpoints[i];
    double rate = pd.b * pd.tau / e * (std::pow(hi, e) - std::pow(lo, e)) / (hi - lo);
    // chord slopes of a convex power are non-decreasing; assert so a bad
    // parameter set cannot silently produce a non-convex cost curve
    if (rate < prev_rate - 1e-12 * std::max(1.0, prev_rate))
      throw ValidationError("build_emission_blocks: non-monotone block rates");
    blocks.push_back(EmissionBlock{lo, hi, rate});
    prev_rate = rate;
  }
  return blocks;
}

std::vector<double> default_breakpoints(double ramp_limit, int blocks) {
  if (ramp_limit <= 0.0 || blocks < 1)
    throw ValidationError("default_breakpoints: bad arguments");
  std::vector<double> bp(static_cast<std::size_t>(blocks) + 1);
  for (int i = 0; i <= blocks; ++i) bp[static_cast<std::size_t>(i)] = ramp_limit * i / blocks;
  return bp;
}

}  // namespace dcuc::emission
