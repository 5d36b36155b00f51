#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcuc/emission.hpp"

namespace dcuc::emission {

struct StaticFit {
  StaticEmissionParams params;
  double se_f0 = 0.0;
  double se_f1 = 0.0;
  double se_n1 = 0.0;
  double residual_norm = 0.0;  // sqrt(SSE)
  int sample_count = 0;
};

struct DynamicFit {
  DynamicEmissionParams params;
  double se_b = 0.0;
  double se_tau = 0.0;
  double se_n2 = 0.0;
  double residual_norm = 0.0;
  int sample_count = 0;
  bool converged = true;
  // With no ramping signal b collapses to 0 and tau/n2 carry no information.
  bool identified = true;
};

// Least squares of emission = f0 + f1*g^n1 over the static samples.
// The exponent is located by bracketing + golden-section search with the
// (f0, f1) pair solved linearly at each trial n1.
StaticFit fit_static(const std::vector<EmissionSample>& samples);

// Nonlinear least squares of (b, tau, n2) against the full hourly model
// with the static parameters held fixed, over ramping samples with
// g < threshold. Levenberg-Marquardt with box constraints and 8 seeded
// starts; the product b*tau dominates the ramp term, so single starts can
// stall in shallow valleys.
DynamicFit fit_dynamic(const std::vector<EmissionSample>& samples,
                       const StaticEmissionParams& ps, double threshold);

struct SyntheticOptions {
  double static_share = 0.5;   // fraction of samples with flat output
  double noise_sigma = 0.0;    // relative (fraction of the clean value)
  std::uint64_t seed = 1;
};

// Replacement for the proprietary plant telemetry: flat-output hours over
// the whole operating range plus ramping triples concentrated in the
// low-output region, emissions drawn from the hourly model.
std::vector<EmissionSample> generate_synthetic_samples(
    const StaticEmissionParams& ps, const DynamicEmissionParams& pd,
    double g_max, int count, const SyntheticOptions& opts);

// CSV with header g_prev,g,g_next,emission_tCO2
std::string samples_to_csv(const std::vector<EmissionSample>& samples);
std::vector<EmissionSample> samples_from_csv(const std::string& text);

// JSON fit report: estimates, standard errors, residual norms, counts.
std::string fit_report_json(const std::optional<StaticFit>& sf,
                            const std::optional<DynamicFit>& df);

}  // namespace dcuc::emission
