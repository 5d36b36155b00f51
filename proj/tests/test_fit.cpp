#include "doctest.h"

#include <cmath>

#include "dcuc/fit.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace dcuc;
using namespace dcuc::emission;

namespace {

const StaticEmissionParams kTruthStatic{11.53, 0.86, 1.02};
const DynamicEmissionParams kTruthDynamic{6.12, 0.34, 0.2};

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("noiseless samples give the generating parameters back") {
  SyntheticOptions opts;
  opts.static_share = 0.5;
  opts.noise_sigma = 0.0;
  opts.seed = 11;
  auto samples = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 400, opts);
  REQUIRE(samples.size() == 400);

  StaticFit sf = fit_static(samples);
  CHECK(rel_err(sf.params.f0, kTruthStatic.f0) <= 1e-4);
  CHECK(rel_err(sf.params.f1, kTruthStatic.f1) <= 1e-4);
  CHECK(rel_err(sf.params.n1, kTruthStatic.n1) <= 1e-4);
  CHECK(sf.residual_norm <= 1e-6 * sf.sample_count);
  CHECK(sf.sample_count >= 150);

  DynamicFit df = fit_dynamic(samples, sf.params, 150.0);
  CHECK(df.converged);
  CHECK(df.identified);
  CHECK(rel_err(df.params.b, kTruthDynamic.b) <= 1e-3);
  CHECK(rel_err(df.params.tau, kTruthDynamic.tau) <= 1e-3);
  CHECK(rel_err(df.params.n2, kTruthDynamic.n2) <= 1e-3);
  CHECK(df.sample_count >= 10);
}

TEST_CASE("interval coverage under five percent noise") {
  int trials = 200;
  int cover_static = 0, cover_dynamic = 0;
  int cover_b = 0, cover_tau = 0, cover_n2 = 0;
  int converged = 0;
  for (int trial = 0; trial < trials; ++trial) {
    SyntheticOptions opts;
    opts.static_share = 0.5;
    opts.noise_sigma = 0.05;
    opts.seed = 1000 + static_cast<std::uint64_t>(trial);
    auto samples = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 400, opts);

    StaticFit sf = fit_static(samples);
    bool s_ok = std::abs(sf.params.f0 - kTruthStatic.f0) <= 3.0 * sf.se_f0 &&
                std::abs(sf.params.f1 - kTruthStatic.f1) <= 3.0 * sf.se_f1 &&
                std::abs(sf.params.n1 - kTruthStatic.n1) <= 3.0 * sf.se_n1;
    cover_static += s_ok;

    DynamicFit df = fit_dynamic(samples, sf.params, 150.0);
    converged += df.converged;
    int b_ok = std::abs(df.params.b - kTruthDynamic.b) <= 3.0 * df.se_b;
    int t_ok = std::abs(df.params.tau - kTruthDynamic.tau) <= 3.0 * df.se_tau;
    int n_ok = std::abs(df.params.n2 - kTruthDynamic.n2) <= 3.0 * df.se_n2;
    cover_b += b_ok;
    cover_tau += t_ok;
    cover_n2 += n_ok;
    cover_dynamic += b_ok && t_ok && n_ok;
  }
  CHECK(converged == trials);
  CHECK(cover_static >= 190);   // 95% of 200
  CHECK(cover_b >= 190);
  CHECK(cover_tau >= 190);
  CHECK(cover_n2 >= 190);
}

TEST_CASE("flat telemetry leaves the ramp parameters unidentified") {
  SyntheticOptions opts;
  opts.static_share = 1.0;
  opts.seed = 5;
  auto samples = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 200, opts);
  for (const auto& s : samples) CHECK(s.static_flag);

  StaticFit sf = fit_static(samples);
  CHECK(rel_err(sf.params.n1, kTruthStatic.n1) <= 1e-4);

  DynamicFit df = fit_dynamic(samples, sf.params, 150.0);
  CHECK_FALSE(df.identified);
  CHECK(df.params.b == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fitting guards reject unusable sample sets") {
  CHECK_THROWS_AS(fit_static({}), ValidationError);

  std::vector<EmissionSample> same(5);
  for (auto& s : same) {
    s.g_prev = s.g = s.g_next = 50.0;
    s.emission = 60.0;
    s.static_flag = true;
  }
  CHECK_THROWS_AS(fit_static(same), ValidationError);

  // plenty of flat hours but too few ramping ones below the threshold
  SyntheticOptions opts;
  opts.static_share = 1.0;
  opts.seed = 9;
  auto flat = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 30, opts);
  flat[0].static_flag = false;
  flat[0].g_prev = 40.0;
  flat[0].g = 50.0;
  flat[0].g_next = 80.0;
  CHECK_THROWS_AS(fit_dynamic(flat, kTruthStatic, 150.0), ValidationError);
}

TEST_CASE("sample csv round trip") {
  SyntheticOptions opts;
  opts.static_share = 0.4;
  opts.noise_sigma = 0.02;
  opts.seed = 21;
  auto samples = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 250.0, 60, opts);

  auto back = samples_from_csv(samples_to_csv(samples));
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].g_prev == samples[i].g_prev);
    CHECK(back[i].g == samples[i].g);
    CHECK(back[i].g_next == samples[i].g_next);
    CHECK(back[i].emission == samples[i].emission);
    CHECK(back[i].static_flag == samples[i].static_flag);
  }

  CHECK_THROWS_AS(samples_from_csv("g_prev,g,g_next,emission_tCO2\n1,2\n"), ParseError);
}

TEST_CASE("synthetic generation is seed deterministic") {
  SyntheticOptions opts;
  opts.noise_sigma = 0.05;
  opts.seed = 33;
  auto a = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 50, opts);
  auto b = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 50, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].g == b[i].g);
    CHECK(a[i].emission == b[i].emission);
  }
  opts.seed = 34;
  auto c = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 50, opts);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= (a[i].emission != c[i].emission);
  CHECK(differs);
}

TEST_CASE("fit report serializes both stages") {
  SyntheticOptions opts;
  opts.seed = 3;
  auto samples = generate_synthetic_samples(kTruthStatic, kTruthDynamic, 300.0, 300, opts);
  StaticFit sf = fit_static(samples);
  DynamicFit df = fit_dynamic(samples, sf.params, 150.0);

  auto doc = nlohmann::json::parse(fit_report_json(sf, df));
  CHECK(doc.contains("static"));
  CHECK(doc.contains("dynamic"));
  CHECK(doc["static"]["f0"].get<double>() == doctest::Approx(sf.params.f0));
  CHECK(doc["static"]["se_n1"].get<double>() == doctest::Approx(sf.se_n1));
  CHECK(doc["dynamic"]["tau"].get<double>() == doctest::Approx(df.params.tau));
  CHECK(doc["dynamic"]["identified"].get<bool>() == df.identified);

  auto only_static = nlohmann::json::parse(fit_report_json(sf, std::nullopt));
  CHECK(only_static.contains("static"));
  CHECK_FALSE(only_static.contains("dynamic"));
}
