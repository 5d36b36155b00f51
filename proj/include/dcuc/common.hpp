#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcuc {

constexpr double kInf = 1e30;  // bound value treated as unbounded

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. The standard distributions are implementation-defined,
// so uniform/normal transforms are spelled out here to keep generated data
// byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Box-Muller; one value per call, the partner draw is discarded for
  // reproducibility independent of call pattern.
  double normal(double mean = 0.0, double sigma = 1.0);

 private:
  std::uint64_t state_;
};

// FNV-1a, used for input fingerprints in run manifests.
std::uint64_t fnv1a(const std::string& data);
std::string hash_hex(std::uint64_t h);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// "a, b, c" style joins for diagnostics.
std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace dcuc
