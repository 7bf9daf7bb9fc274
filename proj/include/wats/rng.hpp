#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace wats {

// splitmix64 step; used to derive well-separated child seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from (root, path). Every replicate / subject / imputation
// gets its own stream so any unit of work is reproducible in isolation and the
// schedule of parallel workers cannot change the draws.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = root;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t part : path) {
    s = out ^ (part + 0x9e3779b97f4a7c15ULL);
    out = splitmix64(s);
  }
  return out;
}

// Deterministic random stream. mt19937_64 output is fully specified by the
// standard; uniforms and normals are produced by explicit bit manipulation and
// Box-Muller rather than std::*_distribution, whose streams are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (pairwise, one value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  // Index drawn from an (unnormalized) discrete law.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Symmetric square root with negative eigenvalues clamped to zero, so exactly
// singular covariances (e.g. D = 0) remain sampleable.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

// Clamp eigenvalues from below; used to repair estimated covariances.
Eigen::MatrixXd clip_to_psd(const Eigen::MatrixXd& m, double min_eigenvalue);

}  // namespace wats
