#pragma once

#include "rowrl/common.hpp"

namespace rowrl {

// Zero-mean Gaussian exploration noise with geometrically decaying sigma.
// `scale` is 1 by default; 1/3 maps sigma to the 3-std envelope reading.
class NoiseProcess {
 public:
  NoiseProcess(double sigma0, double decay, double scale, std::uint64_t seed,
               std::uint64_t stream)
      : sigma_(sigma0), decay_(decay), scale_(scale),
        rng_(make_rng(seed, stream)) {
    if (sigma0 < 0) throw DomainError("NoiseProcess: sigma0 must be >= 0");
    if (decay <= 0 || decay > 1)
      throw DomainError("NoiseProcess: decay must be in (0,1]");
  }

  double sigma() const { return sigma_; }

  double sample() { return scale_ * sigma_ * gaussian(rng_); }

  void apply_decay() { sigma_ *= decay_; }

 private:
  double sigma_;
  double decay_;
  double scale_;
  std::mt19937_64 rng_;
};

}  // namespace rowrl
