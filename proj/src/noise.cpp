#include "gobs/noise.hpp"

#include <cmath>

namespace gobs {

double NormalSampler::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * rng_.uniform() - 1.0;
    v = 2.0 * rng_.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  have_spare_ = true;
  return u * m;
}

Vector NormalSampler::vector(int dim) {
  if (dim <= 0) throw UsageError("NormalSampler: dim must be positive");
  Vector z(dim);
  for (int i = 0; i < dim; ++i) z(i) = next();
  return z;
}

Vector NormalSampler::bounded_vector(int dim, double amplitude) {
  if (amplitude < 0.0) throw UsageError("NormalSampler: negative amplitude");
  Vector z = vector(dim);
  const double n = z.norm();
  if (n > 1.0) z /= n;
  return amplitude * z;
}

}  // namespace gobs
