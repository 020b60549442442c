#include "sepstein/random.hpp"

namespace sepstein {

Mat random_density(int n, std::mt19937_64& rng, int rank) {
  if (rank <= 0) rank = n;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat g(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

BipartiteState random_state(int dimA, int dimB, std::mt19937_64& rng) {
  return BipartiteState(random_density(dimA * dimB, rng), dimA, dimB);
}

BipartiteState random_entangled_state(int dimA, int dimB, std::mt19937_64& rng,
                                      double min_neg) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Mat rho = random_density(dimA * dimB, rng);
    if (min_eig(partial_transpose(rho, dimA, dimB)) <= -min_neg)
      return BipartiteState(rho, dimA, dimB);
  }
  throw NumericalError("random_entangled_state: rejection sampling failed");
}

}  // namespace sepstein
