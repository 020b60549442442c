#ifndef SEPSTEIN_RANDOM_HPP
#define SEPSTEIN_RANDOM_HPP

#include "sepstein/matrix.hpp"

#include <cstdint>
#include <random>

namespace sepstein {

// Ginibre-induced random density operator: G G^dag / tr, G an n x rank
// matrix of iid standard complex Gaussians.
Mat random_density(int n, std::mt19937_64& rng, int rank = 0);

BipartiteState random_state(int dimA, int dimB, std::mt19937_64& rng);

// Rejection-sampled NPT state; min_neg asks for a partial-transpose
// eigenvalue at most -min_neg so downstream robustness values are not
// vanishingly small.
BipartiteState random_entangled_state(int dimA, int dimB, std::mt19937_64& rng,
                                      double min_neg = 0.01);

}  // namespace sepstein

#endif
