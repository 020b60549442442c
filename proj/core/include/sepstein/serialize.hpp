#ifndef SEPSTEIN_SERIALIZE_HPP
#define SEPSTEIN_SERIALIZE_HPP

#include "sepstein/matrix.hpp"

#include <nlohmann/json.hpp>

namespace sepstein {

using json = nlohmann::json;

// { "dim": n, "entries": [[re, im], ...] }, row-major, n^2 pairs.
json matrix_to_json(const Mat& x);
Mat matrix_from_json(const json& j);

// Matrix schema plus "dimA"/"dimB".
json state_to_json(const Mat& rho, int dimA, int dimB);
BipartiteState state_from_json(const json& j);

}  // namespace sepstein

#endif
