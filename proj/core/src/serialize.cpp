#include "sepstein/serialize.hpp"

namespace sepstein {

json matrix_to_json(const Mat& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("matrix_to_json: not square");
  json entries = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      entries.push_back({x(i, j).real(), x(i, j).imag()});
  return json{{"dim", x.rows()}, {"entries", std::move(entries)}};
}

Mat matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    throw std::invalid_argument("matrix_from_json: need dim and entries");
  int n = j.at("dim").get<int>();
  check_dim_cap(n);
  const auto& e = j.at("entries");
  if (!e.is_array() || e.size() != static_cast<size_t>(n) * n)
    throw std::invalid_argument("matrix_from_json: entries must hold dim^2 pairs");
  Mat x(n, n);
  size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c, ++k) {
      const auto& p = e[k];
      if (!p.is_array() || p.size() != 2)
        throw std::invalid_argument("matrix_from_json: entry is not a [re,im] pair");
      x(i, c) = Complex(p[0].get<double>(), p[1].get<double>());
    }
  return x;
}

json state_to_json(const Mat& rho, int dimA, int dimB) {
  json j = matrix_to_json(rho);
  j["dimA"] = dimA;
  j["dimB"] = dimB;
  return j;
}

BipartiteState state_from_json(const json& j) {
  if (!j.contains("dimA") || !j.contains("dimB"))
    throw std::invalid_argument("state_from_json: need dimA and dimB");
  Mat x = matrix_from_json(j);
  return BipartiteState(x, j.at("dimA").get<int>(), j.at("dimB").get<int>());
}

}  // namespace sepstein
