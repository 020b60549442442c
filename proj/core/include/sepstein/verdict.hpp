#ifndef SEPSTEIN_VERDICT_HPP
#define SEPSTEIN_VERDICT_HPP

#include "sepstein/matrix.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace sepstein {

enum class Verdict { In, Out, Unknown };

const char* to_string(Verdict v);

// Three-valued membership result. In/Out carry a certificate that can be
// re-verified by direct evaluation (witness matrix, decomposition weights,
// or a violating state).
struct MembershipVerdict {
  Verdict status = Verdict::Unknown;
  std::string model;
  nlohmann::json certificate;   // shape depends on the test
  Mat witness;                  // optional matrix certificate (empty if unused)

  nlohmann::json to_json() const;
};

}  // namespace sepstein

#endif
