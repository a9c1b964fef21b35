#pragma once

#include <functional>
#include <string>
#include <vector>

#include "urnmix/catalog.hpp"
#include "urnmix/model.hpp"

namespace urnmix {

enum class VerifyLevel { Quick, Full };

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::Quick;
  unsigned threads = 1;
  // Replaces catalog eigenvalues before they are compared with anything.
  // Used to confirm that the suite notices a wrong formula.
  std::function<Rational(const ModelSpec&, const IrrepEntry&)> eigenvalue_override;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace urnmix
