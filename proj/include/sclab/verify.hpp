#pragma once

#include <string>
#include <vector>

#include "sclab/config.hpp"
#include "sclab/serialize.hpp"

namespace sclab {

/// Outcome of one scripted theorem check. `relation` is "<=" for upper
/// bounds and ">=" for the adversarial lower-bound branches.
struct Verdict {
  std::string theorem;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation = "<=";
  bool pass = false;
  bool flagged = false;  // violates the explicit constant but not a 2x relaxation
  std::string detail;
  Json extra = Json::object();
};

const std::vector<std::string>& verify_ids();

/// Runs the check for `id` on the config's example, or on the theorem's
/// default instance when the config has none. IncompatibleConfig when the
/// example or class does not fit the theorem.
Verdict verify_theorem(const std::string& id, const ExperimentConfig& config);

Json verdict_to_json(const Verdict& v);

}  // namespace sclab
