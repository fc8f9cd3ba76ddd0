#pragma once

#include <string>
#include <vector>

namespace kpa {

struct ConformanceCheck {
    std::string name;
    bool passed;
};

/// ZUC keystream checks against the published standard test vectors.
std::vector<ConformanceCheck> zuc_conformance();

/// Milenage f1..f5 checks against the published conformance test sets.
std::vector<ConformanceCheck> milenage_conformance();

/// SHA-256 / HMAC-SHA-256 checks against their specification vectors.
std::vector<ConformanceCheck> hmac_conformance();

/// All of the above.
std::vector<ConformanceCheck> run_all_conformance();

}  // namespace kpa
