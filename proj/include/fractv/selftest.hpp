#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fractv {

struct SelfCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Quick invariant checks over every module. Never throws; failures are reported.
std::vector<SelfCheck> run_selftest(std::uint64_t seed = 7);

}  // namespace fractv
