#ifndef DERMBENCH_CHECKS_HPP
#define DERMBENCH_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dermbench::checks {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    std::uint64_t seed = 0;
    // Test hook: breaks the index-negation symmetry of one radial mask so the
    // basis-reality check must fail (negative control for the suite itself).
    bool inject_non_hermitian_mask = false;
};

// The fixed property suite behind the `check` subcommand: partition
// invariants, basis reality, reconstruction, DFT linearity, expand/collapse
// equivalence, identity fallback, finite-difference gradients, the
// documented large-d overhead bound, and the GRPO anchor values. Order and
// names are stable across runs.
std::vector<CheckResult> run_all(const CheckOptions& options);

} // namespace dermbench::checks

#endif
