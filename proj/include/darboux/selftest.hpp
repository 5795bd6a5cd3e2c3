#pragma once

#include <string>
#include <vector>

namespace darboux {

// Built-in correctness suite over the library's numerical kernels, runnable
// from the command line without any input files. Each section pins its own
// tolerances; reported values are the measured worst cases.
struct SelftestCheck {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct SelftestSection {
    std::string name;
    std::vector<SelftestCheck> checks;
    double seconds = 0.0;
    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Series evaluation against closed trigonometric forms.
SelftestSection selftest_series();
// Weighted rules against exact moments, and principal values with closed forms.
SelftestSection selftest_quadrature();
// Round trips of the three endpoint classes of the Cauchy-kernel inversion.
SelftestSection selftest_inversion();
// Round trip of the density pair transform on random polynomial data.
SelftestSection selftest_density_algebra();
// Product-integration solve against forward-generated data, plus the
// weighted-moment solvability check on a known violating/compliant pair.
SelftestSection selftest_volterra();

std::vector<SelftestSection> run_selftest();

} // namespace darboux
