// Full-scale end-to-end gate: run the complete pipeline at desk scale, then
// evaluate every self-validation criterion and print one PASS/FAIL line per
// criterion. Exits nonzero if any criterion fails.
//
// Artifacts land in ACCEPTANCE_WORK_DIR (inside the build tree) and are
// reused on rerun; delete the directory to force a recomputation from
// scratch.

#include <dynobench/acceptance.hpp>
#include <dynobench/pipeline.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

int main() {
    using namespace dynobench;
    const std::filesystem::path work{ACCEPTANCE_WORK_DIR};

    try {
        RunConfig cfg;
        const ReproduceResult r =
            reproduce(cfg, Scale::Desk, work, /*force=*/false, &std::cout);
        const std::vector<CriterionCheck> checks =
            acceptance_criteria(r, work / "self-check", &std::cout);

        std::cout << '\n';
        write_acceptance_report(checks, std::cout);
        std::ofstream report(r.paths.acceptance_txt);
        write_acceptance_report(checks, report);
        std::cout << "report -> " << r.paths.acceptance_txt.string() << '\n';
        return all_passed(checks) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return 1;
    }
}
