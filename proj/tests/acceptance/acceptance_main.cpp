// Prints one PASS/FAIL line per acceptance criterion and a tally. The exit
// status is 0 once the suite has run; --strict makes any FAIL fatal.
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "stripflow/acceptance.hpp"

int main(int argc, char** argv) {
    stripflow::AcceptanceOptions opts;
    bool strict = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string item;
            while (std::getline(ss, item, ',')) opts.only.push_back(std::stoi(item));
        } else if (arg == "--threads" && i + 1 < argc) {
            opts.threads = static_cast<unsigned>(std::stoul(argv[++i]));
        } else if (arg == "--strict") {
            strict = true;
        } else if (arg == "--seed" && i + 1 < argc) {
            opts.seed = std::stoull(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only 1,2,...] [--threads N] [--seed S] [--strict]\n", argv[0]);
            return 2;
        }
    }
    int passed = 0, failed = 0;
    opts.on_result = [&](const stripflow::CriterionResult& r) {
        std::printf("%s  [%.1fs]\n", r.line().c_str(), r.seconds);
        std::fflush(stdout);
        ++(r.pass ? passed : failed);
    };
    stripflow::run_acceptance(opts);
    std::printf("%d passed, %d failed\n", passed, failed);
    return strict && failed > 0 ? EXIT_FAILURE : EXIT_SUCCESS;
}
