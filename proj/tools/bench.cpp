// Wall-clock comparison of the serial and OpenMP suite runners on a sweep grid.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "macsim/suite.hpp"

int main(int argc, char** argv) {
    CLI::App app{"macsim suite runner benchmark"};
    std::string alg = "NADS";
    std::string grid_file;
    int workers = omp_get_max_threads();
    int repeats = 1;
    app.add_option("--alg", alg, "algorithm");
    app.add_option("--grid", grid_file, "sweep grid JSON (default: n 4..32, w 4..32)");
    app.add_option("--workers", workers, "OpenMP threads for the parallel runner")->check(CLI::PositiveNumber);
    app.add_option("--repeats", repeats, "timed repetitions per runner")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        const auto kind = macsim::algorithm_from_string(alg);
        if (!kind) throw macsim::SimError("unknown algorithm '" + alg + "'");
        macsim::SweepGrid grid;
        if (grid_file.empty()) {
            grid.n = {4, 8, 16, 32};
            grid.w = {4, 8, 16, 32};
            grid.horizon = 5000;
        } else {
            grid = macsim::load_grid(grid_file);
        }
        const auto entries = macsim::sweep_entries({*kind, {}}, grid, macsim::StrategyKind::Burst);

        using clock = std::chrono::steady_clock;
        const auto time = [&](auto&& body) {
            const auto start = clock::now();
            for (int i = 0; i < repeats; ++i) body();
            return std::chrono::duration<double>(clock::now() - start).count() / repeats;
        };
        std::vector<macsim::ScenarioResult> serial, parallel;
        const double ts = time([&] { serial = macsim::run_suite_serial(entries); });
        const double tp = time([&] { parallel = macsim::run_suite_parallel(entries, workers); });

        bool same = serial.size() == parallel.size();
        for (std::size_t i = 0; same && i < serial.size(); ++i) same = serial[i].digest == parallel[i].digest;

        std::cout << "scenarios " << entries.size() << "\n"
                  << "serial    " << ts << " s\n"
                  << "parallel  " << tp << " s (" << workers << " workers)\n"
                  << "speedup   " << (tp > 0 ? ts / tp : 0) << "\n"
                  << "digests   " << (same ? "identical" : "DIFFER") << "\n";
        return same ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
