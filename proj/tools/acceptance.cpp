// Runs every acceptance criterion and prints one line per criterion.
// Usage: nhsim_acceptance [suite]

#include <iostream>

#include "nhsim/acceptance.hpp"
#include "nhsim/error.hpp"

int main(int argc, char** argv) {
    const std::string suite = argc > 1 ? argv[1] : "all";
    try {
        bool ok = true;
        int passed = 0, total = 0;
        for (const auto& r : nhsim::acceptance::run_suite(suite)) {
            std::cout << (r.pass() ? "PASS " : "FAIL ") << nhsim::acceptance::summary_line(r) << std::endl;
            ok = ok && r.pass();
            passed += r.pass();
            ++total;
        }
        std::cout << passed << '/' << total << " criteria passed\n";
        return ok ? 0 : 1;
    } catch (const nhsim::Error& e) {
        std::cerr << "nhsim_acceptance: " << e.what() << '\n';
        return 2;
    }
}
