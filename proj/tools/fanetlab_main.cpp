// Command line entry point. All real work lives in the library so that the
// commands stay testable; this file only owns argv and the exit code.

#include <cstdio>
#include <exception>

#include "fanet/errors.hpp"

namespace fanet {
int run_cli(int argc, char** argv);
}

int main(int argc, char** argv) {
    try {
        return fanet::run_cli(argc, argv);
    } catch (const fanet::ConfigError& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const fanet::IoError& e) {
        std::fprintf(stderr, "error: io: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 4;
    }
}
