#include "migedu/accumulate.hpp"

#include <cstdlib>

namespace migedu {

Parallelism Parallelism::from_environment() {
    if (const char *env = std::getenv("MIGEDU_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return Parallelism{static_cast<unsigned>(n)};
        }
    }
    return Parallelism{std::max(1u, std::thread::hardware_concurrency())};
}

} // namespace migedu
