#include "frac/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace frac {

std::size_t num_threads() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FRAC_NUM_THREADS")) {
        const std::string_view s(env);
        std::size_t cap = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc{} && ptr == s.data() + s.size() && cap > 0) n = std::min(n, cap);
    }
    return n;
}

}  // namespace frac
