#include "markov/hash.hpp"

#include <cstring>
#include <cstdio>

namespace markov {

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t h) {
    for (double v : values) {
        char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        h = fnv1a(std::string_view(bytes, sizeof(double)), h);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace markov
