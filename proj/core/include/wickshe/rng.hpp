#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace wickshe {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
[[nodiscard]] PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Counter-based engine. Words 2-3 of the counter hold the substream index,
// words 0-1 count 128-bit blocks within it.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(PhiloxKey key, std::uint64_t substream) : key_(key), substream_(substream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    [[nodiscard]] std::uint64_t substream() const { return substream_; }

private:
    PhiloxKey key_;
    std::uint64_t substream_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
};

// Derives a key from the master seed and a stream name ("paths", "noise", ...).
[[nodiscard]] PhiloxKey stream_key(std::uint64_t seed, std::string_view name);

class StreamFactory {
public:
    explicit StreamFactory(std::uint64_t seed) : seed_(seed) {}

    [[nodiscard]] PhiloxEngine engine(std::string_view name, std::uint64_t substream) const {
        return {stream_key(seed_, name), substream};
    }
    // A factory for a named child whose streams do not overlap the parent's.
    [[nodiscard]] StreamFactory child(std::string_view name) const;
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace wickshe
