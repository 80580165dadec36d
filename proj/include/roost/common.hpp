#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace roost {

/// Simulation and wall-clock time, whole seconds.
using Seconds = std::int64_t;

using NodeId = std::uint32_t;
using GatewayId = std::uint32_t;
using PageNo = std::uint32_t;
using TaskId = std::uint16_t;
using TypeId = std::uint16_t;

using Bytes = std::vector<std::uint8_t>;

constexpr Seconds kSecondsPerDay = 86400;

/// Root of every exception this library throws. The concrete subclasses
/// carry the names used throughout the protocol documentation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Seconds time_of_day(Seconds t)
{
    Seconds r = t % kSecondsPerDay;
    return r < 0 ? r + kSecondsPerDay : r;
}

inline std::int64_t day_of(Seconds t)
{
    return t >= 0 ? t / kSecondsPerDay : (t - kSecondsPerDay + 1) / kSecondsPerDay;
}

} // namespace roost
