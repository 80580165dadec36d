#pragma once

// Sensing task configurations and the rules the scheduler evaluates.
//
// A task starts when every entry condition holds and stops when any exit
// condition holds. While running it samples every sample_period seconds,
// but only at instants where all gate conditions hold. Hysteresis comes
// from asymmetric entry/exit thresholds, not from scheduler memory.

#include <roost/battery.hpp>
#include <roost/bytes.hpp>
#include <roost/common.hpp>

#include <json.hpp>

#include <map>
#include <span>
#include <variant>
#include <vector>

namespace roost {

/// Time-of-day window [start, end); wraps past midnight when start > end.
struct TimeWindow {
    Seconds start_s = 0;
    Seconds end_s = 0;
    bool operator==(const TimeWindow&) const = default;
};
struct BatteryAtLeast {
    std::uint16_t mv = 0;
    bool operator==(const BatteryAtLeast&) const = default;
};
struct BatteryBelow {
    std::uint16_t mv = 0;
    bool operator==(const BatteryBelow&) const = default;
};
struct MotionIs {
    bool moving = true;
    bool operator==(const MotionIs&) const = default;
};
struct SamplesAtLeast {
    std::uint32_t count = 0;
    bool operator==(const SamplesAtLeast&) const = default;
};

using Condition = std::variant<TimeWindow, BatteryAtLeast, BatteryBelow, MotionIs, SamplesAtLeast>;

/// Inputs a condition is evaluated against.
struct ConditionContext {
    Seconds time = 0;
    std::uint16_t battery_mv = 0;
    bool motion = false;
    std::uint32_t samples_taken = 0;
};

bool holds(const Condition& c, const ConditionContext& ctx);
bool all_hold(std::span<const Condition> conds, const ConditionContext& ctx);
bool any_holds(std::span<const Condition> conds, const ConditionContext& ctx);

struct TaskConfig {
    TaskId task_id = 0;
    TypeId type_id = 0;
    Seconds sample_period_s = 60;
    std::vector<Condition> entry;
    std::vector<Condition> exit;
    std::vector<Condition> gate;
    std::uint8_t priority = 0;
    Activity activity = Activity::sensor_sample;
    /// Seconds the sampled device stays powered per sample.
    double on_time_s = 1.0;

    bool operator==(const TaskConfig&) const = default;
};

class InvalidTaskConfig : public Error {
public:
    using Error::Error;
};

void validate(const TaskConfig& task);

/// Stable content hash over the binary task encoding.
std::uint32_t content_hash(const TaskConfig& task);

Bytes encode_task(const TaskConfig& task);
TaskConfig decode_task(ByteReader& reader);

nlohmann::json to_json(const TaskConfig& task);
TaskConfig task_from_json(const nlohmann::json& doc);

struct RunningTask {
    std::uint32_t samples_taken = 0;
    Seconds next_sample_at = 0;
};

struct Transition {
    enum class Kind : std::uint8_t { start, stop };
    Kind kind = Kind::start;
    TaskId task_id = 0;

    bool operator==(const Transition&) const = default;
};

/// Stops for running tasks with a satisfied exit condition, then starts for
/// idle tasks whose entry conditions all hold; each group in ascending
/// task_id order.
std::vector<Transition> evaluate_tasks(const std::map<TaskId, TaskConfig>& tasks,
                                       const std::map<TaskId, RunningTask>& running, Seconds now,
                                       std::uint16_t battery_mv, bool motion);

} // namespace roost
