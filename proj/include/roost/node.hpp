#pragma once

// Mobile node: energy-harvesting battery, rule-driven task scheduler,
// sampling into the page log, duty-cycled beacons and the RPC server.

#include <roost/battery.hpp>
#include <roost/pagelog.hpp>
#include <roost/rpc.hpp>
#include <roost/task.hpp>
#include <roost/tdf.hpp>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roost {

struct NodeParams {
    Seconds beacon_period_s = 10;
    double beacon_airtime_s = 0.02;
    /// Radio-on time charged per RPC exchange.
    double rpc_exchange_s = 0.05;
    /// Longest single integration step taken by advance_to.
    Seconds max_step_s = 60;
};

struct Beacon {
    NodeId node_id = 0;
    std::optional<PageNo> max_page;
    std::uint16_t battery_mv = 0;
    std::uint32_t config_version = 0;
    std::uint32_t fw_version = 0;
    Seconds time = 0;

    bool operator==(const Beacon&) const = default;
};

struct EnergyAccount {
    double harvested_mj = 0;
    double consumed_mj = 0;
    /// Energy the [0, capacity] clamp discarded (positive: surplus lost at
    /// full charge; negative: deficit not drawn at empty).
    double clamped_mj = 0;
    std::array<double, kActivityCount> by_activity_mj{};
};

struct NodeCounters {
    std::uint64_t records = 0;
    std::uint64_t gps_samples = 0;
    std::array<std::uint64_t, kActivityCount> samples_by_activity{};
    std::uint64_t beacons = 0;
    std::uint64_t rpc_requests = 0;
    std::uint64_t task_starts = 0;
};

/// Optional fine-grained trace used by tests and the hysteresis check.
struct NodeTelemetry {
    struct Reading {
        Seconds time;
        std::uint16_t battery_mv;
    };
    struct Sample {
        Seconds time;
        TaskId task_id;
    };
    std::vector<Reading> readings;
    std::vector<Sample> samples;
};

class Node {
public:
    Node(NodeId id, BatteryModel battery, PageLog log, std::shared_ptr<const tdf::MetadataRegistry> registry,
         NodeParams params = {}, Seconds start_time = 0);

    NodeId id() const { return id_; }
    Seconds clock() const { return clock_; }

    /// Installs a task from the deployment image; does not touch config_version.
    void install_task(const TaskConfig& task);

    std::vector<Transition> evaluate_tasks() const;
    void apply(std::span<const Transition> transitions);

    /// Integrates energy over [clock, clock + dt) and logs the samples due
    /// in that interval. dt must be positive.
    void step(Seconds dt);

    /// Status packet at the current clock; charges the beacon airtime.
    Beacon emit_beacon();

    /// Runs scheduler + step up to t, emitting every beacon that falls due
    /// in (clock, t]. Returns the emitted beacons in time order.
    std::vector<Beacon> advance_to(Seconds t);

    rpc::Response handle_rpc(const rpc::Command& cmd);
    /// Radio-level entry point: no answer while the radio is off.
    std::optional<Bytes> handle_packet(std::span<const std::uint8_t> packet);
    bool radio_awake() const;

    void set_motion(bool moving) { motion_ = moving; }
    bool motion() const { return motion_; }
    void set_position(std::int32_t lat_udeg, std::int32_t lon_udeg)
    {
        lat_udeg_ = lat_udeg;
        lon_udeg_ = lon_udeg;
    }

    const BatteryModel& battery() const { return battery_; }
    BatteryModel& battery() { return battery_; }
    const PageLog& log() const { return log_; }
    const std::map<TaskId, TaskConfig>& tasks() const { return tasks_; }
    const std::map<TaskId, RunningTask>& running() const { return running_; }
    const std::map<std::string, std::int64_t>& params() const { return params_; }
    std::uint32_t config_version() const { return config_version_; }
    std::uint32_t fw_version() const { return fw_version_; }
    Seconds next_beacon_at() const { return next_beacon_at_; }
    void set_next_beacon_at(Seconds t) { next_beacon_at_ = t; }
    Seconds beacon_period() const { return params_beacon_period_; }
    const NodeParams& node_params() const { return params_struct_; }

    const EnergyAccount& energy() const { return energy_; }
    const NodeCounters& counters() const { return counters_; }
    /// Records written into each page so far, indexed by page number.
    const std::vector<std::uint32_t>& records_per_page() const { return records_per_page_; }

    void enable_telemetry(bool on) { telemetry_on_ = on; }
    const NodeTelemetry& telemetry() const { return telemetry_; }

    /// Charges radio-on time directly (used for receive windows).
    void charge(Activity activity, double seconds);

private:
    Bytes sample_payload(const tdf::TypeDescriptor& desc, Seconds t) const;
    void log_sample(const TaskConfig& task, RunningTask& run, Seconds t);
    rpc::Response read_chunk(const rpc::ReadPageChunk& c, std::uint8_t cmd);
    rpc::Response apply_fw(const rpc::ApplyFw& c, std::uint8_t cmd);

    NodeId id_;
    Seconds clock_;
    BatteryModel battery_;
    PageLog log_;
    std::shared_ptr<const tdf::MetadataRegistry> registry_;
    NodeParams params_struct_;
    Seconds params_beacon_period_;

    bool motion_ = false;
    std::int32_t lat_udeg_ = 0;
    std::int32_t lon_udeg_ = 0;

    std::map<TaskId, TaskConfig> tasks_;
    std::map<TaskId, RunningTask> running_;
    std::map<std::string, std::int64_t> params_;
    std::uint32_t config_version_ = 0;
    std::uint32_t fw_version_ = 1;

    std::uint32_t fw_staging_version_ = 0;
    std::map<std::uint16_t, Bytes> fw_staging_;

    Seconds next_beacon_at_;
    Seconds last_beacon_at_ = -1;
    Seconds hold_until_ = -1;

    EnergyAccount energy_;
    NodeCounters counters_;
    std::vector<std::uint32_t> records_per_page_;
    bool telemetry_on_ = false;
    NodeTelemetry telemetry_;
    Bytes scratch_;
};

} // namespace roost
