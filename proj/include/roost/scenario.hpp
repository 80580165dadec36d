#pragma once

// Scenario files (JSON, schema_version 1). Durations in *_days, times of
// day and intervals in *_s seconds. Absolute instants are given either as
// "time_s" or as a fractional "day". Unknown keys are rejected so typos
// surface as errors.

#include <roost/battery.hpp>
#include <roost/gateway.hpp>
#include <roost/link.hpp>
#include <roost/mobility.hpp>
#include <roost/node.hpp>
#include <roost/task.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace roost {

constexpr int kScenarioSchemaVersion = 1;

/// Carries the dotted path of the offending field, e.g. "gateways[1].camp".
class InvalidScenario : public Error {
public:
    InvalidScenario(std::string field, const std::string& message);
    std::string field;
};

struct CampSpec {
    CampId id = 0;
    std::string name;
};

struct TimeSpan {
    Seconds start = 0;
    Seconds end = 0;
};

struct RandomOffline {
    /// Chance per day that the gateway loses its uplink.
    double p_daily = 0.0;
    double min_hours = 1.0;
    double max_hours = 24.0;
};

struct GatewaySpec {
    GatewayId id = 0;
    CampId camp = 0;
    DutySchedule duty;
    std::vector<TimeSpan> offline;
    RandomOffline random_offline;
    Seconds sync_interval_s = 300;
    std::uint32_t storage_pages = 1u << 20;
};

struct BatterySpec {
    double capacity_mj = 1.8e6;
    double initial_soc = 0.9;
    double peak_harvest_mw = 6.0;
    LoadTable loads = LoadTable::defaults();
};

struct NodeSpec {
    NodeId id = 0;
    CampId home_camp = 0;
    BatterySpec battery;
    std::vector<TaskConfig> tasks;
    std::size_t capacity_pages = kDefaultCapacityPages;
    std::size_t page_size = kDefaultPageSize;
    NodeParams params;
    std::vector<Absence> absences;
    bool telemetry = false;
};

struct Drought {
    int start_day = 0;
    int days = 0;
    double factor = 0.05;
};

struct WeatherSpec {
    Seconds sunrise_s = 6 * 3600;
    Seconds sunset_s = 18 * 3600;
    /// Daily factor is uniform in [cloudy_min, cloudy_max].
    double cloudy_min = 0.7;
    double cloudy_max = 1.0;
    std::vector<Drought> droughts;
};

struct ConfigEdit {
    Seconds time = 0;
    NodeId node = 0;
    std::vector<TaskConfig> tasks;
    std::map<std::string, std::int64_t> params;
};

struct FirmwareRelease {
    Seconds time = 0;
    std::uint32_t version = 0;
    std::size_t size_bytes = 0;
    std::size_t chunk_size = 64;
    std::vector<NodeId> nodes;
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name = "scenario";
    std::uint64_t seed = 1;
    int duration_days = 1;
    WeatherSpec weather;
    std::vector<CampSpec> camps;
    std::vector<GatewaySpec> gateways;
    std::vector<NodeSpec> nodes;
    MobilityParams mobility;
    LinkParams link;
    std::vector<ConfigEdit> config_edits;
    std::vector<FirmwareRelease> firmware;
    /// Last days of the run: nodes stay home and gateways stay online, so
    /// every backlog drains before the end.
    int final_collection_days = 0;
    Seconds trace_interval_s = 3600;
    Seconds duty_tick_s = 15;
    std::size_t journal_snapshot_every = 5000;

    Seconds end_time() const { return static_cast<Seconds>(duration_days) * kSecondsPerDay; }
    void validate() const;

    static Scenario from_json(const nlohmann::json& doc);
    static Scenario load(const std::filesystem::path& path);
};

/// Tasks a node runs when its scenario entry lists none: hysteretic high and
/// low rate GPS plus battery, temperature and activity sensors.
std::vector<TaskConfig> default_tasks();

} // namespace roost
