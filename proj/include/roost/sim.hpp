#pragma once

// Discrete-event simulation of nodes, gateways and the cloud. Events are
// processed by (time, kind, entity id, insertion order); every random draw
// comes from a per-entity stream derived from the seed, so a run is fully
// determined by scenario + seed.

#include <roost/cloud.hpp>
#include <roost/gateway.hpp>
#include <roost/mobility.hpp>
#include <roost/node.hpp>
#include <roost/scenario.hpp>

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <vector>

namespace roost {

enum class EventKind : std::uint8_t {
    config_edit,
    firmware_release,
    online_change,
    duty_tick,
    beacon,
    morning,
    dusk,
    gateway_sync,
    trace,
    final_sync,
};

std::string_view to_string(EventKind k);

struct Event {
    Seconds time = 0;
    EventKind kind = EventKind::trace;
    std::uint32_t entity = 0;
    std::uint64_t seq = 0;
    /// Node epoch or event-list index, depending on kind.
    std::uint64_t arg = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const;
};

struct SessionRecord {
    Seconds time = 0;
    NodeId node = 0;
    GatewayId gateway = 0;
    std::size_t planned = 0;
    std::size_t pages = 0;
    std::size_t expired = 0;
    double elapsed_s = 0;
    double window_s = 0;
    double page_rate = 0;
    bool contact_lost = false;
    bool config_applied = false;
    bool fw_applied = false;
    double charge_before_mj = 0;
    double charge_after_mj = 0;
};

struct ContactRecord {
    NodeId node = 0;
    CampId camp = 0;
    Seconds start = 0;
    /// -1 while the contact is still open at the end of the run.
    Seconds end = -1;
};

struct IntercontactRecord {
    NodeId node = 0;
    int from_day = 0;
    int days = 0;
};

struct TracePoint {
    Seconds time = 0;
    NodeId node = 0;
    std::uint16_t battery_mv = 0;
    double charge_mj = 0;
    double soc = 0;
    std::uint64_t records = 0;
    std::uint64_t gps_high = 0;
    std::uint64_t gps_low = 0;
    std::optional<PageNo> max_page;
    std::uint64_t pages_downloaded = 0;
    bool in_contact = false;
};

struct DailyRow {
    int day = 0;
    NodeId node = 0;
    std::uint64_t records = 0;
    std::uint64_t gps_high = 0;
    std::uint64_t gps_low = 0;
    std::uint64_t task_starts = 0;
    std::uint16_t min_mv = 0;
    std::uint16_t max_mv = 0;
    std::uint64_t pages_finalized = 0;
    std::uint64_t pages_downloaded = 0;
    double harvested_mj = 0;
    double consumed_mj = 0;
    bool contact = false;
};

struct ConfigPropagation {
    NodeId node = 0;
    std::uint32_t version = 0;
    Seconds edited_at = 0;
    /// First beacon a gateway heard from the node at or after the edit.
    std::optional<Seconds> first_contact_after;
    std::optional<Seconds> applied_at;
};

struct Conservation {
    std::uint64_t stored = 0;
    std::uint64_t buffered = 0;
    std::uint64_t pending = 0;
    std::uint64_t expired = 0;
    std::uint64_t unaccounted = 0;

    std::uint64_t total() const { return stored + buffered + pending + expired + unaccounted; }
    bool operator==(const Conservation&) const = default;
};

struct Percentiles {
    std::size_t count = 0;
    double mean = 0;
    double p50 = 0;
    double p90 = 0;
    double p99 = 0;
    double max = 0;

    static Percentiles of(std::vector<double> values);
};

struct Metrics {
    std::uint64_t records_logged = 0;
    std::uint64_t pages_finalized = 0;
    std::uint64_t pages_stored = 0;
    std::uint64_t page_transfers = 0;
    std::uint64_t duplicate_transfers = 0;
    std::uint64_t ingest_duplicates = 0;
    std::uint64_t ingest_mismatches = 0;
    std::uint64_t pages_expired_reported = 0;
    std::uint64_t quarantined_pages = 0;
    std::uint64_t causality_violations = 0;
    std::uint64_t rejected_messages = 0;
    std::uint64_t events = 0;

    Percentiles latency_s;
    Percentiles config_delay_s;
    Conservation records;
    Conservation pages;

    std::vector<SessionRecord> sessions;
    std::vector<ContactRecord> contacts;
    std::vector<IntercontactRecord> intercontacts;
    std::vector<TracePoint> traces;
    std::vector<DailyRow> daily;
    std::vector<ConfigPropagation> configs;
    std::vector<std::pair<GatewayId, GatewayStats>> gateways;
};

class Simulation {
public:
    /// seed overrides scenario.seed.
    Simulation(Scenario scenario, std::uint64_t seed);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;
    ~Simulation();

    void set_event_log(std::ostream* out) { event_log_ = out; }
    void set_journal(std::ostream* out) { journal_ = out; }

    /// Runs to the scenario end. Call once.
    const Metrics& run();

    const Scenario& scenario() const { return scenario_; }
    std::uint64_t seed() const { return seed_; }
    const cloud::CloudService& cloud() const { return *cloud_; }
    const Node& node(NodeId id) const;
    std::vector<const Node*> nodes() const;
    std::vector<const Gateway*> gateways() const;
    const Metrics& metrics() const { return metrics_; }

private:
    struct NodeState;
    struct GatewayState;

    void schedule(Seconds t, EventKind kind, std::uint32_t entity, std::uint64_t arg = 0);
    void setup();
    void dispatch(const Event& e);

    void on_beacon(NodeState& n, const Event& e);
    void on_morning(NodeState& n, Seconds t, int day);
    void on_dusk(NodeState& n, Seconds t, int day);
    void on_duty(GatewayState& g, Seconds t);
    void on_sync(GatewayState& g, Seconds t);
    void on_online_change(GatewayState& g, Seconds t);
    void on_trace(Seconds t);

    void start_contact(NodeState& n, Seconds t);
    void end_contact(NodeState& n, Seconds t);
    void schedule_next_beacon(NodeState& n);
    bool in_final_phase(Seconds t) const;
    bool offline_at(const GatewayState& g, Seconds t) const;
    std::vector<GatewayState*> gateways_at(CampId camp);

    void finish();
    void log(Seconds t, std::string_view what, const std::string& detail);

    Scenario scenario_;
    std::uint64_t seed_;
    std::shared_ptr<const tdf::MetadataRegistry> registry_;
    std::unique_ptr<cloud::CloudService> cloud_;
    std::vector<std::unique_ptr<NodeState>> nodes_;
    std::vector<std::unique_ptr<GatewayState>> gateways_;
    std::map<NodeId, std::size_t> node_index_;
    std::map<GatewayId, std::size_t> gateway_index_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t seq_ = 0;
    std::set<std::pair<NodeId, PageNo>> transferred_;
    std::map<std::pair<NodeId, std::uint32_t>, std::size_t> config_index_;

    std::ostream* event_log_ = nullptr;
    std::ostream* journal_ = nullptr;
    bool ran_ = false;
    Metrics metrics_;
};

/// Convenience wrapper: builds, runs and returns the metrics.
Metrics simulate(const Scenario& scenario, std::uint64_t seed, std::ostream* event_log = nullptr);

} // namespace roost
