#pragma once

// Gateway: hears node beacons, downloads the pages the ledger still misses,
// reconciles node configuration and firmware with the cloud's desired state,
// and buffers every upload until it is online.

#include <roost/cloud.hpp>
#include <roost/link.hpp>
#include <roost/messages.hpp>
#include <roost/node.hpp>
#include <roost/range_set.hpp>

#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace roost {

/// Wake schedule. Outside always_on the gateway wakes for slot_length_s at
/// the start of every slot_period_s inside the daily [window_start_s,
/// window_end_s) window (wrapping past midnight when start > end).
struct DutySchedule {
    bool always_on = true;
    Seconds window_start_s = 0;
    Seconds window_end_s = kSecondsPerDay;
    Seconds slot_period_s = 600;
    Seconds slot_length_s = 120;
    Seconds idle_timeout_s = 60;

    bool scheduled_awake(Seconds t) const;
    /// Start of the slot containing t; only meaningful when scheduled_awake(t).
    Seconds slot_start(Seconds t) const;
    void validate() const;
};

struct GatewayParams {
    GatewayId id = 0;
    DutySchedule duty;
    /// Local storage for buffered pages, reported as free_pages.
    std::uint32_t storage_pages = 1u << 20;
    std::size_t page_size = 256;
};

/// The gateway's local copy of one node's global state.
struct NodeCache {
    RangeSet covered;
    std::optional<PageNo> known_max;
    std::optional<cloud::DesiredConfig> desired_config;
    std::optional<std::uint32_t> desired_fw;
    Seconds last_beacon = -1;
    /// Pages the last plan left untransferred.
    std::size_t pending = 0;

    PageNo highest_contiguous_end() const { return covered.first_missing(0); }
};

struct DownloadPlan {
    NodeId node_id = 0;
    std::vector<PageRange> pages;
    std::optional<cloud::DesiredConfig> config;
    std::optional<std::uint32_t> fw_version;
    std::uint16_t hold_seconds = 0;

    std::size_t page_count() const;
};

struct DownloadResult {
    std::vector<PageNo> pages;
    std::vector<PageNo> expired;
    bool contact_lost = false;
    bool config_applied = false;
    bool fw_applied = false;
    std::uint64_t exchanges = 0;
    std::uint64_t retries = 0;
    double elapsed_s = 0;
};

struct GatewayStats {
    std::uint64_t beacons_heard = 0;
    std::uint64_t plans = 0;
    std::uint64_t pages_downloaded = 0;
    std::uint64_t pages_expired = 0;
    std::uint64_t duplicate_uploads = 0;
    std::uint64_t mismatched_uploads = 0;
    std::uint64_t rejected_messages = 0;
    std::uint64_t syncs = 0;
    std::uint64_t contacts_lost = 0;
    std::uint64_t configs_applied = 0;
    std::uint64_t firmware_applied = 0;
    Seconds awake_s = 0;
};

class Gateway {
public:
    explicit Gateway(GatewayParams params, Seconds start_time = 0);

    GatewayId id() const { return params_.id; }
    const GatewayParams& params() const { return params_; }

    bool online() const { return online_; }
    void set_online(bool online) { online_ = online; }
    bool awake() const { return awake_; }

    /// Updates and returns the awake state at now.
    bool duty_tick(Seconds now);

    /// Plans a session for a heard beacon, consulting the cloud first when
    /// one is reachable. nullopt when there is nothing to do.
    std::optional<DownloadPlan> on_beacon(const Beacon& b, Seconds now, cloud::CloudService* cloud);

    /// Runs a plan against the node over link. Completed pages are kept when
    /// the contact drops midway.
    DownloadResult execute_plan(Node& node, const DownloadPlan& plan, LinkSession& link, Seconds now);

    /// Drains the upload buffer into the cloud and refreshes the caches.
    /// Returns false, keeping the buffer, when offline or cloud is null.
    bool sync(cloud::CloudService* cloud, Seconds now);

    msg::Health health(Seconds now) const;

    const std::deque<msg::Message>& upload_buffer() const { return buffer_; }
    std::size_t buffered_pages() const { return buffered_pages_; }
    const NodeCache* cache(NodeId node) const;
    const GatewayStats& stats() const { return stats_; }
    Seconds busy_until() const { return busy_until_; }

private:
    void refresh_from(const cloud::CloudService& cloud, NodeId node);
    bool reconcile_config(Node& node, const cloud::DesiredConfig& desired, LinkSession& link,
                          DownloadResult& result);
    bool push_firmware(Node& node, std::uint32_t version, LinkSession& link, DownloadResult& result);
    std::optional<rpc::Response> call(Node& node, const rpc::Command& cmd, LinkSession* link,
                                      DownloadResult& result);
    void enqueue(msg::Message m);

    GatewayParams params_;
    Seconds start_time_;
    bool online_ = true;
    bool awake_ = false;
    Seconds last_tick_ = -1;
    Seconds slot_slept_ = -1;
    Seconds last_beacon_ = -1;
    Seconds busy_until_ = -1;

    std::map<NodeId, NodeCache> cache_;
    /// Pages downloaded or expired here since the last sync.
    std::map<NodeId, RangeSet> unsynced_;
    std::map<std::uint32_t, cloud::FirmwareImage> firmware_;
    std::deque<msg::Message> buffer_;
    std::size_t buffered_pages_ = 0;
    GatewayStats stats_;
};

} // namespace roost
