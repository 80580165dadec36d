#pragma once

// Coordination service: the download ledger that gives gateways the lowest
// page not yet downloaded, deduplicating page ingestion, desired node
// configuration and firmware, and gateway health storage.
//
// Ledger and configuration mutations can be journaled as JSON lines and
// replayed; see CloudService::replay.

#include <roost/messages.hpp>
#include <roost/range_set.hpp>
#include <roost/tdf.hpp>

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace roost::cloud {

class ConflictsWithExpired : public Error {
public:
    ConflictsWithExpired(NodeId node, PageNo page);
};

class InvalidImage : public Error {
public:
    using Error::Error;
};

class ChecksumMismatch : public Error {
public:
    using Error::Error;
};

class UnknownFirmware : public Error {
public:
    using Error::Error;
};

class CorruptJournal : public Error {
public:
    CorruptJournal(std::size_t offset, const std::string& why);
    std::size_t offset;
};

struct NeededPages {
    std::optional<PageNo> lowest;
    std::vector<PageRange> pending;

    bool operator==(const NeededPages&) const = default;
};

struct NodeLedger {
    RangeSet downloaded;
    RangeSet expired;
    std::optional<PageNo> known_max_page;
};

class DownloadLedger {
public:
    /// Raises known_max_page to max_page and reports what is still missing
    /// in [0, known_max_page].
    NeededPages next_needed(NodeId node, std::optional<PageNo> max_page);
    /// Same answer without recording max_page.
    NeededPages peek(NodeId node) const;

    /// Idempotent. Returns true when the page was newly added.
    bool mark_downloaded(NodeId node, PageNo page);
    /// Records permanent loss. Ignored (returns false) for a page that was
    /// already downloaded, since the data is safe.
    bool mark_expired(NodeId node, PageNo page);

    const NodeLedger* find(NodeId node) const;
    /// downloaded plus expired.
    RangeSet covered(NodeId node) const;
    const std::map<NodeId, NodeLedger>& nodes() const { return nodes_; }

    nlohmann::json to_json() const;
    static DownloadLedger from_json(const nlohmann::json& doc);

private:
    friend class CloudService;
    std::map<NodeId, NodeLedger> nodes_;
};

struct DesiredConfig {
    NodeId node_id = 0;
    std::uint32_t version = 0;
    std::vector<TaskConfig> tasks;
    std::map<std::string, std::int64_t> params;

    msg::Config to_message() const { return {node_id, version, tasks, params}; }
};

struct FirmwareImage {
    std::uint32_t version = 0;
    Bytes image;
    std::uint32_t checksum = 0;
    std::size_t chunk_size = 64;

    static std::uint32_t crc(std::span<const std::uint8_t> data);
    static FirmwareImage make(std::uint32_t version, Bytes image, std::size_t chunk_size = 64);
};

enum class IngestOutcome { stored, duplicate, mismatch };
std::string_view to_string(IngestOutcome o);

struct StoredPage {
    Bytes data;
    GatewayId gateway_id = 0;
    /// Gateway download time and cloud arrival time.
    Seconds time = 0;
    Seconds received_at = 0;
    std::vector<tdf::Record> records;
    /// Set when the page could not be decoded with the registry; bytes are kept.
    std::optional<std::string> quarantine;
};

class IngestStore {
public:
    using Key = std::pair<NodeId, PageNo>;

    IngestOutcome ingest(NodeId node, PageNo page, const Bytes& data, GatewayId gateway, Seconds time,
                         Seconds received_at, const tdf::MetadataRegistry& registry);

    const StoredPage* find(NodeId node, PageNo page) const;
    std::size_t size() const { return pages_.size(); }
    std::size_t record_count() const { return records_; }
    std::size_t duplicates() const { return duplicates_; }
    std::size_t mismatches() const { return mismatches_; }
    std::size_t quarantined() const { return quarantined_; }
    const std::map<Key, StoredPage>& pages() const { return pages_; }

private:
    std::map<Key, StoredPage> pages_;
    std::size_t records_ = 0;
    std::size_t duplicates_ = 0;
    std::size_t mismatches_ = 0;
    std::size_t quarantined_ = 0;
};

struct HealthEntry {
    msg::Health report;
    Seconds server_time = 0;
};

struct AppliedConfig {
    std::uint32_t version = 0;
    GatewayId gateway_id = 0;
    /// When the gateway wrote the config to the node.
    Seconds applied_at = 0;
    Seconds received_at = 0;
};

class CloudService {
public:
    explicit CloudService(tdf::MetadataRegistry registry, std::size_t page_size = 256);

    const tdf::MetadataRegistry& registry() const { return registry_; }

    // Ledger
    NeededPages relay_beacon(const msg::BeaconRelay& b);
    void report_page(const msg::PageReport& r);
    void report_expired(const msg::PageExpiredReport& r);
    const DownloadLedger& ledger() const { return ledger_; }

    // Data
    /// received_at defaults to the gateway timestamp.
    IngestOutcome ingest(const msg::PageIngest& p, std::optional<Seconds> received_at = std::nullopt);
    const IngestStore& store() const { return store_; }

    // Configuration
    std::uint32_t set_desired_config(NodeId node, std::vector<TaskConfig> tasks,
                                     std::map<std::string, std::int64_t> params = {});
    const DesiredConfig* desired_config(NodeId node) const;
    const std::map<NodeId, DesiredConfig>& desired_configs() const { return desired_; }
    void report_config(const msg::ConfigApplied& c, Seconds server_time);
    const std::vector<AppliedConfig>& applied_configs(NodeId node) const;

    // Firmware
    std::uint32_t register_firmware(const FirmwareImage& image);
    std::vector<Bytes> firmware_chunks(std::uint32_t version) const;
    const FirmwareImage* firmware(std::uint32_t version) const;
    void set_desired_firmware(NodeId node, std::uint32_t version);
    std::optional<std::uint32_t> desired_firmware(NodeId node) const;
    const std::map<NodeId, std::uint32_t>& desired_firmware_all() const { return desired_fw_; }

    // Health
    void record_health(const msg::Health& report, Seconds server_time);
    std::vector<HealthEntry> health(GatewayId gateway) const;

    /// Applies one gateway message; server_time stamps health and config notices.
    void apply(const msg::Message& m, Seconds server_time);

    /// Structured-document endpoint. Answers beacon_relay with the needed
    /// pages, {"type":"get_config","node_id":N} with the desired config, and
    /// everything else with {"ok":true} or {"error":...}.
    nlohmann::json handle(const nlohmann::json& doc, Seconds server_time);

    // Journal
    void attach_journal(std::ostream* out, std::size_t snapshot_every = 10000);
    void write_snapshot();
    /// Rebuilds ledger, desired configs and firmware assignments.
    static CloudService replay(std::istream& in, tdf::MetadataRegistry registry = tdf::builtin_registry());

private:
    void journal(const nlohmann::json& entry);
    nlohmann::json snapshot_json() const;
    void load_snapshot(const nlohmann::json& snap);
    void apply_journal_entry(const nlohmann::json& entry);

    tdf::MetadataRegistry registry_;
    std::size_t page_size_;
    DownloadLedger ledger_;
    IngestStore store_;
    std::map<NodeId, DesiredConfig> desired_;
    std::map<NodeId, std::uint32_t> reported_config_version_;
    std::map<NodeId, std::vector<AppliedConfig>> applied_;
    std::map<std::uint32_t, FirmwareImage> firmware_;
    std::map<NodeId, std::uint32_t> desired_fw_;
    std::vector<HealthEntry> health_;

    std::ostream* journal_ = nullptr;
    std::size_t snapshot_every_ = 10000;
    std::size_t since_snapshot_ = 0;
};

nlohmann::json to_json(const NeededPages& n);
std::string format_ranges(const std::vector<PageRange>& ranges);

} // namespace roost::cloud
