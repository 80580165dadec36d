#include <roost/cloud.hpp>

#include <zlib.h>

#include <istream>
#include <ostream>
#include <sstream>

namespace roost::cloud {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

json ranges_json(const RangeSet& s)
{
    json arr = json::array();
    for (const auto& r : s.ranges())
        arr.push_back({r.first, r.last});
    return arr;
}

RangeSet ranges_from(const json& arr)
{
    RangeSet s;
    for (const auto& r : arr)
        s.insert(PageRange{r.at(0).get<PageNo>(), r.at(1).get<PageNo>()});
    return s;
}

NeededPages needed_for(const NodeLedger& l)
{
    NeededPages out;
    if (!l.known_max_page)
        return out;
    RangeSet covered = l.downloaded;
    covered.insert_all(l.expired);
    out.pending = covered.gaps(0, *l.known_max_page);
    if (!out.pending.empty())
        out.lowest = out.pending.front().first;
    return out;
}

json config_json(const DesiredConfig& c)
{
    json j = msg::to_json(c.to_message());
    j.erase("type");
    return j;
}

} // namespace

ConflictsWithExpired::ConflictsWithExpired(NodeId node, PageNo page)
    : Error("node " + std::to_string(node) + " page " + std::to_string(page) + " was already reported expired")
{
}

CorruptJournal::CorruptJournal(std::size_t offset, const std::string& why)
    : Error("corrupt journal at byte offset " + std::to_string(offset) + ": " + why), offset(offset)
{
}

// ---- DownloadLedger ------------------------------------------------------

NeededPages DownloadLedger::next_needed(NodeId node, std::optional<PageNo> max_page)
{
    if (!max_page) {
        auto it = nodes_.find(node);
        return it == nodes_.end() ? NeededPages{} : needed_for(it->second);
    }
    auto& l = nodes_[node];
    if (!l.known_max_page || *max_page > *l.known_max_page)
        l.known_max_page = max_page;
    return needed_for(l);
}

NeededPages DownloadLedger::peek(NodeId node) const
{
    auto it = nodes_.find(node);
    return it == nodes_.end() ? NeededPages{} : needed_for(it->second);
}

bool DownloadLedger::mark_downloaded(NodeId node, PageNo page)
{
    auto& l = nodes_[node];
    if (l.expired.contains(page))
        throw ConflictsWithExpired(node, page);
    return l.downloaded.insert(page);
}

bool DownloadLedger::mark_expired(NodeId node, PageNo page)
{
    auto& l = nodes_[node];
    if (l.downloaded.contains(page))
        return false;
    return l.expired.insert(page);
}

const NodeLedger* DownloadLedger::find(NodeId node) const
{
    auto it = nodes_.find(node);
    return it == nodes_.end() ? nullptr : &it->second;
}

RangeSet DownloadLedger::covered(NodeId node) const
{
    RangeSet s;
    if (const auto* l = find(node)) {
        s = l->downloaded;
        s.insert_all(l->expired);
    }
    return s;
}

json DownloadLedger::to_json() const
{
    json arr = json::array();
    for (const auto& [id, l] : nodes_)
        arr.push_back({{"node", id},
                       {"downloaded", ranges_json(l.downloaded)},
                       {"expired", ranges_json(l.expired)},
                       {"known_max", l.known_max_page ? json(*l.known_max_page) : json(nullptr)}});
    return arr;
}

DownloadLedger DownloadLedger::from_json(const json& doc)
{
    DownloadLedger ledger;
    for (const auto& n : doc) {
        NodeLedger l;
        l.downloaded = ranges_from(n.at("downloaded"));
        l.expired = ranges_from(n.at("expired"));
        if (!n.at("known_max").is_null())
            l.known_max_page = n.at("known_max").get<PageNo>();
        ledger.nodes_[n.at("node").get<NodeId>()] = std::move(l);
    }
    return ledger;
}

// ---- Firmware / ingest ---------------------------------------------------

std::uint32_t FirmwareImage::crc(std::span<const std::uint8_t> data)
{
    return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
}

FirmwareImage FirmwareImage::make(std::uint32_t version, Bytes image, std::size_t chunk_size)
{
    FirmwareImage f;
    f.version = version;
    f.checksum = crc(image);
    f.image = std::move(image);
    f.chunk_size = chunk_size;
    return f;
}

std::string_view to_string(IngestOutcome o)
{
    switch (o) {
    case IngestOutcome::stored:
        return "stored";
    case IngestOutcome::duplicate:
        return "duplicate";
    case IngestOutcome::mismatch:
        return "mismatch";
    }
    return "?";
}

IngestOutcome IngestStore::ingest(NodeId node, PageNo page, const Bytes& data, GatewayId gateway, Seconds time,
                                  Seconds received_at, const tdf::MetadataRegistry& registry)
{
    auto it = pages_.find({node, page});
    if (it != pages_.end()) {
        if (it->second.data == data) {
            ++duplicates_;
            return IngestOutcome::duplicate;
        }
        ++mismatches_;
        return IngestOutcome::mismatch;
    }
    StoredPage sp{data, gateway, time, received_at, {}, std::nullopt};
    try {
        sp.records = tdf::decode_stream(data, registry);
    } catch (const Error& e) {
        sp.records.clear();
        sp.quarantine = e.what();
        ++quarantined_;
    }
    records_ += sp.records.size();
    pages_.emplace(Key{node, page}, std::move(sp));
    return IngestOutcome::stored;
}

const StoredPage* IngestStore::find(NodeId node, PageNo page) const
{
    auto it = pages_.find({node, page});
    return it == pages_.end() ? nullptr : &it->second;
}

// ---- CloudService --------------------------------------------------------

CloudService::CloudService(tdf::MetadataRegistry registry, std::size_t page_size)
    : registry_(std::move(registry)), page_size_(page_size)
{
}

NeededPages CloudService::relay_beacon(const msg::BeaconRelay& b)
{
    const auto* before = ledger_.find(b.node_id);
    const auto old_max = before ? before->known_max_page : std::nullopt;
    auto needed = ledger_.next_needed(b.node_id, b.max_page);
    const auto* after = ledger_.find(b.node_id);
    if (after && after->known_max_page != old_max)
        journal({{"op", "max_page"}, {"node", b.node_id}, {"page", *after->known_max_page}});
    auto& reported = reported_config_version_[b.node_id];
    reported = std::max(reported, b.config_version);
    return needed;
}

void CloudService::report_page(const msg::PageReport& r)
{
    if (ledger_.mark_downloaded(r.node_id, r.page_no))
        journal({{"op", "downloaded"}, {"node", r.node_id}, {"page", r.page_no}});
}

void CloudService::report_expired(const msg::PageExpiredReport& r)
{
    if (ledger_.mark_expired(r.node_id, r.page_no))
        journal({{"op", "expired"}, {"node", r.node_id}, {"page", r.page_no}});
}

IngestOutcome CloudService::ingest(const msg::PageIngest& p, std::optional<Seconds> received_at)
{
    if (p.data.size() != page_size_)
        throw Error("page_ingest for node " + std::to_string(p.node_id) + " page " + std::to_string(p.page_no) +
                    " has " + std::to_string(p.data.size()) + " bytes, expected " + std::to_string(page_size_));
    return store_.ingest(p.node_id, p.page_no, p.data, p.gateway_id, p.time, received_at.value_or(p.time), registry_);
}

std::uint32_t CloudService::set_desired_config(NodeId node, std::vector<TaskConfig> tasks,
                                               std::map<std::string, std::int64_t> params)
{
    for (const auto& t : tasks)
        validate(t);
    auto& c = desired_[node];
    auto rep = reported_config_version_.find(node);
    const std::uint32_t floor = rep == reported_config_version_.end() ? 0 : rep->second;
    c.node_id = node;
    c.version = std::max(c.version, floor) + 1;
    c.tasks = std::move(tasks);
    c.params = std::move(params);
    journal({{"op", "config"}, {"config", config_json(c)}});
    return c.version;
}

const DesiredConfig* CloudService::desired_config(NodeId node) const
{
    auto it = desired_.find(node);
    return it == desired_.end() ? nullptr : &it->second;
}

void CloudService::report_config(const msg::ConfigApplied& c, Seconds server_time)
{
    applied_[c.config.node_id].push_back({c.config.version, c.gateway_id, c.time, server_time});
    auto& reported = reported_config_version_[c.config.node_id];
    reported = std::max(reported, c.config.version);
}

const std::vector<AppliedConfig>& CloudService::applied_configs(NodeId node) const
{
    static const std::vector<AppliedConfig> none;
    auto it = applied_.find(node);
    return it == applied_.end() ? none : it->second;
}

std::uint32_t CloudService::register_firmware(const FirmwareImage& image)
{
    if (image.image.empty())
        throw InvalidImage("firmware image is empty");
    if (image.chunk_size == 0 || image.chunk_size > 255)
        throw InvalidImage("firmware chunk size must be in 1..255");
    if (image.version == 0)
        throw InvalidImage("firmware version 0 is reserved");
    if (FirmwareImage::crc(image.image) != image.checksum)
        throw ChecksumMismatch("firmware " + std::to_string(image.version) + " checksum does not match image");
    firmware_[image.version] = image;
    return image.version;
}

std::vector<Bytes> CloudService::firmware_chunks(std::uint32_t version) const
{
    const auto* f = firmware(version);
    if (f == nullptr)
        throw UnknownFirmware("no firmware version " + std::to_string(version));
    std::vector<Bytes> chunks;
    for (std::size_t off = 0; off < f->image.size(); off += f->chunk_size) {
        const std::size_t end = std::min(f->image.size(), off + f->chunk_size);
        chunks.emplace_back(f->image.begin() + static_cast<std::ptrdiff_t>(off),
                            f->image.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return chunks;
}

const FirmwareImage* CloudService::firmware(std::uint32_t version) const
{
    auto it = firmware_.find(version);
    return it == firmware_.end() ? nullptr : &it->second;
}

void CloudService::set_desired_firmware(NodeId node, std::uint32_t version)
{
    if (firmware(version) == nullptr)
        throw UnknownFirmware("no firmware version " + std::to_string(version));
    desired_fw_[node] = version;
    journal({{"op", "firmware"}, {"node", node}, {"version", version}});
}

std::optional<std::uint32_t> CloudService::desired_firmware(NodeId node) const
{
    auto it = desired_fw_.find(node);
    if (it == desired_fw_.end())
        return std::nullopt;
    return it->second;
}

void CloudService::record_health(const msg::Health& report, Seconds server_time)
{
    health_.push_back({report, server_time});
}

std::vector<HealthEntry> CloudService::health(GatewayId gateway) const
{
    std::vector<HealthEntry> out;
    for (const auto& h : health_)
        if (h.report.gateway_id == gateway)
            out.push_back(h);
    return out;
}

void CloudService::apply(const msg::Message& m, Seconds server_time)
{
    std::visit(overloaded{
                   [&](const msg::BeaconRelay& b) { relay_beacon(b); },
                   [&](const msg::PageReport& r) { report_page(r); },
                   [&](const msg::PageExpiredReport& r) { report_expired(r); },
                   [&](const msg::PageIngest& p) { ingest(p, server_time); },
                   [&](const msg::Health& h) { record_health(h, server_time); },
                   [&](const msg::Config& c) { set_desired_config(c.node_id, c.tasks, c.params); },
                   [&](const msg::ConfigApplied& c) { report_config(c, server_time); },
               },
               m);
}

json CloudService::handle(const json& doc, Seconds server_time)
{
    try {
        if (doc.value("type", "") == "get_config") {
            const auto* c = desired_config(doc.at("node_id").get<NodeId>());
            if (c == nullptr)
                return {{"error", "no desired config for node"}};
            return msg::to_json(c->to_message());
        }
        const auto m = msg::from_json(doc);
        if (const auto* b = std::get_if<msg::BeaconRelay>(&m)) {
            json j = to_json(relay_beacon(*b));
            j["type"] = "next_needed";
            j["node_id"] = b->node_id;
            return j;
        }
        if (const auto* p = std::get_if<msg::PageIngest>(&m))
            return {{"ok", true}, {"outcome", to_string(ingest(*p, server_time))}};
        if (const auto* c = std::get_if<msg::Config>(&m))
            return {{"ok", true}, {"version", set_desired_config(c->node_id, c->tasks, c->params)}};
        apply(m, server_time);
        return {{"ok", true}};
    } catch (const Error& e) {
        return {{"error", e.what()}};
    } catch (const json::exception& e) {
        return {{"error", e.what()}};
    }
}

// ---- Journal -------------------------------------------------------------

void CloudService::attach_journal(std::ostream* out, std::size_t snapshot_every)
{
    journal_ = out;
    snapshot_every_ = snapshot_every;
    since_snapshot_ = 0;
}

void CloudService::journal(const json& entry)
{
    if (journal_ == nullptr)
        return;
    *journal_ << entry.dump() << '\n';
    if (snapshot_every_ > 0 && ++since_snapshot_ >= snapshot_every_)
        write_snapshot();
}

json CloudService::snapshot_json() const
{
    json configs = json::array();
    for (const auto& [id, c] : desired_)
        configs.push_back(config_json(c));
    json fw = json::array();
    for (const auto& [id, v] : desired_fw_)
        fw.push_back({{"node", id}, {"version", v}});
    json reported = json::array();
    for (const auto& [id, v] : reported_config_version_)
        reported.push_back({{"node", id}, {"version", v}});
    return {{"op", "snapshot"},
            {"ledger", ledger_.to_json()},
            {"configs", configs},
            {"firmware", fw},
            {"reported", reported}};
}

void CloudService::write_snapshot()
{
    if (journal_ == nullptr)
        return;
    *journal_ << snapshot_json().dump() << '\n';
    since_snapshot_ = 0;
}

void CloudService::load_snapshot(const json& snap)
{
    ledger_ = DownloadLedger::from_json(snap.at("ledger"));
    desired_.clear();
    for (json c : snap.at("configs")) {
        c["type"] = "config";
        auto m = std::get<msg::Config>(msg::from_json(c));
        desired_[m.node_id] = DesiredConfig{m.node_id, m.version, m.tasks, m.params};
    }
    desired_fw_.clear();
    for (const auto& f : snap.at("firmware"))
        desired_fw_[f.at("node").get<NodeId>()] = f.at("version").get<std::uint32_t>();
    reported_config_version_.clear();
    if (snap.contains("reported"))
        for (const auto& r : snap.at("reported"))
            reported_config_version_[r.at("node").get<NodeId>()] = r.at("version").get<std::uint32_t>();
}

void CloudService::apply_journal_entry(const json& e)
{
    const auto op = e.at("op").get<std::string>();
    if (op == "snapshot") {
        load_snapshot(e);
    } else if (op == "max_page") {
        ledger_.next_needed(e.at("node").get<NodeId>(), e.at("page").get<PageNo>());
    } else if (op == "downloaded") {
        ledger_.mark_downloaded(e.at("node").get<NodeId>(), e.at("page").get<PageNo>());
    } else if (op == "expired") {
        ledger_.mark_expired(e.at("node").get<NodeId>(), e.at("page").get<PageNo>());
    } else if (op == "config") {
        json c = e.at("config");
        c["type"] = "config";
        auto m = std::get<msg::Config>(msg::from_json(c));
        desired_[m.node_id] = DesiredConfig{m.node_id, m.version, m.tasks, m.params};
    } else if (op == "firmware") {
        desired_fw_[e.at("node").get<NodeId>()] = e.at("version").get<std::uint32_t>();
    } else {
        throw Error("unknown journal op '" + op + "'");
    }
}

CloudService CloudService::replay(std::istream& in, tdf::MetadataRegistry registry)
{
    CloudService cloud(std::move(registry));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t offset = 0;
    while (offset < content.size()) {
        const auto nl = content.find('\n', offset);
        if (nl == std::string::npos)
            throw CorruptJournal(offset, "truncated entry (no trailing newline)");
        const std::string_view line(content.data() + offset, nl - offset);
        if (!line.empty()) {
            try {
                cloud.apply_journal_entry(json::parse(line));
            } catch (const json::exception& e) {
                throw CorruptJournal(offset, e.what());
            } catch (const CorruptJournal&) {
                throw;
            } catch (const Error& e) {
                throw CorruptJournal(offset, e.what());
            }
        }
        offset = nl + 1;
    }
    return cloud;
}

json to_json(const NeededPages& n)
{
    json pending = json::array();
    for (const auto& r : n.pending)
        pending.push_back({r.first, r.last});
    return {{"lowest", n.lowest ? json(*n.lowest) : json(nullptr)}, {"pending", pending}};
}

std::string format_ranges(const std::vector<PageRange>& ranges)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (i)
            os << ',';
        os << ranges[i].first << ".." << ranges[i].last;
    }
    os << ']';
    return os.str();
}

} // namespace roost::cloud
