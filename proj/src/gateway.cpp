#include <roost/gateway.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace roost {

namespace {

constexpr double kNominalSlotS = 1.0 / (5.0 * 4.0);

bool in_window(Seconds offset, Seconds len)
{
    return len == 0 || offset < len;
}

} // namespace

bool DutySchedule::scheduled_awake(Seconds t) const
{
    if (always_on)
        return true;
    const Seconds offset = time_of_day(time_of_day(t) - window_start_s);
    const Seconds len = time_of_day(window_end_s - window_start_s);
    return in_window(offset, len) && offset % slot_period_s < slot_length_s;
}

Seconds DutySchedule::slot_start(Seconds t) const
{
    const Seconds offset = time_of_day(time_of_day(t) - window_start_s);
    return t - offset % slot_period_s;
}

void DutySchedule::validate() const
{
    if (always_on)
        return;
    if (slot_period_s <= 0 || slot_length_s <= 0 || slot_length_s > slot_period_s)
        throw Error("duty slot_length_s must be in (0, slot_period_s]");
    if (idle_timeout_s <= 0)
        throw Error("duty idle_timeout_s must be positive");
    if (window_start_s < 0 || window_start_s >= kSecondsPerDay || window_end_s < 0 ||
        window_end_s > kSecondsPerDay)
        throw Error("duty window must lie within one day");
}

std::size_t DownloadPlan::page_count() const
{
    std::size_t n = 0;
    for (const auto& r : pages)
        n += r.size();
    return n;
}

Gateway::Gateway(GatewayParams params, Seconds start_time) : params_(params), start_time_(start_time)
{
    params_.duty.validate();
    last_tick_ = start_time;
    awake_ = params_.duty.scheduled_awake(start_time);
}

const NodeCache* Gateway::cache(NodeId node) const
{
    auto it = cache_.find(node);
    return it == cache_.end() ? nullptr : &it->second;
}

bool Gateway::duty_tick(Seconds now)
{
    if (awake_ && now > last_tick_)
        stats_.awake_s += now - last_tick_;
    last_tick_ = std::max(last_tick_, now);

    const auto& d = params_.duty;
    bool backlog = busy_until_ > now;
    for (const auto& [id, c] : cache_)
        if (c.pending > 0 && c.last_beacon >= 0 && now - c.last_beacon < d.idle_timeout_s)
            backlog = true;

    if (d.always_on) {
        awake_ = true;
    } else if (d.scheduled_awake(now)) {
        const Seconds slot = d.slot_start(now);
        if (slot_slept_ == slot) {
            awake_ = false;
        } else if (awake_ && now - std::max(last_beacon_, slot) >= d.idle_timeout_s && !backlog) {
            awake_ = false;
            slot_slept_ = slot;
        } else {
            awake_ = true;
        }
    } else {
        awake_ = awake_ && backlog;
    }
    return awake_;
}

void Gateway::enqueue(msg::Message m)
{
    if (std::holds_alternative<msg::PageIngest>(m))
        ++buffered_pages_;
    buffer_.push_back(std::move(m));
}

void Gateway::refresh_from(const cloud::CloudService& cloud, NodeId node)
{
    auto& c = cache_[node];
    c.covered = cloud.ledger().covered(node);
    if (auto it = unsynced_.find(node); it != unsynced_.end())
        c.covered.insert_all(it->second);
    if (const auto* l = cloud.ledger().find(node); l && l->known_max_page)
        c.known_max = std::max(c.known_max.value_or(0), *l->known_max_page);
    if (const auto* dc = cloud.desired_config(node))
        c.desired_config = *dc;
    else
        c.desired_config.reset();
    c.desired_fw = cloud.desired_firmware(node);
    if (c.desired_fw && !firmware_.contains(*c.desired_fw))
        if (const auto* img = cloud.firmware(*c.desired_fw))
            firmware_[img->version] = *img;
}

std::optional<DownloadPlan> Gateway::on_beacon(const Beacon& b, Seconds now, cloud::CloudService* cloud)
{
    if (!awake_)
        return std::nullopt;
    ++stats_.beacons_heard;
    last_beacon_ = now;

    msg::BeaconRelay relay{b.node_id, b.max_page, b.battery_mv, b.config_version, b.fw_version, params_.id, now};
    if (cloud != nullptr && online_) {
        cloud->relay_beacon(relay);
        refresh_from(*cloud, b.node_id);
    } else {
        enqueue(relay);
    }

    auto& c = cache_[b.node_id];
    c.last_beacon = now;
    if (b.max_page && (!c.known_max || *b.max_page > *c.known_max))
        c.known_max = b.max_page;

    DownloadPlan plan;
    plan.node_id = b.node_id;
    if (b.max_page)
        plan.pages = c.covered.gaps(0, *b.max_page);
    if (c.desired_config && c.desired_config->version != b.config_version)
        plan.config = c.desired_config;
    if (c.desired_fw && *c.desired_fw != b.fw_version && firmware_.contains(*c.desired_fw))
        plan.fw_version = c.desired_fw;

    const std::size_t pages = plan.page_count();
    c.pending = pages;
    if (pages == 0 && !plan.config && !plan.fw_version)
        return std::nullopt;

    std::size_t exchanges = pages * ((params_.page_size + rpc::kChunkSize - 1) / rpc::kChunkSize);
    if (plan.config)
        exchanges += 2 + 2 * plan.config->tasks.size() + plan.config->params.size() + 8;
    if (plan.fw_version)
        exchanges += firmware_.at(*plan.fw_version).image.size() / rpc::kChunkSize + 2;
    const double hold = std::ceil(static_cast<double>(exchanges) * kNominalSlotS * 3.0) + 1.0;
    plan.hold_seconds = static_cast<std::uint16_t>(std::min(hold, 65535.0));
    ++stats_.plans;
    return plan;
}

std::optional<rpc::Response> Gateway::call(Node& node, const rpc::Command& cmd, LinkSession* link,
                                           DownloadResult& result)
{
    if (link != nullptr && !link->exchange())
        return std::nullopt;
    ++result.exchanges;
    const auto reply = node.handle_packet(rpc::encode(cmd));
    if (!reply)
        return std::nullopt;
    return rpc::decode_response(*reply);
}

DownloadResult Gateway::execute_plan(Node& node, const DownloadPlan& plan, LinkSession& link, Seconds now)
{
    DownloadResult result;
    auto& c = cache_[plan.node_id];
    auto& unsynced = unsynced_[plan.node_id];

    // the hold request rides on the beacon acknowledgement
    if (!call(node, rpc::HoldRadio{plan.hold_seconds}, nullptr, result)) {
        result.contact_lost = true;
        ++stats_.contacts_lost;
        return result;
    }

    const std::size_t chunks = (params_.page_size + rpc::kChunkSize - 1) / rpc::kChunkSize;
    PageNo retained_from = 0;
    bool stop = false;
    auto expire = [&](PageNo p) {
        enqueue(msg::PageExpiredReport{plan.node_id, p, params_.id, now});
        c.covered.insert(p);
        unsynced.insert(p);
        result.expired.push_back(p);
    };

    for (const auto& range : plan.pages) {
        for (PageNo p = range.first; !stop && p <= range.last; ++p) {
            if (c.covered.contains(p))
                continue;
            if (p < retained_from) {
                expire(p);
                continue;
            }
            Bytes page;
            bool complete = true;
            for (std::size_t k = 0; k < chunks; ++k) {
                const auto resp = call(node, rpc::ReadPageChunk{p, static_cast<std::uint8_t>(k)}, &link, result);
                if (!resp) {
                    stop = true;
                    complete = false;
                    break;
                }
                if (resp->status == rpc::Status::page_expired) {
                    if (const auto* head = std::get_if<rpc::RetentionHead>(&resp->payload))
                        retained_from = head->head_page_no;
                    expire(p);
                    complete = false;
                    break;
                }
                const auto* data = std::get_if<Bytes>(&resp->payload);
                if (!resp->ok() || data == nullptr) {
                    stop = true;
                    complete = false;
                    break;
                }
                page.insert(page.end(), data->begin(), data->end());
            }
            if (!complete)
                continue;
            if (page.size() != params_.page_size)
                throw Error("reassembled page has " + std::to_string(page.size()) + " bytes");
            enqueue(msg::PageIngest{plan.node_id, p, std::move(page), params_.id, now});
            enqueue(msg::PageReport{plan.node_id, p, params_.id, now});
            c.covered.insert(p);
            unsynced.insert(p);
            result.pages.push_back(p);
        }
        if (stop)
            break;
    }

    if (!link.lost() && !stop && plan.config)
        result.config_applied = reconcile_config(node, *plan.config, link, result);
    if (!link.lost() && !stop && plan.fw_version)
        result.fw_applied = push_firmware(node, *plan.fw_version, link, result);

    std::size_t left = 0;
    for (const auto& range : plan.pages)
        for (PageNo p = range.first; p <= range.last; ++p)
            left += c.covered.contains(p) ? 0 : 1;
    c.pending = left;

    result.contact_lost = link.lost();
    result.retries = link.retries();
    result.elapsed_s = link.elapsed_s();
    busy_until_ = std::max(busy_until_, now + static_cast<Seconds>(std::ceil(result.elapsed_s)));

    stats_.pages_downloaded += result.pages.size();
    stats_.pages_expired += result.expired.size();
    stats_.contacts_lost += result.contact_lost ? 1 : 0;
    stats_.configs_applied += result.config_applied ? 1 : 0;
    stats_.firmware_applied += result.fw_applied ? 1 : 0;
    return result;
}

bool Gateway::reconcile_config(Node& node, const cloud::DesiredConfig& desired, LinkSession& link,
                               DownloadResult& result)
{
    const auto listing = call(node, rpc::GetTaskConfigs{}, &link, result);
    if (!listing || !listing->ok())
        return false;
    const auto* current = std::get_if<std::vector<TaskConfig>>(&listing->payload);
    if (current == nullptr)
        return false;

    using Key = std::pair<TaskId, std::uint32_t>;
    std::set<Key> have;
    std::set<Key> want;
    for (const auto& t : *current)
        have.insert({t.task_id, content_hash(t)});
    for (const auto& t : desired.tasks)
        want.insert({t.task_id, content_hash(t)});

    for (const auto& [id, hash] : have) {
        if (want.contains({id, hash}))
            continue;
        const auto r = call(node, rpc::DeleteTaskConfig{id}, &link, result);
        if (!r || (!r->ok() && r->status != rpc::Status::unknown_task))
            return false;
    }
    for (const auto& t : desired.tasks) {
        if (have.contains({t.task_id, content_hash(t)}))
            continue;
        const auto r = call(node, rpc::PutTaskConfig{t}, &link, result);
        if (!r || !r->ok())
            return false;
    }
    for (const auto& [key, value] : desired.params) {
        const auto r = call(node, rpc::SetParam{key, value}, &link, result);
        if (!r || !r->ok())
            return false;
    }
    const auto stamp = call(node, rpc::SetParam{"config_version", desired.version}, &link, result);
    if (!stamp || !stamp->ok())
        return false;
    enqueue(msg::ConfigApplied{desired.to_message(), params_.id, node.clock()});
    return true;
}

bool Gateway::push_firmware(Node& node, std::uint32_t version, LinkSession& link, DownloadResult& result)
{
    const auto& image = firmware_.at(version);
    if (image.chunk_size == 0 || image.chunk_size > rpc::kChunkSize)
        return false;
    std::uint16_t index = 0;
    for (std::size_t off = 0; off < image.image.size(); off += image.chunk_size, ++index) {
        const std::size_t end = std::min(image.image.size(), off + image.chunk_size);
        Bytes chunk(image.image.begin() + static_cast<std::ptrdiff_t>(off),
                    image.image.begin() + static_cast<std::ptrdiff_t>(end));
        const auto r = call(node, rpc::PutFwChunk{version, index, std::move(chunk)}, &link, result);
        if (!r || !r->ok())
            return false;
    }
    const auto r = call(node, rpc::ApplyFw{version, index, image.checksum}, &link, result);
    return r && r->ok();
}

bool Gateway::sync(cloud::CloudService* cloud, Seconds now)
{
    if (!online_ || cloud == nullptr)
        return false;
    while (!buffer_.empty()) {
        const auto& m = buffer_.front();
        const auto reply = cloud->handle(msg::to_json(m), now);
        if (reply.contains("error"))
            ++stats_.rejected_messages;
        if (std::holds_alternative<msg::PageIngest>(m)) {
            --buffered_pages_;
            const auto outcome = reply.value("outcome", "");
            if (outcome == "duplicate")
                ++stats_.duplicate_uploads;
            else if (outcome == "mismatch")
                ++stats_.mismatched_uploads;
        }
        buffer_.pop_front();
    }
    unsynced_.clear();

    std::set<NodeId> nodes;
    for (const auto& [id, c] : cache_)
        nodes.insert(id);
    for (const auto& [id, l] : cloud->ledger().nodes())
        nodes.insert(id);
    for (const auto& [id, c] : cloud->desired_configs())
        nodes.insert(id);
    for (const auto& [id, v] : cloud->desired_firmware_all())
        nodes.insert(id);
    for (NodeId id : nodes)
        refresh_from(*cloud, id);

    cloud->handle(msg::to_json(health(now)), now);
    ++stats_.syncs;
    return true;
}

msg::Health Gateway::health(Seconds now) const
{
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(time_of_day(now)) / kSecondsPerDay;
    msg::Health h;
    h.gateway_id = params_.id;
    h.time = now;
    h.uptime_s = now - start_time_;
    h.battery_mv = static_cast<std::uint16_t>(12400 + std::lround(300.0 * std::sin(phase - std::numbers::pi / 2)));
    h.temp_c = std::round(250.0 - 80.0 * std::cos(phase)) / 10.0;
    h.free_pages = static_cast<std::uint32_t>(params_.storage_pages - std::min<std::size_t>(
                                                                          params_.storage_pages, buffered_pages_));
    return h;
}

} // namespace roost
