#include <roost/node.hpp>

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace roost {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool is_gps(Activity a)
{
    return a == Activity::gps_high || a == Activity::gps_low;
}

} // namespace

Node::Node(NodeId id, BatteryModel battery, PageLog log, std::shared_ptr<const tdf::MetadataRegistry> registry,
           NodeParams params, Seconds start_time)
    : id_(id), clock_(start_time), battery_(std::move(battery)), log_(std::move(log)), registry_(std::move(registry)),
      params_struct_(params), params_beacon_period_(params.beacon_period_s),
      next_beacon_at_(start_time + params.beacon_period_s)
{
    if (!registry_)
        throw Error("node needs a metadata registry");
    if (params.beacon_period_s <= 0 || params.max_step_s <= 0)
        throw Error("beacon period and max step must be positive");
    params_["beacon_period_s"] = params.beacon_period_s;
}

void Node::install_task(const TaskConfig& task)
{
    validate(task);
    tasks_[task.task_id] = task;
}

std::vector<Transition> Node::evaluate_tasks() const
{
    return roost::evaluate_tasks(tasks_, running_, clock_, battery_.voltage_mv(), motion_);
}

void Node::apply(std::span<const Transition> transitions)
{
    for (const auto& tr : transitions) {
        if (tr.kind == Transition::Kind::stop) {
            running_.erase(tr.task_id);
        } else if (tasks_.contains(tr.task_id) && !running_.contains(tr.task_id)) {
            running_[tr.task_id] = RunningTask{0, clock_};
            ++counters_.task_starts;
        }
    }
}

void Node::charge(Activity activity, double seconds)
{
    const double mj = battery_.loads()[activity] * seconds;
    energy_.consumed_mj += mj;
    energy_.by_activity_mj[static_cast<std::size_t>(activity)] += mj;
    energy_.clamped_mj += battery_.apply(-mj);
}

Bytes Node::sample_payload(const tdf::TypeDescriptor& desc, Seconds t) const
{
    std::vector<std::int64_t> values(desc.fields.size(), 0);
    switch (desc.type_id) {
    case tdf::types::kBattery:
        values[0] = battery_.voltage_mv();
        break;
    case tdf::types::kGps:
        // small deterministic wander around the current position
        values[0] = lat_udeg_ + static_cast<std::int32_t>((t * 7919 + id_ * 104729) % 2001) - 1000;
        values[1] = lon_udeg_ + static_cast<std::int32_t>((t * 6271 + id_ * 15485863) % 2001) - 1000;
        break;
    case tdf::types::kTemperature:
        values[0] = std::lround(2200.0 + 600.0 * std::sin(2.0 * std::numbers::pi * time_of_day(t) / kSecondsPerDay));
        break;
    case tdf::types::kActivity:
        values[0] = motion_ ? 1 : 0;
        values[1] = static_cast<std::int64_t>(counters_.records & 0xFFFF);
        break;
    default:
        break;
    }
    return tdf::pack_fields(desc, values);
}

void Node::log_sample(const TaskConfig& task, RunningTask& run, Seconds t)
{
    const auto* desc = registry_->find(task.type_id);
    if (desc == nullptr)
        return;
    tdf::Record rec{task.type_id, static_cast<std::uint32_t>(t), sample_payload(*desc, t)};
    scratch_.clear();
    tdf::encode_record_into(rec, scratch_);
    const auto result = log_.append(scratch_);
    if (records_per_page_.size() <= result.page_no)
        records_per_page_.resize(result.page_no + 1, 0);
    ++records_per_page_[result.page_no];
    ++run.samples_taken;
    ++counters_.records;
    ++counters_.samples_by_activity[static_cast<std::size_t>(task.activity)];
    if (is_gps(task.activity))
        ++counters_.gps_samples;
    if (telemetry_on_)
        telemetry_.samples.push_back({t, task.task_id});
}

void Node::step(Seconds dt)
{
    if (dt <= 0)
        throw Error("node step requires dt > 0");
    const Seconds t0 = clock_;
    const Seconds t1 = clock_ + dt;
    const std::uint16_t mv = battery_.voltage_mv();

    struct Due {
        Seconds time;
        int priority;
        TaskId task_id;
    };
    std::vector<Due> due;
    double sample_mj = 0;
    for (auto& [id, run] : running_) {
        const auto& task = tasks_.at(id);
        if (run.next_sample_at < t0)
            run.next_sample_at = t0;
        for (Seconds s = run.next_sample_at; s < t1; s += task.sample_period_s) {
            ConditionContext ctx{s, mv, motion_, run.samples_taken};
            if (all_hold(task.gate, ctx))
                due.push_back({s, -static_cast<int>(task.priority), id});
            run.next_sample_at = s + task.sample_period_s;
        }
    }
    std::sort(due.begin(), due.end(), [](const Due& a, const Due& b) {
        return std::tie(a.time, a.priority, a.task_id) < std::tie(b.time, b.priority, b.task_id);
    });
    for (const auto& d : due) {
        const auto& task = tasks_.at(d.task_id);
        log_sample(task, running_.at(d.task_id), d.time);
        const double on = std::min(task.on_time_s, static_cast<double>(task.sample_period_s));
        const double mj = battery_.loads()[task.activity] * on;
        energy_.by_activity_mj[static_cast<std::size_t>(task.activity)] += mj;
        sample_mj += mj;
    }

    const double seconds = static_cast<double>(dt);
    const double harvest_mj = battery_.harvest().power_mw(t0) * seconds;
    const double sleep_mj = battery_.loads()[Activity::sleep] * seconds;
    energy_.by_activity_mj[static_cast<std::size_t>(Activity::sleep)] += sleep_mj;
    const double load_mj = sleep_mj + sample_mj;

    energy_.harvested_mj += harvest_mj;
    energy_.consumed_mj += load_mj;
    energy_.clamped_mj += battery_.apply(harvest_mj - load_mj);
    clock_ = t1;
}

Beacon Node::emit_beacon()
{
    charge(Activity::beacon, params_struct_.beacon_airtime_s);
    ++counters_.beacons;
    last_beacon_at_ = clock_;
    return Beacon{id_, log_.max_page(), battery_.voltage_mv(), config_version_, fw_version_, clock_};
}

std::vector<Beacon> Node::advance_to(Seconds t)
{
    std::vector<Beacon> beacons;
    while (clock_ < t) {
        Seconds target = std::min(t, clock_ + params_struct_.max_step_s);
        if (next_beacon_at_ > clock_)
            target = std::min(target, next_beacon_at_);
        const auto transitions = evaluate_tasks();
        apply(transitions);
        if (telemetry_on_)
            telemetry_.readings.push_back({clock_, battery_.voltage_mv()});
        step(target - clock_);
        if (clock_ == next_beacon_at_) {
            beacons.push_back(emit_beacon());
            next_beacon_at_ += params_beacon_period_;
        }
    }
    return beacons;
}

bool Node::radio_awake() const
{
    return clock_ == last_beacon_at_ || clock_ <= hold_until_;
}

rpc::Response Node::read_chunk(const rpc::ReadPageChunk& c, std::uint8_t cmd)
{
    try {
        const Page& page = log_.read_page(c.page_no);
        const std::size_t chunks = (page.data.size() + rpc::kChunkSize - 1) / rpc::kChunkSize;
        if (c.chunk_index >= chunks)
            return {cmd, rpc::Status::bad_chunk_index, {}};
        const std::size_t begin = c.chunk_index * rpc::kChunkSize;
        const std::size_t end = std::min(page.data.size(), begin + rpc::kChunkSize);
        charge(Activity::page_tx, params_struct_.rpc_exchange_s);
        return {cmd, rpc::Status::ok, Bytes(page.data.begin() + static_cast<std::ptrdiff_t>(begin),
                                            page.data.begin() + static_cast<std::ptrdiff_t>(end))};
    } catch (const PageExpired&) {
        return {cmd, rpc::Status::page_expired, rpc::RetentionHead{log_.head_page_no()}};
    } catch (const PageNotReady&) {
        return {cmd, rpc::Status::page_not_ready, {}};
    }
}

rpc::Response Node::apply_fw(const rpc::ApplyFw& c, std::uint8_t cmd)
{
    if (c.version != fw_staging_version_ || c.chunk_count == 0)
        return {cmd, rpc::Status::bad_chunk_index, {}};
    uLong crc = crc32(0L, Z_NULL, 0);
    for (std::uint16_t i = 0; i < c.chunk_count; ++i) {
        auto it = fw_staging_.find(i);
        if (it == fw_staging_.end())
            return {cmd, rpc::Status::bad_chunk_index, {}};
        crc = crc32(crc, it->second.data(), static_cast<uInt>(it->second.size()));
    }
    if (static_cast<std::uint32_t>(crc) != c.checksum || fw_staging_.size() != c.chunk_count)
        return {cmd, rpc::Status::fw_checksum_mismatch, {}};
    fw_version_ = c.version;
    fw_staging_.clear();
    fw_staging_version_ = 0;
    return {cmd, rpc::Status::ok, {}};
}

rpc::Response Node::handle_rpc(const rpc::Command& cmd)
{
    const auto id = static_cast<std::uint8_t>(rpc::command_id(cmd));
    ++counters_.rpc_requests;
    charge(Activity::radio_rx, params_struct_.rpc_exchange_s);

    return std::visit(
        overloaded{
            [&](const rpc::GetStatus&) -> rpc::Response {
                rpc::NodeStatus s{id_,
                                  static_cast<std::uint32_t>(clock_),
                                  battery_.voltage_mv(),
                                  config_version_,
                                  fw_version_,
                                  log_.head_page_no(),
                                  log_.next_page_no(),
                                  static_cast<std::uint16_t>(running_.size())};
                return {id, rpc::Status::ok, s};
            },
            [&](const rpc::ReadPageChunk& c) { return read_chunk(c, id); },
            [&](const rpc::GetTaskConfigs&) -> rpc::Response {
                std::vector<TaskConfig> out;
                for (const auto& [tid, t] : tasks_)
                    out.push_back(t);
                return {id, rpc::Status::ok, std::move(out)};
            },
            [&](const rpc::PutTaskConfig& c) -> rpc::Response {
                try {
                    validate(c.task);
                } catch (const InvalidTaskConfig&) {
                    return {id, rpc::Status::bad_request, {}};
                }
                if (registry_->find(c.task.type_id) == nullptr)
                    return {id, rpc::Status::bad_request, {}};
                tasks_[c.task.task_id] = c.task;
                running_.erase(c.task.task_id);
                ++config_version_;
                return {id, rpc::Status::ok, rpc::ConfigVersion{config_version_}};
            },
            [&](const rpc::DeleteTaskConfig& c) -> rpc::Response {
                if (tasks_.erase(c.task_id) == 0)
                    return {id, rpc::Status::unknown_task, {}};
                running_.erase(c.task_id);
                ++config_version_;
                return {id, rpc::Status::ok, rpc::ConfigVersion{config_version_}};
            },
            [&](const rpc::SetParam& c) -> rpc::Response {
                if (c.key.empty())
                    return {id, rpc::Status::bad_request, {}};
                if (c.key == "beacon_period_s") {
                    if (c.value <= 0)
                        return {id, rpc::Status::bad_request, {}};
                    params_beacon_period_ = c.value;
                    next_beacon_at_ = std::min(next_beacon_at_, clock_ + c.value);
                } else if (c.key == "config_version") {
                    if (c.value < 0 || c.value > 0xFFFFFFFF)
                        return {id, rpc::Status::bad_request, {}};
                    config_version_ = static_cast<std::uint32_t>(c.value);
                    return {id, rpc::Status::ok, rpc::ConfigVersion{config_version_}};
                }
                params_[c.key] = c.value;
                return {id, rpc::Status::ok, {}};
            },
            [&](const rpc::PutFwChunk& c) -> rpc::Response {
                if (c.data.empty() || c.data.size() > rpc::kChunkSize || c.version == 0)
                    return {id, rpc::Status::bad_request, {}};
                if (c.version != fw_staging_version_) {
                    fw_staging_.clear();
                    fw_staging_version_ = c.version;
                }
                fw_staging_[c.index] = c.data;
                return {id, rpc::Status::ok, {}};
            },
            [&](const rpc::ApplyFw& c) { return apply_fw(c, id); },
            [&](const rpc::HoldRadio& c) -> rpc::Response {
                hold_until_ = clock_ + c.seconds;
                return {id, rpc::Status::ok, {}};
            },
        },
        cmd);
}

std::optional<Bytes> Node::handle_packet(std::span<const std::uint8_t> packet)
{
    if (!radio_awake())
        return std::nullopt;
    try {
        return rpc::encode(handle_rpc(rpc::decode_command(packet)));
    } catch (const rpc::UnknownCommand& e) {
        return rpc::encode(rpc::Response{e.id, rpc::Status::unknown_command, {}});
    } catch (const rpc::BadPacket&) {
        return rpc::encode(rpc::Response{packet.empty() ? std::uint8_t{0} : packet[0], rpc::Status::bad_request, {}});
    }
}

} // namespace roost
