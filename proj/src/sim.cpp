#include <roost/sim.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <tuple>

namespace roost {

namespace {

enum StreamKind : std::uint64_t { kWeatherStream = 1, kMobilityStream, kLinkStream, kOfflineStream, kFirmwareStream };

constexpr std::int32_t kBaseLatUdeg = -27470000;
constexpr std::int32_t kBaseLonUdeg = 153020000;

double to_double(Seconds s)
{
    return static_cast<double>(s);
}

} // namespace

std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::config_edit:
        return "config_edit";
    case EventKind::firmware_release:
        return "firmware_release";
    case EventKind::online_change:
        return "online_change";
    case EventKind::duty_tick:
        return "duty_tick";
    case EventKind::beacon:
        return "beacon";
    case EventKind::morning:
        return "morning";
    case EventKind::dusk:
        return "dusk";
    case EventKind::gateway_sync:
        return "gateway_sync";
    case EventKind::trace:
        return "trace";
    case EventKind::final_sync:
        return "final_sync";
    }
    return "?";
}

bool EventAfter::operator()(const Event& a, const Event& b) const
{
    return std::tie(a.time, a.kind, a.entity, a.seq) > std::tie(b.time, b.kind, b.entity, b.seq);
}

Percentiles Percentiles::of(std::vector<double> values)
{
    Percentiles p;
    p.count = values.size();
    if (values.empty())
        return p;
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values)
        sum += v;
    p.mean = sum / static_cast<double>(values.size());
    auto rank = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
        return values[std::clamp<std::size_t>(idx, 1, values.size()) - 1];
    };
    p.p50 = rank(0.50);
    p.p90 = rank(0.90);
    p.p99 = rank(0.99);
    p.max = values.back();
    return p;
}

struct Simulation::NodeState {
    NodeState(NodeSpec spec_, std::unique_ptr<Node> node_, MobilityModel mobility_, Rng link_rng_)
        : spec(std::move(spec_)), node(std::move(node_)), mobility(std::move(mobility_)), link_rng(link_rng_)
    {
    }

    NodeSpec spec;
    std::unique_ptr<Node> node;
    MobilityModel mobility;
    Rng link_rng;
    std::optional<CampId> camp;
    bool contact = false;
    Seconds contact_end = 0;
    std::size_t contact_index = 0;
    std::uint64_t epoch = 0;
    Seconds busy_until = -1;
    double page_rate = 5.0;
    int last_contact_day = -1;
    Morning next_morning;
    std::uint64_t pages_downloaded = 0;

    // running totals at the start of the current day
    NodeCounters day_counters;
    EnergyAccount day_energy;
    PageNo day_next_page = 0;
    std::uint64_t day_downloaded = 0;
    std::uint16_t day_min_mv = 0xFFFF;
    std::uint16_t day_max_mv = 0;
    bool day_contact = false;

    void observe_voltage()
    {
        const auto mv = node->battery().voltage_mv();
        day_min_mv = std::min(day_min_mv, mv);
        day_max_mv = std::max(day_max_mv, mv);
    }
};

struct Simulation::GatewayState {
    GatewaySpec spec;
    std::unique_ptr<Gateway> gw;
    std::vector<TimeSpan> offline;
};

Simulation::Simulation(Scenario scenario, std::uint64_t seed) : scenario_(std::move(scenario)), seed_(seed)
{
    scenario_.validate();
}

Simulation::~Simulation() = default;

const Node& Simulation::node(NodeId id) const
{
    return *nodes_.at(node_index_.at(id))->node;
}

std::vector<const Node*> Simulation::nodes() const
{
    std::vector<const Node*> out;
    for (const auto& n : nodes_)
        out.push_back(n->node.get());
    return out;
}

std::vector<const Gateway*> Simulation::gateways() const
{
    std::vector<const Gateway*> out;
    for (const auto& g : gateways_)
        out.push_back(g->gw.get());
    return out;
}

void Simulation::schedule(Seconds t, EventKind kind, std::uint32_t entity, std::uint64_t arg)
{
    queue_.push(Event{t, kind, entity, seq_++, arg});
}

void Simulation::log(Seconds t, std::string_view what, const std::string& detail)
{
    if (event_log_ != nullptr)
        *event_log_ << t << ' ' << what << ' ' << detail << '\n';
}

bool Simulation::in_final_phase(Seconds t) const
{
    if (scenario_.final_collection_days <= 0)
        return false;
    return t >= static_cast<Seconds>(scenario_.duration_days - scenario_.final_collection_days) * kSecondsPerDay;
}

bool Simulation::offline_at(const GatewayState& g, Seconds t) const
{
    for (const auto& w : g.offline)
        if (t >= w.start && t < w.end)
            return true;
    return false;
}

std::vector<Simulation::GatewayState*> Simulation::gateways_at(CampId camp)
{
    std::vector<GatewayState*> out;
    for (auto& g : gateways_)
        if (g->spec.camp == camp)
            out.push_back(g.get());
    return out;
}

void Simulation::setup()
{
    const Seconds end = scenario_.end_time();
    registry_ = std::make_shared<const tdf::MetadataRegistry>(tdf::builtin_registry());
    cloud_ = std::make_unique<cloud::CloudService>(*registry_, scenario_.nodes.front().page_size);
    if (journal_ != nullptr)
        cloud_->attach_journal(journal_, scenario_.journal_snapshot_every);

    const auto& w = scenario_.weather;
    Rng weather = Rng::stream(seed_, kWeatherStream, 0);
    std::vector<double> factors;
    for (int d = 0; d <= scenario_.duration_days; ++d) {
        double f = weather.uniform(w.cloudy_min, w.cloudy_max);
        for (const auto& dr : w.droughts)
            if (d >= dr.start_day && d < dr.start_day + dr.days)
                f *= dr.factor;
        factors.push_back(f);
    }

    std::vector<CampId> camp_ids;
    for (const auto& c : scenario_.camps)
        camp_ids.push_back(c.id);

    for (const auto& spec : scenario_.nodes) {
        HarvestProfile harvest;
        harvest.peak_mw = spec.battery.peak_harvest_mw;
        harvest.sunrise_s = w.sunrise_s;
        harvest.sunset_s = w.sunset_s;
        harvest.daily_factor = factors;
        BatteryModel battery(spec.battery.capacity_mj, spec.battery.initial_soc, VoltageCurve(), harvest,
                             spec.battery.loads);
        auto node = std::make_unique<Node>(spec.id, std::move(battery), PageLog(spec.page_size, spec.capacity_pages),
                                           registry_, spec.params, 0);
        for (const auto& t : spec.tasks)
            node->install_task(t);
        node->enable_telemetry(spec.telemetry);
        node->set_next_beacon_at(1 + static_cast<Seconds>(spec.id * 7919u % spec.params.beacon_period_s));

        auto st = std::make_unique<NodeState>(
            spec, std::move(node),
            MobilityModel(scenario_.mobility, camp_ids, spec.home_camp, Rng::stream(seed_, kMobilityStream, spec.id),
                          spec.absences),
            Rng::stream(seed_, kLinkStream, spec.id));
        st->page_rate = scenario_.link.page_rate;
        node_index_[spec.id] = nodes_.size();
        nodes_.push_back(std::move(st));
    }

    const Seconds final_start =
        scenario_.final_collection_days > 0
            ? static_cast<Seconds>(scenario_.duration_days - scenario_.final_collection_days) * kSecondsPerDay
            : end + 1;
    for (const auto& spec : scenario_.gateways) {
        GatewayParams gp;
        gp.id = spec.id;
        gp.duty = spec.duty;
        gp.storage_pages = spec.storage_pages;
        gp.page_size = scenario_.nodes.front().page_size;
        auto st = std::make_unique<GatewayState>(GatewayState{spec, std::make_unique<Gateway>(gp, 0), {}});

        std::vector<TimeSpan> windows = spec.offline;
        Rng r = Rng::stream(seed_, kOfflineStream, spec.id);
        const auto& ro = spec.random_offline;
        for (int d = 0; d < scenario_.duration_days; ++d) {
            const bool down = r.bernoulli(ro.p_daily);
            const double at = r.uniform();
            const double hours = r.uniform(ro.min_hours, ro.max_hours);
            if (down) {
                const Seconds s = static_cast<Seconds>(d) * kSecondsPerDay +
                                  static_cast<Seconds>(std::floor(at * kSecondsPerDay));
                windows.push_back({s, s + static_cast<Seconds>(std::llround(hours * 3600.0))});
            }
        }
        for (auto& win : windows) {
            win.end = std::min(win.end, final_start);
            if (win.end > win.start)
                st->offline.push_back(win);
        }
        st->gw->set_online(!offline_at(*st, 0));
        for (const auto& win : st->offline) {
            if (win.start > 0 && win.start < end)
                schedule(win.start, EventKind::online_change, spec.id);
            if (win.end < end)
                schedule(win.end, EventKind::online_change, spec.id);
        }
        if (!spec.duty.always_on)
            schedule(0, EventKind::duty_tick, spec.id);
        else
            st->gw->duty_tick(0);
        schedule(std::min(end, spec.sync_interval_s), EventKind::gateway_sync, spec.id);
        schedule(end, EventKind::final_sync, spec.id);
        gateway_index_[spec.id] = gateways_.size();
        gateways_.push_back(std::move(st));
    }

    for (std::size_t i = 0; i < scenario_.config_edits.size(); ++i)
        schedule(scenario_.config_edits[i].time, EventKind::config_edit, 0, i);
    for (std::size_t i = 0; i < scenario_.firmware.size(); ++i)
        schedule(scenario_.firmware[i].time, EventKind::firmware_release, 0, i);
    schedule(0, EventKind::trace, 0);

    for (auto& n : nodes_) {
        n->camp = n->spec.home_camp;
        n->node->set_position(kBaseLatUdeg + static_cast<std::int32_t>(n->spec.home_camp) * 15000,
                              kBaseLonUdeg + static_cast<std::int32_t>(n->spec.home_camp) * 12000);
        start_contact(*n, 0);
        const Seconds dusk = scenario_.mobility.forage_start_s;
        if (dusk < end)
            schedule(dusk, EventKind::dusk, n->spec.id, 0);
    }
}

void Simulation::start_contact(NodeState& n, Seconds t)
{
    if (!n.camp || gateways_at(*n.camp).empty())
        return;
    n.contact = true;
    n.day_contact = true;
    const Seconds dusk = day_of(t) * kSecondsPerDay + scenario_.mobility.forage_start_s;
    const bool stays = scenario_.mobility.mode == MobilityParams::Mode::resident || in_final_phase(t);
    n.contact_end = stays || dusk <= t ? scenario_.end_time() : std::min(dusk, scenario_.end_time());
    const auto& link = scenario_.link;
    n.page_rate = link.rate_max > link.rate_min ? n.link_rng.uniform(link.rate_min, link.rate_max) : link.page_rate;
    n.contact_index = metrics_.contacts.size();
    metrics_.contacts.push_back({n.spec.id, *n.camp, t, -1});
    const int day = static_cast<int>(day_of(t));
    if (n.last_contact_day >= 0)
        metrics_.intercontacts.push_back({n.spec.id, n.last_contact_day, day - n.last_contact_day});
    n.last_contact_day = day;
    ++n.epoch;
    log(t, "contact_start", "node=" + std::to_string(n.spec.id) + " camp=" + std::to_string(*n.camp));
    schedule_next_beacon(n);
}

void Simulation::end_contact(NodeState& n, Seconds t)
{
    if (!n.contact)
        return;
    n.contact = false;
    metrics_.contacts[n.contact_index].end = t;
    ++n.epoch;
    log(t, "contact_end", "node=" + std::to_string(n.spec.id));
}

void Simulation::schedule_next_beacon(NodeState& n)
{
    const Seconds b = n.node->next_beacon_at();
    if (n.contact && b <= n.contact_end && b <= scenario_.end_time())
        schedule(b, EventKind::beacon, n.spec.id, n.epoch);
}

void Simulation::on_beacon(NodeState& n, const Event& e)
{
    if (e.arg != n.epoch || !n.contact)
        return;
    const Seconds t = e.time;
    auto beacons = n.node->advance_to(t);
    if (beacons.empty() || beacons.back().time != t) {
        schedule_next_beacon(n);
        return;
    }
    const Beacon b = beacons.back();

    for (auto* g : gateways_at(*n.camp)) {
        auto& gw = *g->gw;
        if (!g->spec.duty.always_on)
            gw.duty_tick(t);
        if (!gw.awake())
            continue;
        if (n.busy_until > t)
            break;
        for (auto& cp : metrics_.configs)
            if (cp.node == n.spec.id && cp.edited_at <= t && !cp.first_contact_after)
                cp.first_contact_after = t;

        const auto plan = gw.on_beacon(b, t, gw.online() ? cloud_.get() : nullptr);
        if (!plan)
            continue;

        const double window = to_double(n.contact_end - t);
        LinkSession link(scenario_.link, n.link_rng, window, n.page_rate);
        SessionRecord rec;
        rec.time = t;
        rec.node = n.spec.id;
        rec.gateway = gw.id();
        rec.planned = plan->page_count();
        rec.window_s = window;
        rec.page_rate = n.page_rate;
        rec.charge_before_mj = n.node->battery().charge_mj();
        const auto result = gw.execute_plan(*n.node, *plan, link, t);
        rec.pages = result.pages.size();
        rec.expired = result.expired.size();
        rec.elapsed_s = result.elapsed_s;
        rec.contact_lost = result.contact_lost;
        rec.config_applied = result.config_applied;
        rec.fw_applied = result.fw_applied;
        rec.charge_after_mj = n.node->battery().charge_mj();
        metrics_.sessions.push_back(rec);
        n.observe_voltage();

        n.busy_until = t + std::max<Seconds>(1, static_cast<Seconds>(std::ceil(result.elapsed_s)));
        n.pages_downloaded += result.pages.size();
        for (PageNo p : result.pages)
            if (!transferred_.insert({n.spec.id, p}).second)
                ++metrics_.duplicate_transfers;
        if (result.config_applied) {
            auto it = config_index_.find({n.spec.id, plan->config->version});
            if (it != config_index_.end() && !metrics_.configs[it->second].applied_at)
                metrics_.configs[it->second].applied_at = t;
        }
        std::ostringstream os;
        os << "node=" << n.spec.id << " gw=" << gw.id() << " planned=" << rec.planned << " pages=" << rec.pages
           << " expired=" << rec.expired << " exchanges=" << result.exchanges << " lost=" << result.contact_lost
           << " config=" << result.config_applied << " fw=" << result.fw_applied;
        log(t, "session", os.str());
    }
    schedule_next_beacon(n);
}

void Simulation::on_morning(NodeState& n, Seconds t, int day)
{
    n.node->advance_to(t);
    n.node->set_motion(false);
    const auto& m = n.next_morning;
    std::optional<CampId> camp = m.camp;
    if (in_final_phase(t))
        camp = n.spec.home_camp;
    if (!n.contact) {
        n.camp = camp;
        if (n.camp) {
            n.node->set_position(kBaseLatUdeg + static_cast<std::int32_t>(*n.camp) * 15000,
                                 kBaseLonUdeg + static_cast<std::int32_t>(*n.camp) * 12000);
            start_contact(n, t);
        }
    }
    const Seconds dusk = static_cast<Seconds>(day) * kSecondsPerDay + scenario_.mobility.forage_start_s;
    if (dusk < scenario_.end_time())
        schedule(dusk, EventKind::dusk, n.spec.id, static_cast<std::uint64_t>(day));
}

void Simulation::on_dusk(NodeState& n, Seconds t, int day)
{
    n.node->advance_to(t);
    n.node->set_motion(true);
    const bool stays = scenario_.mobility.mode == MobilityParams::Mode::resident || in_final_phase(t);
    if (!stays) {
        end_contact(n, t);
        n.camp.reset();
    }
    n.next_morning = n.mobility.morning(day + 1);
    if (n.next_morning.time < scenario_.end_time())
        schedule(n.next_morning.time, EventKind::morning, n.spec.id, static_cast<std::uint64_t>(day + 1));
}

void Simulation::on_duty(GatewayState& g, Seconds t)
{
    const bool was = g.gw->awake();
    const bool now = g.gw->duty_tick(t);
    if (was != now)
        log(t, now ? "gateway_wake" : "gateway_sleep", "gw=" + std::to_string(g.spec.id));
    if (t + scenario_.duty_tick_s <= scenario_.end_time())
        schedule(t + scenario_.duty_tick_s, EventKind::duty_tick, g.spec.id);
}

void Simulation::on_sync(GatewayState& g, Seconds t)
{
    if (g.spec.duty.always_on)
        g.gw->duty_tick(t);
    const auto buffered = g.gw->upload_buffer().size();
    if (g.gw->sync(cloud_.get(), t) && buffered > 0)
        log(t, "sync", "gw=" + std::to_string(g.spec.id) + " messages=" + std::to_string(buffered));
}

void Simulation::on_online_change(GatewayState& g, Seconds t)
{
    const bool online = !offline_at(g, t);
    if (online == g.gw->online())
        return;
    g.gw->set_online(online);
    log(t, online ? "gateway_online" : "gateway_offline", "gw=" + std::to_string(g.spec.id));
    if (online)
        on_sync(g, t);
}

void Simulation::on_trace(Seconds t)
{
    const bool sample = t % scenario_.trace_interval_s == 0;
    const bool day_end = t > 0 && t % kSecondsPerDay == 0;
    for (auto& np : nodes_) {
        auto& n = *np;
        n.node->advance_to(t);
        n.observe_voltage();
        const auto& c = n.node->counters();
        const auto gps_high = c.samples_by_activity[static_cast<std::size_t>(Activity::gps_high)];
        const auto gps_low = c.samples_by_activity[static_cast<std::size_t>(Activity::gps_low)];
        if (sample)
            metrics_.traces.push_back({t, n.spec.id, n.node->battery().voltage_mv(), n.node->battery().charge_mj(),
                                       n.node->battery().fraction(), c.records, gps_high, gps_low,
                                       n.node->log().max_page(), n.pages_downloaded, n.contact});
        if (day_end) {
            const auto& d0 = n.day_counters;
            const auto& e = n.node->energy();
            DailyRow row;
            row.day = static_cast<int>(t / kSecondsPerDay) - 1;
            row.node = n.spec.id;
            row.records = c.records - d0.records;
            row.gps_high = gps_high - d0.samples_by_activity[static_cast<std::size_t>(Activity::gps_high)];
            row.gps_low = gps_low - d0.samples_by_activity[static_cast<std::size_t>(Activity::gps_low)];
            row.task_starts = c.task_starts - d0.task_starts;
            row.min_mv = n.day_min_mv;
            row.max_mv = n.day_max_mv;
            row.pages_finalized = n.node->log().next_page_no() - n.day_next_page;
            row.pages_downloaded = n.pages_downloaded - n.day_downloaded;
            row.harvested_mj = e.harvested_mj - n.day_energy.harvested_mj;
            row.consumed_mj = e.consumed_mj - n.day_energy.consumed_mj;
            row.contact = n.day_contact;
            metrics_.daily.push_back(row);

            n.day_counters = c;
            n.day_energy = e;
            n.day_next_page = n.node->log().next_page_no();
            n.day_downloaded = n.pages_downloaded;
            n.day_min_mv = 0xFFFF;
            n.day_max_mv = 0;
            n.day_contact = n.contact;
            n.observe_voltage();
        }
    }
    const Seconds next_sample = (t / scenario_.trace_interval_s + 1) * scenario_.trace_interval_s;
    const Seconds next_day = (t / kSecondsPerDay + 1) * kSecondsPerDay;
    const Seconds next = std::min(next_sample, next_day);
    if (next <= scenario_.end_time())
        schedule(next, EventKind::trace, 0);
}

void Simulation::dispatch(const Event& e)
{
    switch (e.kind) {
    case EventKind::config_edit: {
        const auto& ce = scenario_.config_edits[e.arg];
        const auto version = cloud_->set_desired_config(ce.node, ce.tasks, ce.params);
        config_index_[{ce.node, version}] = metrics_.configs.size();
        metrics_.configs.push_back({ce.node, version, e.time, std::nullopt, std::nullopt});
        log(e.time, "config_edit", "node=" + std::to_string(ce.node) + " version=" + std::to_string(version));
        break;
    }
    case EventKind::firmware_release: {
        const auto& fr = scenario_.firmware[e.arg];
        Rng r = Rng::stream(seed_, kFirmwareStream, fr.version);
        Bytes image(fr.size_bytes);
        for (auto& b : image)
            b = static_cast<std::uint8_t>(r.next() & 0xFF);
        cloud_->register_firmware(cloud::FirmwareImage::make(fr.version, std::move(image), fr.chunk_size));
        for (NodeId id : fr.nodes)
            cloud_->set_desired_firmware(id, fr.version);
        log(e.time, "firmware_release", "version=" + std::to_string(fr.version));
        break;
    }
    case EventKind::online_change:
        on_online_change(*gateways_[gateway_index_.at(e.entity)], e.time);
        break;
    case EventKind::duty_tick:
        on_duty(*gateways_[gateway_index_.at(e.entity)], e.time);
        break;
    case EventKind::beacon:
        on_beacon(*nodes_[node_index_.at(e.entity)], e);
        break;
    case EventKind::morning:
        on_morning(*nodes_[node_index_.at(e.entity)], e.time, static_cast<int>(e.arg));
        break;
    case EventKind::dusk:
        on_dusk(*nodes_[node_index_.at(e.entity)], e.time, static_cast<int>(e.arg));
        break;
    case EventKind::gateway_sync: {
        auto& g = *gateways_[gateway_index_.at(e.entity)];
        on_sync(g, e.time);
        if (e.time + g.spec.sync_interval_s < scenario_.end_time())
            schedule(e.time + g.spec.sync_interval_s, EventKind::gateway_sync, e.entity);
        break;
    }
    case EventKind::trace:
        on_trace(e.time);
        break;
    case EventKind::final_sync:
        on_sync(*gateways_[gateway_index_.at(e.entity)], e.time);
        break;
    }
}

const Metrics& Simulation::run()
{
    if (ran_)
        throw Error("simulation already ran");
    ran_ = true;
    setup();
    while (!queue_.empty()) {
        const Event e = queue_.top();
        queue_.pop();
        ++metrics_.events;
        dispatch(e);
    }
    finish();
    return metrics_;
}

void Simulation::finish()
{
    const auto& store = cloud_->store();
    metrics_.pages_stored = store.size();
    metrics_.ingest_duplicates = store.duplicates();
    metrics_.ingest_mismatches = store.mismatches();
    metrics_.quarantined_pages = store.quarantined();
    for (const auto& s : metrics_.sessions)
        metrics_.page_transfers += s.pages;

    std::set<std::pair<NodeId, PageNo>> buffered_pages;
    std::set<std::pair<NodeId, PageNo>> buffered_expired;
    for (const auto& g : gateways_) {
        metrics_.rejected_messages += g->gw->stats().rejected_messages;
        metrics_.gateways.emplace_back(g->spec.id, g->gw->stats());
        for (const auto& m : g->gw->upload_buffer()) {
            if (const auto* p = std::get_if<msg::PageIngest>(&m))
                buffered_pages.insert({p->node_id, p->page_no});
            else if (const auto* x = std::get_if<msg::PageExpiredReport>(&m))
                buffered_expired.insert({x->node_id, x->page_no});
        }
    }
    for (const auto& [id, l] : cloud_->ledger().nodes())
        metrics_.pages_expired_reported += l.expired.count();

    std::vector<double> latencies;
    for (const auto& [key, sp] : store.pages()) {
        for (const auto& r : sp.records) {
            latencies.push_back(to_double(sp.received_at - static_cast<Seconds>(r.timestamp)));
            if (sp.received_at < sp.time || sp.time < static_cast<Seconds>(r.timestamp))
                ++metrics_.causality_violations;
        }
    }
    metrics_.latency_s = Percentiles::of(std::move(latencies));

    for (const auto& np : nodes_) {
        const auto& node = *np->node;
        const NodeId id = node.id();
        const auto& log = node.log();
        const auto& per_page = node.records_per_page();
        metrics_.records_logged += node.counters().records;
        metrics_.pages_finalized += log.next_page_no();
        const auto* ledger = cloud_->ledger().find(id);
        for (PageNo p = 0; p < per_page.size(); ++p) {
            const std::uint64_t recs = per_page[p];
            auto bump = [&](std::uint64_t Conservation::* field, bool finalized) {
                metrics_.records.*field += recs;
                if (finalized)
                    metrics_.pages.*field += 1;
            };
            if (p >= log.next_page_no()) {
                bump(&Conservation::pending, false);
            } else if (store.find(id, p) != nullptr) {
                bump(&Conservation::stored, true);
            } else if (buffered_pages.contains({id, p})) {
                bump(&Conservation::buffered, true);
            } else if ((ledger != nullptr && ledger->expired.contains(p)) || buffered_expired.contains({id, p})) {
                bump(&Conservation::expired, true);
            } else if (p >= log.head_page_no()) {
                bump(&Conservation::pending, true);
            } else {
                bump(&Conservation::unaccounted, true);
            }
        }
    }

    std::vector<double> delays;
    for (const auto& c : metrics_.configs)
        if (c.applied_at)
            delays.push_back(to_double(*c.applied_at - c.edited_at));
    metrics_.config_delay_s = Percentiles::of(std::move(delays));

    std::ostringstream os;
    os << "records=" << metrics_.records_logged << " stored_pages=" << metrics_.pages_stored
       << " transfers=" << metrics_.page_transfers << " duplicates=" << metrics_.duplicate_transfers;
    log(scenario_.end_time(), "end", os.str());
}

Metrics simulate(const Scenario& scenario, std::uint64_t seed, std::ostream* event_log)
{
    Simulation sim(scenario, seed);
    sim.set_event_log(event_log);
    return sim.run();
}

} // namespace roost
