#include <roost/scenario.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace roost {

using nlohmann::json;

InvalidScenario::InvalidScenario(std::string field_, const std::string& message)
    : Error("scenario field '" + field_ + "': " + message), field(std::move(field_))
{
}

namespace {

/// A JSON object plus the dotted path it was found at.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw InvalidScenario(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string at(std::string_view key) const
    {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void allow(std::initializer_list<std::string_view> keys) const
    {
        for (const auto& [k, v] : j_.items())
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
                throw InvalidScenario(at(k), "unknown field");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& raw(const char* key) const { return j_.at(key); }

    Obj obj(const char* key) const
    {
        static const json empty = json::object();
        return has(key) ? Obj(j_.at(key), at(key)) : Obj(empty, at(key));
    }

    std::vector<Obj> list(const char* key) const
    {
        std::vector<Obj> out;
        if (!has(key))
            return out;
        const auto& arr = j_.at(key);
        if (!arr.is_array())
            throw InvalidScenario(at(key), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.emplace_back(arr[i], at(key) + "[" + std::to_string(i) + "]");
        return out;
    }

    double num(const char* key, double def) const
    {
        if (!has(key))
            return def;
        const auto& v = j_.at(key);
        if (!v.is_number())
            throw InvalidScenario(at(key), "expected a number");
        return v.get<double>();
    }

    double num(const char* key) const
    {
        if (!has(key))
            throw InvalidScenario(at(key), "required field missing");
        return num(key, 0.0);
    }

    std::int64_t integer(const char* key, std::int64_t def) const
    {
        if (!has(key))
            return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer())
            throw InvalidScenario(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::int64_t integer(const char* key) const
    {
        if (!has(key))
            throw InvalidScenario(at(key), "required field missing");
        return integer(key, 0);
    }

    std::uint64_t unsigned_integer(const char* key, std::uint64_t def) const
    {
        if (!has(key))
            return def;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw InvalidScenario(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const char* key, bool def) const
    {
        if (!has(key))
            return def;
        const auto& v = j_.at(key);
        if (!v.is_boolean())
            throw InvalidScenario(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string str(const char* key, const std::string& def) const
    {
        if (!has(key))
            return def;
        const auto& v = j_.at(key);
        if (!v.is_string())
            throw InvalidScenario(at(key), "expected a string");
        return v.get<std::string>();
    }

    /// An instant given as "time_s" or "day".
    Seconds instant() const
    {
        if (has("time_s") && has("day"))
            throw InvalidScenario(at("time_s"), "give either time_s or day, not both");
        if (has("time_s"))
            return integer("time_s");
        if (has("day"))
            return static_cast<Seconds>(std::llround(num("day") * kSecondsPerDay));
        throw InvalidScenario(at("time_s"), "required field missing (or give day)");
    }

    const std::string& path() const { return path_; }
    const json& value() const { return j_; }

private:
    const json& j_;
    std::string path_;
};

std::vector<TaskConfig> tasks_from(const Obj& parent, const char* key)
{
    std::vector<TaskConfig> tasks;
    if (!parent.has(key))
        return tasks;
    const auto& arr = parent.raw(key);
    if (!arr.is_array())
        throw InvalidScenario(parent.at(key), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        try {
            tasks.push_back(task_from_json(arr[i]));
        } catch (const InvalidTaskConfig& e) {
            throw InvalidScenario(parent.at(key) + "[" + std::to_string(i) + "]", e.what());
        }
    }
    return tasks;
}

std::map<std::string, std::int64_t> params_from(const Obj& parent, const char* key)
{
    std::map<std::string, std::int64_t> out;
    const Obj o = parent.obj(key);
    for (const auto& [k, v] : o.value().items()) {
        if (!v.is_number_integer())
            throw InvalidScenario(o.at(k), "expected an integer");
        out[k] = v.get<std::int64_t>();
    }
    return out;
}

DutySchedule duty_from(const Obj& o)
{
    o.allow({"always_on", "window_start_s", "window_end_s", "slot_period_s", "slot_length_s", "idle_timeout_s"});
    DutySchedule d;
    d.always_on = o.boolean("always_on", !o.has("slot_period_s") && !o.has("window_start_s"));
    d.window_start_s = o.integer("window_start_s", d.window_start_s);
    d.window_end_s = o.integer("window_end_s", d.window_end_s);
    d.slot_period_s = o.integer("slot_period_s", d.slot_period_s);
    d.slot_length_s = o.integer("slot_length_s", d.slot_length_s);
    d.idle_timeout_s = o.integer("idle_timeout_s", d.idle_timeout_s);
    try {
        d.validate();
    } catch (const InvalidScenario&) {
        throw;
    } catch (const Error& e) {
        throw InvalidScenario(o.path(), e.what());
    }
    return d;
}

std::vector<Absence> absences_from(const Obj& parent)
{
    std::vector<Absence> out;
    for (const auto& a : parent.list("absences")) {
        a.allow({"start_day", "days"});
        Absence ab{static_cast<int>(a.integer("start_day")), static_cast<int>(a.integer("days"))};
        if (ab.start_day < 0)
            throw InvalidScenario(a.at("start_day"), "must be nonnegative");
        if (ab.days < 1)
            throw InvalidScenario(a.at("days"), "must be at least 1");
        out.push_back(ab);
    }
    return out;
}

BatterySpec battery_from(const Obj& o)
{
    o.allow({"capacity_mj", "initial_soc", "peak_harvest_mw", "loads"});
    BatterySpec b;
    b.capacity_mj = o.num("capacity_mj", b.capacity_mj);
    b.initial_soc = o.num("initial_soc", b.initial_soc);
    b.peak_harvest_mw = o.num("peak_harvest_mw", b.peak_harvest_mw);
    if (!(b.capacity_mj > 0))
        throw InvalidScenario(o.at("capacity_mj"), "must be positive");
    if (!(b.initial_soc >= 0 && b.initial_soc <= 1))
        throw InvalidScenario(o.at("initial_soc"), "must be in [0, 1]");
    if (!(b.peak_harvest_mw >= 0))
        throw InvalidScenario(o.at("peak_harvest_mw"), "must be nonnegative");
    const Obj loads = o.obj("loads");
    for (const auto& [k, v] : loads.value().items()) {
        try {
            const auto a = activity_from_string(k);
            if (!v.is_number() || v.get<double>() < 0)
                throw InvalidScenario(loads.at(k), "expected a nonnegative number");
            b.loads[a] = v.get<double>();
        } catch (const InvalidScenario&) {
            throw;
        } catch (const Error& e) {
            throw InvalidScenario(loads.at(k), e.what());
        }
    }
    return b;
}

} // namespace

std::vector<TaskConfig> default_tasks()
{
    TaskConfig gps_high;
    gps_high.task_id = 1;
    gps_high.type_id = tdf::types::kGps;
    gps_high.sample_period_s = 300;
    gps_high.entry = {BatteryAtLeast{3900}};
    gps_high.exit = {BatteryBelow{3700}};
    gps_high.gate = {MotionIs{true}};
    gps_high.priority = 2;
    gps_high.activity = Activity::gps_high;
    gps_high.on_time_s = 5.0;

    TaskConfig gps_low = gps_high;
    gps_low.task_id = 2;
    gps_low.sample_period_s = 1800;
    gps_low.entry = {BatteryBelow{3700}};
    gps_low.exit = {BatteryAtLeast{3900}};
    gps_low.priority = 1;
    gps_low.activity = Activity::gps_low;

    auto sensor = [](TaskId id, TypeId type, Seconds period) {
        TaskConfig t;
        t.task_id = id;
        t.type_id = type;
        t.sample_period_s = period;
        t.activity = Activity::sensor_sample;
        t.on_time_s = 0.01;
        return t;
    };
    return {gps_high, gps_low, sensor(3, tdf::types::kBattery, 600), sensor(4, tdf::types::kTemperature, 900),
            sensor(5, tdf::types::kActivity, 300)};
}

Scenario Scenario::from_json(const json& doc)
{
    const Obj root(doc, "");
    root.allow({"schema_version", "name", "seed", "duration_days", "weather", "camps", "gateways", "nodes",
                "mobility", "link", "config_edits", "firmware", "final_collection_days", "outputs", "description"});

    Scenario s;
    s.schema_version = static_cast<int>(root.integer("schema_version"));
    if (s.schema_version != kScenarioSchemaVersion)
        throw InvalidScenario("schema_version", "unsupported version " + std::to_string(s.schema_version) +
                                                    " (expected " + std::to_string(kScenarioSchemaVersion) + ")");
    s.name = root.str("name", s.name);
    s.seed = root.unsigned_integer("seed", s.seed);
    s.duration_days = static_cast<int>(root.integer("duration_days"));
    s.final_collection_days = static_cast<int>(root.integer("final_collection_days", 0));

    const Obj weather = root.obj("weather");
    weather.allow({"sunrise_s", "sunset_s", "cloudy_min", "cloudy_max", "droughts"});
    s.weather.sunrise_s = weather.integer("sunrise_s", s.weather.sunrise_s);
    s.weather.sunset_s = weather.integer("sunset_s", s.weather.sunset_s);
    s.weather.cloudy_min = weather.num("cloudy_min", s.weather.cloudy_min);
    s.weather.cloudy_max = weather.num("cloudy_max", s.weather.cloudy_max);
    for (const auto& d : weather.list("droughts")) {
        d.allow({"start_day", "days", "factor"});
        s.weather.droughts.push_back({static_cast<int>(d.integer("start_day")), static_cast<int>(d.integer("days")),
                                      d.num("factor", 0.05)});
        if (s.weather.droughts.back().days < 1)
            throw InvalidScenario(d.at("days"), "must be at least 1");
        if (s.weather.droughts.back().factor < 0)
            throw InvalidScenario(d.at("factor"), "must be nonnegative");
    }

    for (const auto& c : root.list("camps")) {
        c.allow({"id", "name"});
        s.camps.push_back({static_cast<CampId>(c.unsigned_integer("id", s.camps.size())),
                           c.str("name", "camp" + std::to_string(s.camps.size()))});
    }
    if (s.camps.empty())
        s.camps.push_back({0, "camp0"});

    GatewayId next_gw = 1;
    for (const auto& g : root.list("gateways")) {
        g.allow({"id", "camp", "duty", "offline", "random_offline", "sync_interval_s", "storage_pages"});
        GatewaySpec gs;
        gs.id = static_cast<GatewayId>(g.unsigned_integer("id", next_gw));
        next_gw = gs.id + 1;
        gs.camp = static_cast<CampId>(g.unsigned_integer("camp", 0));
        gs.duty = duty_from(g.obj("duty"));
        for (const auto& w : g.list("offline")) {
            w.allow({"start_day", "days"});
            const double start = w.num("start_day");
            const double days = w.num("days");
            if (start < 0)
                throw InvalidScenario(w.at("start_day"), "must be nonnegative");
            if (!(days > 0))
                throw InvalidScenario(w.at("days"), "must be positive");
            gs.offline.push_back({static_cast<Seconds>(std::llround(start * kSecondsPerDay)),
                                  static_cast<Seconds>(std::llround((start + days) * kSecondsPerDay))});
        }
        const Obj ro = g.obj("random_offline");
        ro.allow({"p_daily", "min_hours", "max_hours"});
        gs.random_offline.p_daily = ro.num("p_daily", 0.0);
        gs.random_offline.min_hours = ro.num("min_hours", gs.random_offline.min_hours);
        gs.random_offline.max_hours = ro.num("max_hours", gs.random_offline.max_hours);
        if (!(gs.random_offline.p_daily >= 0 && gs.random_offline.p_daily <= 1))
            throw InvalidScenario(ro.at("p_daily"), "must be in [0, 1]");
        if (!(gs.random_offline.min_hours > 0 && gs.random_offline.max_hours >= gs.random_offline.min_hours))
            throw InvalidScenario(ro.at("max_hours"), "need 0 < min_hours <= max_hours");
        gs.sync_interval_s = g.integer("sync_interval_s", gs.sync_interval_s);
        if (gs.sync_interval_s <= 0)
            throw InvalidScenario(g.at("sync_interval_s"), "must be positive");
        gs.storage_pages = static_cast<std::uint32_t>(g.unsigned_integer("storage_pages", gs.storage_pages));
        s.gateways.push_back(gs);
    }

    NodeId next_node = 1;
    for (const auto& n : root.list("nodes")) {
        n.allow({"id", "count", "home_camp", "battery", "tasks", "capacity_pages", "page_size", "beacon_period_s",
                 "absences", "telemetry"});
        NodeSpec base;
        const auto first = static_cast<NodeId>(n.unsigned_integer("id", next_node));
        const auto count = n.unsigned_integer("count", 1);
        if (count == 0)
            throw InvalidScenario(n.at("count"), "must be at least 1");
        base.home_camp = static_cast<CampId>(n.unsigned_integer("home_camp", s.camps.front().id));
        base.battery = battery_from(n.obj("battery"));
        base.tasks = n.has("tasks") ? tasks_from(n, "tasks") : default_tasks();
        base.capacity_pages = n.unsigned_integer("capacity_pages", base.capacity_pages);
        base.page_size = n.unsigned_integer("page_size", base.page_size);
        if (base.capacity_pages == 0)
            throw InvalidScenario(n.at("capacity_pages"), "must be positive");
        if (base.page_size < 16 || base.page_size > 4096)
            throw InvalidScenario(n.at("page_size"), "must be in [16, 4096]");
        base.params.beacon_period_s = n.integer("beacon_period_s", base.params.beacon_period_s);
        if (base.params.beacon_period_s <= 0)
            throw InvalidScenario(n.at("beacon_period_s"), "must be positive");
        base.absences = absences_from(n);
        base.telemetry = n.boolean("telemetry", false);
        for (std::uint64_t i = 0; i < count; ++i) {
            NodeSpec ns = base;
            ns.id = first + static_cast<NodeId>(i);
            s.nodes.push_back(ns);
        }
        next_node = first + static_cast<NodeId>(count);
    }

    const Obj mob = root.obj("mobility");
    mob.allow({"mode", "p_return", "p_switch", "p_long", "long_min_days", "long_max_days", "forage_start_s",
               "forage_end_s", "return_spread_s"});
    const auto mode = mob.str("mode", "roost");
    if (mode == "roost")
        s.mobility.mode = MobilityParams::Mode::roost;
    else if (mode == "resident")
        s.mobility.mode = MobilityParams::Mode::resident;
    else
        throw InvalidScenario(mob.at("mode"), "expected 'roost' or 'resident'");
    s.mobility.p_return = mob.num("p_return", s.mobility.p_return);
    s.mobility.p_switch = mob.num("p_switch", s.mobility.p_switch);
    s.mobility.p_long = mob.num("p_long", s.mobility.p_long);
    s.mobility.long_min_days = static_cast<int>(mob.integer("long_min_days", s.mobility.long_min_days));
    s.mobility.long_max_days = static_cast<int>(mob.integer("long_max_days", s.mobility.long_max_days));
    s.mobility.forage_start_s = mob.integer("forage_start_s", s.mobility.forage_start_s);
    s.mobility.forage_end_s = mob.integer("forage_end_s", s.mobility.forage_end_s);
    s.mobility.return_spread_s = mob.integer("return_spread_s", s.mobility.return_spread_s);
    try {
        s.mobility.validate();
    } catch (const Error& e) {
        throw InvalidScenario("mobility", e.what());
    }

    const Obj link = root.obj("link");
    link.allow({"page_rate", "rate_min", "rate_max", "chunk_loss", "attempts"});
    s.link.page_rate = link.num("page_rate", s.link.page_rate);
    s.link.rate_min = link.num("rate_min", s.link.page_rate);
    s.link.rate_max = link.num("rate_max", s.link.page_rate);
    s.link.chunk_loss = link.num("chunk_loss", s.link.chunk_loss);
    s.link.attempts = static_cast<int>(link.integer("attempts", s.link.attempts));
    try {
        s.link.validate();
    } catch (const Error& e) {
        throw InvalidScenario("link", e.what());
    }

    for (const auto& e : root.list("config_edits")) {
        e.allow({"time_s", "day", "node", "tasks", "params"});
        ConfigEdit ce;
        ce.time = e.instant();
        ce.node = static_cast<NodeId>(e.unsigned_integer("node", 0));
        if (!e.has("node"))
            throw InvalidScenario(e.at("node"), "required field missing");
        ce.tasks = tasks_from(e, "tasks");
        ce.params = params_from(e, "params");
        s.config_edits.push_back(std::move(ce));
    }

    for (const auto& f : root.list("firmware")) {
        f.allow({"time_s", "day", "version", "size_bytes", "chunk_size", "nodes"});
        FirmwareRelease fr;
        fr.time = f.instant();
        fr.version = static_cast<std::uint32_t>(f.integer("version"));
        fr.size_bytes = static_cast<std::size_t>(f.integer("size_bytes"));
        fr.chunk_size = static_cast<std::size_t>(f.integer("chunk_size", 64));
        if (fr.version < 2)
            throw InvalidScenario(f.at("version"), "must be at least 2 (nodes ship with version 1)");
        if (fr.size_bytes == 0)
            throw InvalidScenario(f.at("size_bytes"), "must be positive");
        if (fr.chunk_size == 0 || fr.chunk_size > rpc::kChunkSize)
            throw InvalidScenario(f.at("chunk_size"), "must be in [1, " + std::to_string(rpc::kChunkSize) + "]");
        if (!f.has("nodes") || !f.raw("nodes").is_array())
            throw InvalidScenario(f.at("nodes"), "expected an array of node ids");
        for (const auto& id : f.raw("nodes")) {
            if (!id.is_number_unsigned())
                throw InvalidScenario(f.at("nodes"), "expected node ids");
            fr.nodes.push_back(id.get<NodeId>());
        }
        s.firmware.push_back(std::move(fr));
    }

    const Obj out = root.obj("outputs");
    out.allow({"trace_interval_s", "duty_tick_s", "journal_snapshot_every"});
    s.trace_interval_s = out.integer("trace_interval_s", s.trace_interval_s);
    s.duty_tick_s = out.integer("duty_tick_s", s.duty_tick_s);
    s.journal_snapshot_every =
        static_cast<std::size_t>(out.unsigned_integer("journal_snapshot_every", s.journal_snapshot_every));

    s.validate();
    return s;
}

void Scenario::validate() const
{
    if (schema_version != kScenarioSchemaVersion)
        throw InvalidScenario("schema_version", "unsupported version");
    if (duration_days < 1)
        throw InvalidScenario("duration_days", "must be at least 1");
    if (final_collection_days < 0 || final_collection_days > duration_days)
        throw InvalidScenario("final_collection_days", "must be in [0, duration_days]");
    if (trace_interval_s <= 0)
        throw InvalidScenario("outputs.trace_interval_s", "must be positive");
    if (duty_tick_s <= 0)
        throw InvalidScenario("outputs.duty_tick_s", "must be positive");
    if (!(weather.cloudy_min >= 0 && weather.cloudy_max >= weather.cloudy_min))
        throw InvalidScenario("weather.cloudy_max", "need 0 <= cloudy_min <= cloudy_max");
    if (weather.sunrise_s < 0 || weather.sunset_s > kSecondsPerDay || weather.sunrise_s >= weather.sunset_s)
        throw InvalidScenario("weather.sunset_s", "need 0 <= sunrise_s < sunset_s <= 86400");

    std::set<CampId> camp_ids;
    for (std::size_t i = 0; i < camps.size(); ++i)
        if (!camp_ids.insert(camps[i].id).second)
            throw InvalidScenario("camps[" + std::to_string(i) + "].id", "duplicate camp id");

    std::set<GatewayId> gw_ids;
    for (std::size_t i = 0; i < gateways.size(); ++i) {
        const auto path = "gateways[" + std::to_string(i) + "]";
        if (!gw_ids.insert(gateways[i].id).second)
            throw InvalidScenario(path + ".id", "duplicate gateway id");
        if (!camp_ids.contains(gateways[i].camp))
            throw InvalidScenario(path + ".camp", "unknown camp " + std::to_string(gateways[i].camp));
    }

    std::set<NodeId> node_ids;
    for (const auto& n : nodes) {
        if (!node_ids.insert(n.id).second)
            throw InvalidScenario("nodes", "duplicate node id " + std::to_string(n.id));
        if (!camp_ids.contains(n.home_camp))
            throw InvalidScenario("nodes", "node " + std::to_string(n.id) + " has unknown home_camp " +
                                               std::to_string(n.home_camp));
        if (n.page_size != nodes.front().page_size)
            throw InvalidScenario("nodes", "all nodes must share one page_size");
    }
    if (nodes.empty())
        throw InvalidScenario("nodes", "at least one node is required");

    for (std::size_t i = 0; i < config_edits.size(); ++i) {
        const auto path = "config_edits[" + std::to_string(i) + "]";
        if (!node_ids.contains(config_edits[i].node))
            throw InvalidScenario(path + ".node", "unknown node " + std::to_string(config_edits[i].node));
        if (config_edits[i].time < 0 || config_edits[i].time > end_time())
            throw InvalidScenario(path + ".time_s", "outside the scenario duration");
    }
    std::set<std::uint32_t> fw_versions;
    for (std::size_t i = 0; i < firmware.size(); ++i) {
        const auto path = "firmware[" + std::to_string(i) + "]";
        if (!fw_versions.insert(firmware[i].version).second)
            throw InvalidScenario(path + ".version", "duplicate firmware version");
        for (NodeId id : firmware[i].nodes)
            if (!node_ids.contains(id))
                throw InvalidScenario(path + ".nodes", "unknown node " + std::to_string(id));
        if (firmware[i].time < 0 || firmware[i].time > end_time())
            throw InvalidScenario(path + ".time_s", "outside the scenario duration");
    }
    mobility.validate();
    link.validate();
}

Scenario Scenario::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidScenario("<root>", path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

} // namespace roost
