#include <roost/task.hpp>

#include <zlib.h>

namespace roost {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

enum class CondTag : std::uint8_t { time_window = 1, battery_at_least, battery_below, motion, samples_at_least };

void encode_condition(ByteWriter& w, const Condition& c)
{
    std::visit(overloaded{
                   [&](const TimeWindow& x) {
                       w.u8(static_cast<std::uint8_t>(CondTag::time_window));
                       w.u32(static_cast<std::uint32_t>(x.start_s));
                       w.u32(static_cast<std::uint32_t>(x.end_s));
                   },
                   [&](const BatteryAtLeast& x) {
                       w.u8(static_cast<std::uint8_t>(CondTag::battery_at_least));
                       w.u16(x.mv);
                   },
                   [&](const BatteryBelow& x) {
                       w.u8(static_cast<std::uint8_t>(CondTag::battery_below));
                       w.u16(x.mv);
                   },
                   [&](const MotionIs& x) {
                       w.u8(static_cast<std::uint8_t>(CondTag::motion));
                       w.u8(x.moving ? 1 : 0);
                   },
                   [&](const SamplesAtLeast& x) {
                       w.u8(static_cast<std::uint8_t>(CondTag::samples_at_least));
                       w.u32(x.count);
                   },
               },
               c);
}

Condition decode_condition(ByteReader& r)
{
    const auto tag = static_cast<CondTag>(r.u8());
    switch (tag) {
    case CondTag::time_window: {
        Seconds start = r.u32();
        Seconds end = r.u32();
        return TimeWindow{start, end};
    }
    case CondTag::battery_at_least:
        return BatteryAtLeast{r.u16()};
    case CondTag::battery_below:
        return BatteryBelow{r.u16()};
    case CondTag::motion:
        return MotionIs{r.u8() != 0};
    case CondTag::samples_at_least:
        return SamplesAtLeast{r.u32()};
    }
    throw InvalidTaskConfig("unknown condition tag " + std::to_string(static_cast<int>(tag)));
}

void encode_conditions(ByteWriter& w, const std::vector<Condition>& conds)
{
    w.u8(static_cast<std::uint8_t>(conds.size()));
    for (const auto& c : conds)
        encode_condition(w, c);
}

std::vector<Condition> decode_conditions(ByteReader& r)
{
    std::vector<Condition> out(r.u8());
    for (auto& c : out)
        c = decode_condition(r);
    return out;
}

json condition_to_json(const Condition& c)
{
    return std::visit(overloaded{
                          [](const TimeWindow& x) { return json{{"time_of_day", {x.start_s, x.end_s}}}; },
                          [](const BatteryAtLeast& x) { return json{{"battery_mv_at_least", x.mv}}; },
                          [](const BatteryBelow& x) { return json{{"battery_mv_below", x.mv}}; },
                          [](const MotionIs& x) { return json{{"motion", x.moving}}; },
                          [](const SamplesAtLeast& x) { return json{{"samples_at_least", x.count}}; },
                      },
                      c);
}

Condition condition_from_json(const json& j)
{
    if (!j.is_object() || j.size() != 1)
        throw InvalidTaskConfig("condition must be a single-key object: " + j.dump());
    const auto it = j.begin();
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "time_of_day")
        return TimeWindow{v.at(0).get<Seconds>(), v.at(1).get<Seconds>()};
    if (key == "battery_mv_at_least")
        return BatteryAtLeast{v.get<std::uint16_t>()};
    if (key == "battery_mv_below")
        return BatteryBelow{v.get<std::uint16_t>()};
    if (key == "motion")
        return MotionIs{v.get<bool>()};
    if (key == "samples_at_least")
        return SamplesAtLeast{v.get<std::uint32_t>()};
    throw InvalidTaskConfig("unknown condition '" + key + "'");
}

std::vector<Condition> conditions_from_json(const json& doc, const char* key)
{
    std::vector<Condition> out;
    if (doc.contains(key))
        for (const auto& c : doc.at(key))
            out.push_back(condition_from_json(c));
    return out;
}

json conditions_to_json(const std::vector<Condition>& conds)
{
    json arr = json::array();
    for (const auto& c : conds)
        arr.push_back(condition_to_json(c));
    return arr;
}

} // namespace

bool holds(const Condition& c, const ConditionContext& ctx)
{
    return std::visit(overloaded{
                          [&](const TimeWindow& w) {
                              const Seconds tod = time_of_day(ctx.time);
                              if (w.start_s <= w.end_s)
                                  return tod >= w.start_s && tod < w.end_s;
                              return tod >= w.start_s || tod < w.end_s;
                          },
                          [&](const BatteryAtLeast& b) { return ctx.battery_mv >= b.mv; },
                          [&](const BatteryBelow& b) { return ctx.battery_mv < b.mv; },
                          [&](const MotionIs& m) { return ctx.motion == m.moving; },
                          [&](const SamplesAtLeast& s) { return ctx.samples_taken >= s.count; },
                      },
                      c);
}

bool all_hold(std::span<const Condition> conds, const ConditionContext& ctx)
{
    for (const auto& c : conds)
        if (!holds(c, ctx))
            return false;
    return true;
}

bool any_holds(std::span<const Condition> conds, const ConditionContext& ctx)
{
    for (const auto& c : conds)
        if (holds(c, ctx))
            return true;
    return false;
}

void validate(const TaskConfig& task)
{
    if (task.sample_period_s <= 0)
        throw InvalidTaskConfig("task " + std::to_string(task.task_id) + ": sample period must be positive");
    if (task.on_time_s < 0)
        throw InvalidTaskConfig("task " + std::to_string(task.task_id) + ": negative on_time_s");
    for (const auto* list : {&task.entry, &task.exit, &task.gate}) {
        if (list->size() > 255)
            throw InvalidTaskConfig("task " + std::to_string(task.task_id) + ": too many conditions");
        for (const auto& c : *list)
            if (const auto* w = std::get_if<TimeWindow>(&c))
                if (w->start_s < 0 || w->start_s > kSecondsPerDay || w->end_s < 0 || w->end_s > kSecondsPerDay)
                    throw InvalidTaskConfig("task " + std::to_string(task.task_id) +
                                            ": time window outside 0..86400");
    }
}

Bytes encode_task(const TaskConfig& task)
{
    Bytes out;
    ByteWriter w(out);
    w.u16(task.task_id);
    w.u16(task.type_id);
    w.u32(static_cast<std::uint32_t>(task.sample_period_s));
    w.u8(task.priority);
    w.u8(static_cast<std::uint8_t>(task.activity));
    // on-time in milliseconds keeps the encoding integral
    w.u32(static_cast<std::uint32_t>(task.on_time_s * 1000.0 + 0.5));
    encode_conditions(w, task.entry);
    encode_conditions(w, task.exit);
    encode_conditions(w, task.gate);
    return out;
}

TaskConfig decode_task(ByteReader& r)
{
    TaskConfig t;
    t.task_id = r.u16();
    t.type_id = r.u16();
    t.sample_period_s = r.u32();
    t.priority = r.u8();
    const auto activity = r.u8();
    if (activity >= kActivityCount)
        throw InvalidTaskConfig("activity code out of range");
    t.activity = static_cast<Activity>(activity);
    t.on_time_s = r.u32() / 1000.0;
    t.entry = decode_conditions(r);
    t.exit = decode_conditions(r);
    t.gate = decode_conditions(r);
    return t;
}

std::uint32_t content_hash(const TaskConfig& task)
{
    const Bytes enc = encode_task(task);
    return static_cast<std::uint32_t>(crc32(0L, enc.data(), static_cast<uInt>(enc.size())));
}

json to_json(const TaskConfig& task)
{
    return {{"task_id", task.task_id},
            {"type_id", task.type_id},
            {"period_s", task.sample_period_s},
            {"priority", task.priority},
            {"activity", to_string(task.activity)},
            {"on_time_s", task.on_time_s},
            {"entry", conditions_to_json(task.entry)},
            {"exit", conditions_to_json(task.exit)},
            {"gate", conditions_to_json(task.gate)}};
}

TaskConfig task_from_json(const json& doc)
{
    try {
        TaskConfig t;
        t.task_id = doc.at("task_id").get<TaskId>();
        t.type_id = doc.at("type_id").get<TypeId>();
        t.sample_period_s = doc.value("period_s", Seconds{60});
        t.priority = doc.value("priority", std::uint8_t{0});
        t.activity = activity_from_string(doc.value("activity", std::string("sensor_sample")));
        t.on_time_s = doc.value("on_time_s", 1.0);
        t.entry = conditions_from_json(doc, "entry");
        t.exit = conditions_from_json(doc, "exit");
        t.gate = conditions_from_json(doc, "gate");
        validate(t);
        return t;
    } catch (const json::exception& e) {
        throw InvalidTaskConfig(std::string("malformed task config: ") + e.what());
    } catch (const InvalidTaskConfig&) {
        throw;
    } catch (const Error& e) {
        throw InvalidTaskConfig(e.what());
    }
}

std::vector<Transition> evaluate_tasks(const std::map<TaskId, TaskConfig>& tasks,
                                       const std::map<TaskId, RunningTask>& running, Seconds now,
                                       std::uint16_t battery_mv, bool motion)
{
    std::vector<Transition> stops;
    std::vector<Transition> starts;
    for (const auto& [id, task] : tasks) {
        auto r = running.find(id);
        ConditionContext ctx{now, battery_mv, motion, r == running.end() ? 0u : r->second.samples_taken};
        if (r != running.end()) {
            if (any_holds(task.exit, ctx))
                stops.push_back({Transition::Kind::stop, id});
        } else if (all_hold(task.entry, ctx)) {
            starts.push_back({Transition::Kind::start, id});
        }
    }
    stops.insert(stops.end(), starts.begin(), starts.end());
    return stops;
}

} // namespace roost
