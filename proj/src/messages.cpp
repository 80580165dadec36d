#include <roost/messages.hpp>

#include <sodium.h>

namespace roost::msg {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v)
{
    if (v)
        j[key] = *v;
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<T>();
}

json config_body(const Config& c)
{
    json tasks = json::array();
    for (const auto& t : c.tasks)
        tasks.push_back(roost::to_json(t));
    json params = json::object();
    for (const auto& [k, v] : c.params)
        params[k] = v;
    return {{"node_id", c.node_id}, {"version", c.version}, {"tasks", tasks}, {"params", params}};
}

Config config_from(const json& j)
{
    Config c;
    c.node_id = j.at("node_id").get<NodeId>();
    c.version = j.at("version").get<std::uint32_t>();
    for (const auto& t : j.at("tasks"))
        c.tasks.push_back(task_from_json(t));
    for (const auto& [k, v] : j.at("params").items())
        c.params[k] = v.get<std::int64_t>();
    return c;
}

} // namespace

std::string base64_encode(std::span<const std::uint8_t> data)
{
    const std::size_t cap = sodium_base64_ENCODED_LEN(data.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(cap, '\0');
    sodium_bin2base64(out.data(), cap, data.data(), data.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(cap - 1);
    return out;
}

Bytes base64_decode(std::string_view text)
{
    Bytes out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                          sodium_base64_VARIANT_ORIGINAL) != 0)
        throw BadMessage("invalid base64 payload");
    out.resize(len);
    return out;
}

std::string_view type_name(const Message& m)
{
    static constexpr std::string_view names[] = {"beacon_relay", "page_report",  "page_expired", "page_ingest",
                                                 "health",       "config",       "config_applied"};
    return names[m.index()];
}

json to_json(const Message& m)
{
    json j = std::visit(
        overloaded{
            [](const BeaconRelay& b) {
                return json{{"node_id", b.node_id},
                            {"max_page", b.max_page ? json(*b.max_page) : json(nullptr)},
                            {"battery_mv", b.battery_mv},
                            {"config_version", b.config_version},
                            {"fw_version", b.fw_version},
                            {"gateway_id", b.gateway_id},
                            {"time", b.time}};
            },
            [](const PageReport& r) {
                return json{
                    {"node_id", r.node_id}, {"page_no", r.page_no}, {"gateway_id", r.gateway_id}, {"time", r.time}};
            },
            [](const PageExpiredReport& r) {
                return json{
                    {"node_id", r.node_id}, {"page_no", r.page_no}, {"gateway_id", r.gateway_id}, {"time", r.time}};
            },
            [](const PageIngest& p) {
                return json{{"node_id", p.node_id},
                            {"page_no", p.page_no},
                            {"data_b64", base64_encode(p.data)},
                            {"gateway_id", p.gateway_id},
                            {"time", p.time}};
            },
            [](const Health& h) {
                json j{{"gateway_id", h.gateway_id}, {"time", h.time}};
                put_optional(j, "uptime_s", h.uptime_s);
                put_optional(j, "battery_mv", h.battery_mv);
                put_optional(j, "temp_c", h.temp_c);
                put_optional(j, "free_pages", h.free_pages);
                return j;
            },
            [](const Config& c) { return config_body(c); },
            [](const ConfigApplied& c) {
                json j = config_body(c.config);
                j["gateway_id"] = c.gateway_id;
                j["time"] = c.time;
                return j;
            },
        },
        m);
    j["type"] = type_name(m);
    return j;
}

Message from_json(const json& doc)
{
    try {
        const auto type = doc.at("type").get<std::string>();
        if (type == "beacon_relay")
            return BeaconRelay{doc.at("node_id").get<NodeId>(),
                               get_optional<PageNo>(doc, "max_page"),
                               doc.at("battery_mv").get<std::uint16_t>(),
                               doc.at("config_version").get<std::uint32_t>(),
                               doc.at("fw_version").get<std::uint32_t>(),
                               doc.at("gateway_id").get<GatewayId>(),
                               doc.at("time").get<Seconds>()};
        if (type == "page_report")
            return PageReport{doc.at("node_id").get<NodeId>(), doc.at("page_no").get<PageNo>(),
                              doc.at("gateway_id").get<GatewayId>(), doc.at("time").get<Seconds>()};
        if (type == "page_expired")
            return PageExpiredReport{doc.at("node_id").get<NodeId>(), doc.at("page_no").get<PageNo>(),
                                     doc.at("gateway_id").get<GatewayId>(), doc.at("time").get<Seconds>()};
        if (type == "page_ingest")
            return PageIngest{doc.at("node_id").get<NodeId>(), doc.at("page_no").get<PageNo>(),
                              base64_decode(doc.at("data_b64").get<std::string>()),
                              doc.at("gateway_id").get<GatewayId>(), doc.at("time").get<Seconds>()};
        if (type == "health")
            return Health{doc.at("gateway_id").get<GatewayId>(),
                          get_optional<std::int64_t>(doc, "uptime_s"),
                          get_optional<std::uint16_t>(doc, "battery_mv"),
                          get_optional<double>(doc, "temp_c"),
                          get_optional<std::uint32_t>(doc, "free_pages"),
                          doc.at("time").get<Seconds>()};
        if (type == "config")
            return config_from(doc);
        if (type == "config_applied")
            return ConfigApplied{config_from(doc), doc.at("gateway_id").get<GatewayId>(),
                                 doc.at("time").get<Seconds>()};
        throw BadMessage("unknown message type '" + type + "'");
    } catch (const json::exception& e) {
        throw BadMessage(std::string("malformed message: ") + e.what());
    } catch (const InvalidTaskConfig& e) {
        throw BadMessage(std::string("malformed task in message: ") + e.what());
    }
}

} // namespace roost::msg
