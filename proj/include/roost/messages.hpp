#pragma once

// Gateway <-> cloud documents. Field names are part of the wire contract:
//
//   beacon_relay{node_id,max_page,battery_mv,config_version,fw_version,gateway_id,time}
//   page_report{node_id,page_no,gateway_id,time}
//   page_expired{node_id,page_no,gateway_id,time}
//   page_ingest{node_id,page_no,data_b64,gateway_id,time}
//   health{gateway_id,uptime_s,battery_mv,temp_c,free_pages,time}
//   config{node_id,version,tasks[],params{}}
//
// Every document also carries "type" naming its kind. max_page is null
// when the node has no finalized page; health fields other than gateway_id
// and time may be absent.

#include <roost/common.hpp>
#include <roost/task.hpp>

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace roost::msg {

struct BeaconRelay {
    NodeId node_id = 0;
    std::optional<PageNo> max_page;
    std::uint16_t battery_mv = 0;
    std::uint32_t config_version = 0;
    std::uint32_t fw_version = 0;
    GatewayId gateway_id = 0;
    Seconds time = 0;
    bool operator==(const BeaconRelay&) const = default;
};

struct PageReport {
    NodeId node_id = 0;
    PageNo page_no = 0;
    GatewayId gateway_id = 0;
    Seconds time = 0;
    bool operator==(const PageReport&) const = default;
};

/// Loss report: the node no longer retains the page.
struct PageExpiredReport {
    NodeId node_id = 0;
    PageNo page_no = 0;
    GatewayId gateway_id = 0;
    Seconds time = 0;
    bool operator==(const PageExpiredReport&) const = default;
};

struct PageIngest {
    NodeId node_id = 0;
    PageNo page_no = 0;
    Bytes data;
    GatewayId gateway_id = 0;
    Seconds time = 0;
    bool operator==(const PageIngest&) const = default;
};

struct Health {
    GatewayId gateway_id = 0;
    std::optional<std::int64_t> uptime_s;
    std::optional<std::uint16_t> battery_mv;
    std::optional<double> temp_c;
    std::optional<std::uint32_t> free_pages;
    Seconds time = 0;
    bool operator==(const Health&) const = default;
};

struct Config {
    NodeId node_id = 0;
    std::uint32_t version = 0;
    std::vector<TaskConfig> tasks;
    std::map<std::string, std::int64_t> params;
    bool operator==(const Config&) const = default;
};

/// Gateway notice that a node now runs the given configuration.
struct ConfigApplied {
    Config config;
    GatewayId gateway_id = 0;
    Seconds time = 0;
    bool operator==(const ConfigApplied&) const = default;
};

using Message = std::variant<BeaconRelay, PageReport, PageExpiredReport, PageIngest, Health, Config, ConfigApplied>;

class BadMessage : public Error {
public:
    using Error::Error;
};

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

nlohmann::json to_json(const Message& m);
Message from_json(const nlohmann::json& doc);

std::string_view type_name(const Message& m);

} // namespace roost::msg
