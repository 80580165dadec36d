#pragma once

// Gateway -> node remote procedure calls. A request is one radio packet
// carrying a command id and its arguments; the node answers each request
// with exactly one response packet.
//
// Request packet:   u8 command | arguments...
// Response packet:  u8 command | u8 status | payload...
// All integers little-endian.

#include <roost/common.hpp>
#include <roost/task.hpp>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roost::rpc {

/// Radio payload budget for one page chunk.
constexpr std::size_t kChunkSize = 64;

enum class CommandId : std::uint8_t {
    get_status = 1,
    read_page_chunk = 2,
    get_task_configs = 3,
    put_task_config = 4,
    delete_task_config = 5,
    set_param = 6,
    put_fw_chunk = 7,
    apply_fw = 8,
    hold_radio = 9,
};

struct GetStatus {
    bool operator==(const GetStatus&) const = default;
};
struct ReadPageChunk {
    PageNo page_no = 0;
    std::uint8_t chunk_index = 0;
    bool operator==(const ReadPageChunk&) const = default;
};
struct GetTaskConfigs {
    bool operator==(const GetTaskConfigs&) const = default;
};
struct PutTaskConfig {
    TaskConfig task;
    bool operator==(const PutTaskConfig&) const = default;
};
struct DeleteTaskConfig {
    TaskId task_id = 0;
    bool operator==(const DeleteTaskConfig&) const = default;
};
struct SetParam {
    std::string key;
    std::int64_t value = 0;
    bool operator==(const SetParam&) const = default;
};
struct PutFwChunk {
    std::uint32_t version = 0;
    std::uint16_t index = 0;
    Bytes data;
    bool operator==(const PutFwChunk&) const = default;
};
struct ApplyFw {
    std::uint32_t version = 0;
    std::uint16_t chunk_count = 0;
    std::uint32_t checksum = 0;
    bool operator==(const ApplyFw&) const = default;
};
struct HoldRadio {
    std::uint16_t seconds = 0;
    bool operator==(const HoldRadio&) const = default;
};

using Command = std::variant<GetStatus, ReadPageChunk, GetTaskConfigs, PutTaskConfig, DeleteTaskConfig, SetParam,
                             PutFwChunk, ApplyFw, HoldRadio>;

CommandId command_id(const Command& cmd);

enum class Status : std::uint8_t {
    ok = 0,
    page_expired = 1,
    page_not_ready = 2,
    bad_chunk_index = 3,
    fw_checksum_mismatch = 4,
    unknown_command = 5,
    bad_request = 6,
    unknown_task = 7,
};

std::string_view to_string(Status s);

struct NodeStatus {
    NodeId node_id = 0;
    std::uint32_t clock = 0;
    std::uint16_t battery_mv = 0;
    std::uint32_t config_version = 0;
    std::uint32_t fw_version = 0;
    PageNo head_page_no = 0;
    PageNo next_page_no = 0;
    std::uint16_t running_tasks = 0;
    bool operator==(const NodeStatus&) const = default;
};

/// Page the node still retains; sent with page_expired so the caller can
/// skip everything below it.
struct RetentionHead {
    PageNo head_page_no = 0;
    bool operator==(const RetentionHead&) const = default;
};

/// New config_version after a task edit.
struct ConfigVersion {
    std::uint32_t version = 0;
    bool operator==(const ConfigVersion&) const = default;
};

using Payload =
    std::variant<std::monostate, NodeStatus, Bytes, std::vector<TaskConfig>, RetentionHead, ConfigVersion>;

struct Response {
    std::uint8_t command = 0;
    Status status = Status::ok;
    Payload payload;

    bool ok() const { return status == Status::ok; }
    bool operator==(const Response&) const = default;
};

class BadPacket : public Error {
public:
    using Error::Error;
};

/// Raised by decode_command for a well-framed packet whose id is not known.
class UnknownCommand : public BadPacket {
public:
    explicit UnknownCommand(std::uint8_t id);
    std::uint8_t id;
};

Bytes encode(const Command& cmd);
Command decode_command(std::span<const std::uint8_t> packet);

Bytes encode(const Response& resp);
Response decode_response(std::span<const std::uint8_t> packet);

} // namespace roost::rpc
