#include <roost/rpc.hpp>

#include <roost/bytes.hpp>

namespace roost::rpc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

enum class PayloadTag : std::uint8_t { none = 0, status = 1, bytes = 2, tasks = 3, head = 4, version = 5 };

} // namespace

UnknownCommand::UnknownCommand(std::uint8_t id)
    : BadPacket("unknown command id " + std::to_string(id)), id(id)
{
}

CommandId command_id(const Command& cmd)
{
    return static_cast<CommandId>(cmd.index() + 1);
}

std::string_view to_string(Status s)
{
    switch (s) {
    case Status::ok:
        return "ok";
    case Status::page_expired:
        return "PageExpired";
    case Status::page_not_ready:
        return "PageNotReady";
    case Status::bad_chunk_index:
        return "BadChunkIndex";
    case Status::fw_checksum_mismatch:
        return "FwChecksumMismatch";
    case Status::unknown_command:
        return "UnknownCommand";
    case Status::bad_request:
        return "BadRequest";
    case Status::unknown_task:
        return "UnknownTask";
    }
    return "?";
}

Bytes encode(const Command& cmd)
{
    Bytes out;
    ByteWriter w(out);
    w.u8(static_cast<std::uint8_t>(command_id(cmd)));
    std::visit(overloaded{
                   [](const GetStatus&) {},
                   [&](const ReadPageChunk& c) {
                       w.u32(c.page_no);
                       w.u8(c.chunk_index);
                   },
                   [](const GetTaskConfigs&) {},
                   [&](const PutTaskConfig& c) { w.bytes(encode_task(c.task)); },
                   [&](const DeleteTaskConfig& c) { w.u16(c.task_id); },
                   [&](const SetParam& c) {
                       w.str8(c.key);
                       w.i64(c.value);
                   },
                   [&](const PutFwChunk& c) {
                       w.u32(c.version);
                       w.u16(c.index);
                       w.u8(static_cast<std::uint8_t>(c.data.size()));
                       w.bytes(c.data);
                   },
                   [&](const ApplyFw& c) {
                       w.u32(c.version);
                       w.u16(c.chunk_count);
                       w.u32(c.checksum);
                   },
                   [&](const HoldRadio& c) { w.u16(c.seconds); },
               },
               cmd);
    return out;
}

Command decode_command(std::span<const std::uint8_t> packet)
{
    if (packet.empty())
        throw BadPacket("empty request packet");
    ByteReader r(packet);
    const std::uint8_t id = r.u8();
    try {
        Command cmd;
        switch (static_cast<CommandId>(id)) {
        case CommandId::get_status:
            cmd = GetStatus{};
            break;
        case CommandId::read_page_chunk: {
            ReadPageChunk c;
            c.page_no = r.u32();
            c.chunk_index = r.u8();
            cmd = c;
            break;
        }
        case CommandId::get_task_configs:
            cmd = GetTaskConfigs{};
            break;
        case CommandId::put_task_config:
            cmd = PutTaskConfig{decode_task(r)};
            break;
        case CommandId::delete_task_config:
            cmd = DeleteTaskConfig{r.u16()};
            break;
        case CommandId::set_param: {
            SetParam c;
            c.key = r.str8();
            c.value = r.i64();
            cmd = c;
            break;
        }
        case CommandId::put_fw_chunk: {
            PutFwChunk c;
            c.version = r.u32();
            c.index = r.u16();
            auto data = r.bytes(r.u8());
            c.data.assign(data.begin(), data.end());
            cmd = c;
            break;
        }
        case CommandId::apply_fw: {
            ApplyFw c;
            c.version = r.u32();
            c.chunk_count = r.u16();
            c.checksum = r.u32();
            cmd = c;
            break;
        }
        case CommandId::hold_radio:
            cmd = HoldRadio{r.u16()};
            break;
        default:
            throw UnknownCommand(id);
        }
        if (!r.done())
            throw BadPacket("trailing bytes in request for command " + std::to_string(id));
        return cmd;
    } catch (const ShortRead& e) {
        throw BadPacket("request for command " + std::to_string(id) + " truncated at offset " +
                        std::to_string(e.offset));
    } catch (const InvalidTaskConfig& e) {
        throw BadPacket(e.what());
    }
}

Bytes encode(const Response& resp)
{
    Bytes out;
    ByteWriter w(out);
    w.u8(resp.command);
    w.u8(static_cast<std::uint8_t>(resp.status));
    std::visit(overloaded{
                   [&](const std::monostate&) { w.u8(static_cast<std::uint8_t>(PayloadTag::none)); },
                   [&](const NodeStatus& s) {
                       w.u8(static_cast<std::uint8_t>(PayloadTag::status));
                       w.u32(s.node_id);
                       w.u32(s.clock);
                       w.u16(s.battery_mv);
                       w.u32(s.config_version);
                       w.u32(s.fw_version);
                       w.u32(s.head_page_no);
                       w.u32(s.next_page_no);
                       w.u16(s.running_tasks);
                   },
                   [&](const Bytes& b) {
                       w.u8(static_cast<std::uint8_t>(PayloadTag::bytes));
                       w.u8(static_cast<std::uint8_t>(b.size()));
                       w.bytes(b);
                   },
                   [&](const std::vector<TaskConfig>& tasks) {
                       w.u8(static_cast<std::uint8_t>(PayloadTag::tasks));
                       w.u8(static_cast<std::uint8_t>(tasks.size()));
                       for (const auto& t : tasks)
                           w.bytes(encode_task(t));
                   },
                   [&](const RetentionHead& h) {
                       w.u8(static_cast<std::uint8_t>(PayloadTag::head));
                       w.u32(h.head_page_no);
                   },
                   [&](const ConfigVersion& v) {
                       w.u8(static_cast<std::uint8_t>(PayloadTag::version));
                       w.u32(v.version);
                   },
               },
               resp.payload);
    return out;
}

Response decode_response(std::span<const std::uint8_t> packet)
{
    ByteReader r(packet);
    try {
        Response resp;
        resp.command = r.u8();
        resp.status = static_cast<Status>(r.u8());
        switch (static_cast<PayloadTag>(r.u8())) {
        case PayloadTag::none:
            break;
        case PayloadTag::status: {
            NodeStatus s;
            s.node_id = r.u32();
            s.clock = r.u32();
            s.battery_mv = r.u16();
            s.config_version = r.u32();
            s.fw_version = r.u32();
            s.head_page_no = r.u32();
            s.next_page_no = r.u32();
            s.running_tasks = r.u16();
            resp.payload = s;
            break;
        }
        case PayloadTag::bytes: {
            auto b = r.bytes(r.u8());
            resp.payload = Bytes(b.begin(), b.end());
            break;
        }
        case PayloadTag::tasks: {
            std::vector<TaskConfig> tasks(r.u8());
            for (auto& t : tasks)
                t = decode_task(r);
            resp.payload = std::move(tasks);
            break;
        }
        case PayloadTag::head:
            resp.payload = RetentionHead{r.u32()};
            break;
        case PayloadTag::version:
            resp.payload = ConfigVersion{r.u32()};
            break;
        default:
            throw BadPacket("unknown response payload tag");
        }
        if (!r.done())
            throw BadPacket("trailing bytes in response");
        return resp;
    } catch (const ShortRead& e) {
        throw BadPacket("response truncated at offset " + std::to_string(e.offset));
    }
}

} // namespace roost::rpc
