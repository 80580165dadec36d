#include <roost/tdf.hpp>

#include <roost/bytes.hpp>

#include <numeric>

namespace roost::tdf {

using nlohmann::json;

std::size_t width_of(ScalarKind kind)
{
    switch (kind) {
    case ScalarKind::u8:
        return 1;
    case ScalarKind::u16:
    case ScalarKind::i16:
        return 2;
    case ScalarKind::u32:
    case ScalarKind::i32:
        return 4;
    }
    return 0;
}

std::string_view to_string(ScalarKind kind)
{
    switch (kind) {
    case ScalarKind::u8:
        return "u8";
    case ScalarKind::u16:
        return "u16";
    case ScalarKind::u32:
        return "u32";
    case ScalarKind::i16:
        return "i16";
    case ScalarKind::i32:
        return "i32";
    }
    return "?";
}

ScalarKind scalar_kind_from_string(std::string_view name)
{
    if (name == "u8")
        return ScalarKind::u8;
    if (name == "u16")
        return ScalarKind::u16;
    if (name == "u32")
        return ScalarKind::u32;
    if (name == "i16")
        return ScalarKind::i16;
    if (name == "i32")
        return ScalarKind::i32;
    throw InconsistentDescriptor("unknown scalar kind '" + std::string(name) + "'");
}

TypeDescriptor TypeDescriptor::make(TypeId id, std::string name, std::vector<FieldSpec> fields)
{
    TypeDescriptor d;
    d.type_id = id;
    d.name = std::move(name);
    d.fields = std::move(fields);
    d.payload_len = std::accumulate(d.fields.begin(), d.fields.end(), std::size_t{0},
                                    [](std::size_t acc, const FieldSpec& f) { return acc + width_of(f.kind); });
    return d;
}

DuplicateTypeId::DuplicateTypeId(TypeId id)
    : Error("type id " + std::to_string(id) + " already registered with a different descriptor"), type_id(id)
{
}

UnknownTypeId::UnknownTypeId(TypeId id, std::size_t offset)
    : Error("unknown type id " + std::to_string(id) + " at offset " + std::to_string(offset)), type_id(id),
      offset(offset)
{
}

TruncatedRecord::TruncatedRecord(std::size_t offset)
    : Error("truncated record at offset " + std::to_string(offset)), offset(offset)
{
}

void MetadataRegistry::register_type(const TypeDescriptor& desc)
{
    if (desc.type_id == kPaddingTypeId)
        throw InconsistentDescriptor("type id 0xFFFF is reserved for padding");
    std::size_t sum = 0;
    for (const auto& f : desc.fields)
        sum += width_of(f.kind);
    if (sum != desc.payload_len)
        throw InconsistentDescriptor("descriptor " + std::to_string(desc.type_id) + " declares payload_len " +
                                     std::to_string(desc.payload_len) + " but fields sum to " + std::to_string(sum));

    auto [it, inserted] = descriptors_.try_emplace(desc.type_id, desc);
    if (!inserted && !(it->second == desc))
        throw DuplicateTypeId(desc.type_id);
}

const TypeDescriptor* MetadataRegistry::find(TypeId id) const
{
    auto it = descriptors_.find(id);
    return it == descriptors_.end() ? nullptr : &it->second;
}

const TypeDescriptor& MetadataRegistry::at(TypeId id) const
{
    if (const auto* d = find(id))
        return *d;
    throw UnknownTypeId(id, 0);
}

json MetadataRegistry::to_json() const
{
    json types = json::array();
    for (const auto& [id, d] : descriptors_) {
        json fields = json::array();
        for (const auto& f : d.fields)
            fields.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"unit", f.unit}});
        types.push_back({{"id", id}, {"name", d.name}, {"payload_len", d.payload_len}, {"fields", fields}});
    }
    return {{"version", 1}, {"types", types}};
}

MetadataRegistry MetadataRegistry::from_json(const json& doc)
{
    MetadataRegistry reg;
    try {
        for (const auto& t : doc.at("types")) {
            std::vector<FieldSpec> fields;
            for (const auto& f : t.at("fields"))
                fields.push_back({f.at("name").get<std::string>(),
                                  scalar_kind_from_string(f.at("kind").get<std::string>()), f.value("unit", "")});
            auto d = TypeDescriptor::make(t.at("id").get<TypeId>(), t.at("name").get<std::string>(), std::move(fields));
            if (t.contains("payload_len"))
                d.payload_len = t.at("payload_len").get<std::size_t>();
            reg.register_type(d);
        }
    } catch (const json::exception& e) {
        throw InconsistentDescriptor(std::string("malformed registry document: ") + e.what());
    }
    return reg;
}

void encode_record_into(const Record& rec, Bytes& out)
{
    out.reserve(out.size() + kHeaderLen + rec.payload.size());
    ByteWriter w(out);
    w.u16(rec.type_id);
    w.u32(rec.timestamp);
    w.bytes(rec.payload);
}

Bytes encode_record(const Record& rec)
{
    Bytes out;
    encode_record_into(rec, out);
    return out;
}

std::vector<Record> decode_stream(std::span<const std::uint8_t> data, const MetadataRegistry& registry)
{
    std::vector<Record> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        const std::size_t left = data.size() - pos;
        if (data[pos] == 0xFF && (left == 1 || data[pos + 1] == 0xFF))
            break;
        if (left < 2)
            throw TruncatedRecord(pos);
        const auto id = static_cast<TypeId>(data[pos] | (data[pos + 1] << 8));
        const auto* desc = registry.find(id);
        if (desc == nullptr)
            throw UnknownTypeId(id, pos);
        if (left < kHeaderLen + desc->payload_len)
            throw TruncatedRecord(pos);

        ByteReader r(data.subspan(pos, kHeaderLen + desc->payload_len));
        Record rec;
        rec.type_id = r.u16();
        rec.timestamp = r.u32();
        auto payload = r.bytes(desc->payload_len);
        rec.payload.assign(payload.begin(), payload.end());
        out.push_back(std::move(rec));
        pos += kHeaderLen + desc->payload_len;
    }
    return out;
}

std::vector<std::int64_t> decode_fields(const Record& rec, const TypeDescriptor& desc)
{
    if (rec.payload.size() != desc.payload_len)
        throw InconsistentDescriptor("payload length does not match descriptor " + std::to_string(desc.type_id));
    ByteReader r(rec.payload);
    std::vector<std::int64_t> values;
    values.reserve(desc.fields.size());
    for (const auto& f : desc.fields) {
        switch (f.kind) {
        case ScalarKind::u8:
            values.push_back(r.u8());
            break;
        case ScalarKind::u16:
            values.push_back(r.u16());
            break;
        case ScalarKind::u32:
            values.push_back(r.u32());
            break;
        case ScalarKind::i16:
            values.push_back(static_cast<std::int16_t>(r.u16()));
            break;
        case ScalarKind::i32:
            values.push_back(static_cast<std::int32_t>(r.u32()));
            break;
        }
    }
    return values;
}

Bytes pack_fields(const TypeDescriptor& desc, std::span<const std::int64_t> values)
{
    if (values.size() != desc.fields.size())
        throw InconsistentDescriptor("expected " + std::to_string(desc.fields.size()) + " field values for type " +
                                     std::to_string(desc.type_id));
    Bytes out;
    out.reserve(desc.payload_len);
    ByteWriter w(out);
    for (std::size_t i = 0; i < values.size(); ++i) {
        switch (desc.fields[i].kind) {
        case ScalarKind::u8:
            w.u8(static_cast<std::uint8_t>(values[i]));
            break;
        case ScalarKind::u16:
        case ScalarKind::i16:
            w.u16(static_cast<std::uint16_t>(values[i]));
            break;
        case ScalarKind::u32:
        case ScalarKind::i32:
            w.u32(static_cast<std::uint32_t>(values[i]));
            break;
        }
    }
    return out;
}

MetadataRegistry builtin_registry()
{
    MetadataRegistry reg;
    reg.register_type(TypeDescriptor::make(types::kBattery, "battery_mv", {{"voltage", ScalarKind::u16, "mV"}}));
    reg.register_type(TypeDescriptor::make(
        types::kGps, "gps", {{"lat", ScalarKind::i32, "udeg"}, {"lon", ScalarKind::i32, "udeg"}}));
    reg.register_type(
        TypeDescriptor::make(types::kTemperature, "temperature", {{"temp", ScalarKind::i16, "cdegC"}}));
    reg.register_type(TypeDescriptor::make(types::kActivity, "activity",
                                           {{"moving", ScalarKind::u8, ""}, {"count", ScalarKind::u16, ""}}));
    return reg;
}

} // namespace roost::tdf
