#pragma once

// Tagged data format: sensor samples as (type id, timestamp, fixed payload),
// interpreted through a metadata registry kept apart from the data.
//
// Wire layout of one record:
//
//   offset 0  u16 LE  type_id
//   offset 2  u32 LE  timestamp (seconds)
//   offset 6  payload_len bytes, verbatim
//
// Type id 0xFFFF is reserved; two 0xFF bytes where a type id would start
// mark erased flash / page padding and end the stream.

#include <roost/common.hpp>

#include <json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roost::tdf {

constexpr std::size_t kHeaderLen = 6;
constexpr TypeId kPaddingTypeId = 0xFFFF;

enum class ScalarKind : std::uint8_t { u8, u16, u32, i16, i32 };

std::size_t width_of(ScalarKind kind);
std::string_view to_string(ScalarKind kind);
ScalarKind scalar_kind_from_string(std::string_view name);

struct FieldSpec {
    std::string name;
    ScalarKind kind = ScalarKind::u8;
    std::string unit;

    bool operator==(const FieldSpec&) const = default;
};

struct TypeDescriptor {
    TypeId type_id = 0;
    std::string name;
    std::size_t payload_len = 0;
    std::vector<FieldSpec> fields;

    /// Builds a descriptor whose payload_len is the sum of the field widths.
    static TypeDescriptor make(TypeId id, std::string name, std::vector<FieldSpec> fields);

    bool operator==(const TypeDescriptor&) const = default;
};

struct Record {
    TypeId type_id = 0;
    std::uint32_t timestamp = 0;
    Bytes payload;

    bool operator==(const Record&) const = default;
};

class DuplicateTypeId : public Error {
public:
    explicit DuplicateTypeId(TypeId id);
    TypeId type_id;
};

class InconsistentDescriptor : public Error {
public:
    using Error::Error;
};

class UnknownTypeId : public Error {
public:
    UnknownTypeId(TypeId id, std::size_t offset);
    TypeId type_id;
    std::size_t offset;
};

class TruncatedRecord : public Error {
public:
    explicit TruncatedRecord(std::size_t offset);
    std::size_t offset;
};

/// Insert-only map of type descriptors.
class MetadataRegistry {
public:
    /// Idempotent for an identical descriptor; throws DuplicateTypeId when the
    /// id is taken by a different one, InconsistentDescriptor when the
    /// descriptor is malformed or uses the reserved padding id.
    void register_type(const TypeDescriptor& desc);

    const TypeDescriptor* find(TypeId id) const;
    const TypeDescriptor& at(TypeId id) const;
    std::size_t size() const { return descriptors_.size(); }
    const std::map<TypeId, TypeDescriptor>& descriptors() const { return descriptors_; }

    nlohmann::json to_json() const;
    static MetadataRegistry from_json(const nlohmann::json& doc);

private:
    std::map<TypeId, TypeDescriptor> descriptors_;
};

Bytes encode_record(const Record& rec);
void encode_record_into(const Record& rec, Bytes& out);

/// Parses records until the data ends or padding starts.
std::vector<Record> decode_stream(std::span<const std::uint8_t> data, const MetadataRegistry& registry);

/// Field values of a record in field_spec order, widened to int64.
std::vector<std::int64_t> decode_fields(const Record& rec, const TypeDescriptor& desc);

/// Packs field values (already in range for their kinds) into a payload.
Bytes pack_fields(const TypeDescriptor& desc, std::span<const std::int64_t> values);

/// Registry with the sensor types the node model samples.
MetadataRegistry builtin_registry();

namespace types {
constexpr TypeId kBattery = 1;
constexpr TypeId kGps = 2;
constexpr TypeId kTemperature = 3;
constexpr TypeId kActivity = 4;
} // namespace types

} // namespace roost::tdf
