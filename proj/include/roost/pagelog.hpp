#pragma once

// Append-only log of fixed-size pages with monotone page numbers.
//
// Records never span a page boundary: when a record does not fit the open
// page, the page is padded with 0xFF, finalized, and the record opens the
// next one. Finalized pages are immutable. Once more than capacity pages
// are retained the oldest is evicted.

#include <roost/common.hpp>

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>

namespace roost {

constexpr std::size_t kDefaultPageSize = 256;
constexpr std::size_t kDefaultCapacityPages = 8192;

struct Page {
    PageNo page_no = 0;
    Bytes data;

    bool operator==(const Page&) const = default;
};

class RecordTooLarge : public Error {
public:
    RecordTooLarge(std::size_t len, std::size_t page_size);
};

class PageExpired : public Error {
public:
    explicit PageExpired(PageNo page_no);
    PageNo page_no;
};

class PageNotReady : public Error {
public:
    explicit PageNotReady(PageNo page_no);
    PageNo page_no;
};

class BadLogFile : public Error {
public:
    using Error::Error;
};

struct AppendResult {
    /// Page the record was written into (still open after the call).
    PageNo page_no = 0;
    std::optional<PageNo> finalized;
    std::optional<PageNo> evicted;
};

class PageLog {
public:
    explicit PageLog(std::size_t page_size = kDefaultPageSize, std::size_t capacity_pages = kDefaultCapacityPages);

    AppendResult append(std::span<const std::uint8_t> record);

    const Page& read_page(PageNo page_no) const;
    std::optional<PageNo> max_page() const;

    std::size_t page_size() const { return page_size_; }
    std::size_t capacity_pages() const { return capacity_; }
    PageNo head_page_no() const { return head_; }
    PageNo next_page_no() const { return next_; }
    std::size_t retained_pages() const { return pages_.size(); }
    std::span<const std::uint8_t> open_buffer() const { return open_; }

    /// Writes finalized pages as:
    ///   "RPLG" | u16 version=1 | u16 page_size | u32 head_page_no |
    ///   u32 page_count | page_count * page_size bytes      (little-endian)
    void dump(std::ostream& out) const;
    static PageLog load(std::istream& in, std::size_t capacity_pages = kDefaultCapacityPages);

private:
    void finalize();

    std::size_t page_size_;
    std::size_t capacity_;
    PageNo head_ = 0;
    PageNo next_ = 0;
    std::deque<Page> pages_;
    Bytes open_;
};

} // namespace roost
