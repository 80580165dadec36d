#include <roost/pagelog.hpp>

#include <roost/bytes.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace roost {

namespace {
constexpr char kMagic[4] = {'R', 'P', 'L', 'G'};
constexpr std::uint16_t kFileVersion = 1;
constexpr std::size_t kFileHeaderLen = 16;
} // namespace

RecordTooLarge::RecordTooLarge(std::size_t len, std::size_t page_size)
    : Error("record of " + std::to_string(len) + " bytes exceeds page size " + std::to_string(page_size))
{
}

PageExpired::PageExpired(PageNo page_no) : Error("page " + std::to_string(page_no) + " expired"), page_no(page_no)
{
}

PageNotReady::PageNotReady(PageNo page_no)
    : Error("page " + std::to_string(page_no) + " not finalized"), page_no(page_no)
{
}

PageLog::PageLog(std::size_t page_size, std::size_t capacity_pages) : page_size_(page_size), capacity_(capacity_pages)
{
    if (page_size_ == 0 || page_size_ > 0xFFFF)
        throw Error("page size must be in 1..65535");
    if (capacity_ == 0)
        throw Error("page log capacity must be positive");
    open_.reserve(page_size_);
}

AppendResult PageLog::append(std::span<const std::uint8_t> record)
{
    if (record.size() > page_size_)
        throw RecordTooLarge(record.size(), page_size_);

    AppendResult result;
    if (open_.size() + record.size() > page_size_) {
        result.finalized = next_;
        const PageNo head_before = head_;
        finalize();
        if (head_ != head_before)
            result.evicted = head_before;
    }
    open_.insert(open_.end(), record.begin(), record.end());
    result.page_no = next_;
    return result;
}

void PageLog::finalize()
{
    Page page{next_, std::move(open_)};
    page.data.resize(page_size_, 0xFF);
    pages_.push_back(std::move(page));
    ++next_;
    if (pages_.size() > capacity_) {
        pages_.pop_front();
        ++head_;
    }
    open_ = Bytes{};
    open_.reserve(page_size_);
}

const Page& PageLog::read_page(PageNo page_no) const
{
    if (page_no < head_)
        throw PageExpired(page_no);
    if (page_no >= next_)
        throw PageNotReady(page_no);
    return pages_[page_no - head_];
}

std::optional<PageNo> PageLog::max_page() const
{
    if (next_ == 0)
        return std::nullopt;
    return next_ - 1;
}

void PageLog::dump(std::ostream& out) const
{
    Bytes header;
    ByteWriter w(header);
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
    w.u16(kFileVersion);
    w.u16(static_cast<std::uint16_t>(page_size_));
    w.u32(head_);
    w.u32(static_cast<std::uint32_t>(pages_.size()));
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    for (const auto& p : pages_)
        out.write(reinterpret_cast<const char*>(p.data.data()), static_cast<std::streamsize>(p.data.size()));
}

PageLog PageLog::load(std::istream& in, std::size_t capacity_pages)
{
    Bytes header(kFileHeaderLen);
    in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(header.size()));
    if (in.gcount() == 0)
        return PageLog(kDefaultPageSize, capacity_pages);
    if (static_cast<std::size_t>(in.gcount()) != kFileHeaderLen)
        throw BadLogFile("page log header truncated");
    if (!std::equal(header.begin(), header.begin() + 4, kMagic))
        throw BadLogFile("not a page log file (bad magic)");

    ByteReader r(header);
    r.bytes(4);
    if (r.u16() != kFileVersion)
        throw BadLogFile("unsupported page log version");
    const std::size_t page_size = r.u16();
    const PageNo head = r.u32();
    const std::uint32_t count = r.u32();
    if (page_size == 0)
        throw BadLogFile("page size 0 in header");

    PageLog log(page_size, std::max<std::size_t>(capacity_pages, count == 0 ? 1 : count));
    log.head_ = head;
    log.next_ = head;
    for (std::uint32_t i = 0; i < count; ++i) {
        Page p{head + i, Bytes(page_size)};
        in.read(reinterpret_cast<char*>(p.data.data()), static_cast<std::streamsize>(page_size));
        if (static_cast<std::size_t>(in.gcount()) != page_size)
            throw BadLogFile("page " + std::to_string(head + i) + " truncated");
        log.pages_.push_back(std::move(p));
        ++log.next_;
    }
    return log;
}

} // namespace roost
