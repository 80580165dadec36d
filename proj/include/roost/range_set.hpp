#pragma once

#include <roost/common.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace roost {

/// Closed page range [first, last].
struct PageRange {
    PageNo first = 0;
    PageNo last = 0;

    std::size_t size() const { return static_cast<std::size_t>(last) - first + 1; }
    bool operator==(const PageRange&) const = default;
};

/// Set of page numbers stored as disjoint, non-adjacent closed ranges.
class RangeSet {
public:
    /// Returns false when the page was already present.
    bool insert(PageNo p);
    void insert(PageRange r);
    void insert_all(const RangeSet& other);

    bool contains(PageNo p) const;
    bool empty() const { return ranges_.empty(); }
    std::size_t count() const;
    std::size_t range_count() const { return ranges_.size(); }

    /// Ranges of [lo, hi] not covered by the set, ascending.
    std::vector<PageRange> gaps(PageNo lo, PageNo hi) const;
    /// Smallest page >= lo that is not in the set.
    PageNo first_missing(PageNo lo = 0) const;

    std::vector<PageRange> ranges() const;
    static RangeSet from_ranges(const std::vector<PageRange>& ranges);

    bool operator==(const RangeSet&) const = default;

private:
    // first -> last
    std::map<PageNo, PageNo> ranges_;
};

} // namespace roost
