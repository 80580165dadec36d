#include <roost/range_set.hpp>

#include <algorithm>
#include <iterator>
#include <limits>

namespace roost {

bool RangeSet::insert(PageNo p)
{
    if (contains(p))
        return false;
    insert(PageRange{p, p});
    return true;
}

void RangeSet::insert(PageRange r)
{
    PageNo first = r.first;
    PageNo last = r.last;

    // Merge with a predecessor that overlaps or touches.
    auto it = ranges_.upper_bound(first);
    if (it != ranges_.begin()) {
        auto prev = std::prev(it);
        if (prev->second == std::numeric_limits<PageNo>::max() || prev->second + 1 >= first) {
            first = prev->first;
            last = std::max(last, prev->second);
            it = ranges_.erase(prev);
        }
    }
    // Absorb successors that start inside or right after [first, last].
    while (it != ranges_.end() && (last == std::numeric_limits<PageNo>::max() || it->first <= last + 1)) {
        last = std::max(last, it->second);
        it = ranges_.erase(it);
    }
    ranges_.emplace(first, last);
}

void RangeSet::insert_all(const RangeSet& other)
{
    for (const auto& [f, l] : other.ranges_)
        insert(PageRange{f, l});
}

bool RangeSet::contains(PageNo p) const
{
    auto it = ranges_.upper_bound(p);
    if (it == ranges_.begin())
        return false;
    --it;
    return p <= it->second;
}

std::size_t RangeSet::count() const
{
    std::size_t n = 0;
    for (const auto& [f, l] : ranges_)
        n += static_cast<std::size_t>(l) - f + 1;
    return n;
}

std::vector<PageRange> RangeSet::gaps(PageNo lo, PageNo hi) const
{
    std::vector<PageRange> out;
    if (lo > hi)
        return out;
    PageNo cursor = lo;
    auto it = ranges_.upper_bound(lo);
    if (it != ranges_.begin())
        --it;
    for (; it != ranges_.end() && it->first <= hi; ++it) {
        if (it->second < cursor)
            continue;
        if (it->first > cursor)
            out.push_back({cursor, it->first - 1});
        if (it->second >= hi)
            return out;
        cursor = it->second + 1;
    }
    out.push_back({cursor, hi});
    return out;
}

PageNo RangeSet::first_missing(PageNo lo) const
{
    auto it = ranges_.upper_bound(lo);
    if (it == ranges_.begin())
        return lo;
    --it;
    return lo <= it->second ? it->second + 1 : lo;
}

std::vector<PageRange> RangeSet::ranges() const
{
    std::vector<PageRange> out;
    out.reserve(ranges_.size());
    for (const auto& [f, l] : ranges_)
        out.push_back({f, l});
    return out;
}

RangeSet RangeSet::from_ranges(const std::vector<PageRange>& ranges)
{
    RangeSet s;
    for (const auto& r : ranges)
        s.insert(r);
    return s;
}

} // namespace roost
