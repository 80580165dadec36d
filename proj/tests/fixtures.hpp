#pragma once

#include <roost/node.hpp>

#include <memory>

namespace roost::testing {

inline LoadTable zero_loads()
{
    LoadTable t;
    t.mw.fill(0.0);
    return t;
}

/// Node with no harvest and no loads, so the battery never moves.
inline Node quiet_node(double fraction, std::size_t page_size = 256, std::size_t capacity = 64, NodeId id = 1)
{
    BatteryModel battery(1.0e5, fraction, VoltageCurve{}, HarvestProfile{}, zero_loads());
    return Node(id, battery, PageLog(page_size, capacity),
                std::make_shared<const tdf::MetadataRegistry>(tdf::builtin_registry()));
}

inline TaskConfig every_second(TaskId id, TypeId type)
{
    TaskConfig t;
    t.task_id = id;
    t.type_id = type;
    t.sample_period_s = 1;
    t.on_time_s = 0.01;
    return t;
}

/// Quiet node that has logged GPS fixes every second until max_page is final.
inline Node filled_node(PageNo max_page, std::size_t capacity = 4096, NodeId id = 1)
{
    Node n = quiet_node(0.9, 256, capacity, id);
    n.install_task(every_second(1, tdf::types::kGps));
    n.apply(n.evaluate_tasks());
    while (!n.log().max_page() || *n.log().max_page() < max_page)
        n.step(1);
    return n;
}

} // namespace roost::testing
