#include <roost/report.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>

namespace roost {

using nlohmann::json;

namespace {

json percentiles_json(const Percentiles& p)
{
    return {{"count", p.count}, {"mean", p.mean}, {"p50", p.p50}, {"p90", p.p90}, {"p99", p.p99}, {"max", p.max}};
}

json conservation_json(const Conservation& c)
{
    return {{"stored", c.stored},   {"buffered", c.buffered},       {"pending", c.pending},
            {"expired", c.expired}, {"unaccounted", c.unaccounted}, {"total", c.total()}};
}

json optional_time(const std::optional<Seconds>& t)
{
    return t ? json(*t) : json(nullptr);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode);
    if (!out)
        throw Error("cannot write " + path.string());
    out << std::setprecision(10);
    return out;
}

} // namespace

json summary_json(const Simulation& sim)
{
    const auto& m = sim.metrics();
    const auto& sc = sim.scenario();

    std::size_t daily = 0;
    int max_days = 0;
    for (const auto& ic : m.intercontacts) {
        daily += ic.days <= 1 ? 1 : 0;
        max_days = std::max(max_days, ic.days);
    }
    std::size_t lost = 0;
    std::size_t pages = 0;
    double busy_s = 0;
    for (const auto& s : m.sessions) {
        lost += s.contact_lost ? 1 : 0;
        pages += s.pages;
        busy_s += s.elapsed_s;
    }

    json configs = json::array();
    for (const auto& c : m.configs)
        configs.push_back({{"node", c.node},
                           {"version", c.version},
                           {"edited_at", c.edited_at},
                           {"first_contact_after", optional_time(c.first_contact_after)},
                           {"applied_at", optional_time(c.applied_at)}});

    json gateways = json::array();
    for (const auto& [id, st] : m.gateways)
        gateways.push_back({{"id", id},
                            {"beacons_heard", st.beacons_heard},
                            {"plans", st.plans},
                            {"pages_downloaded", st.pages_downloaded},
                            {"pages_expired", st.pages_expired},
                            {"duplicate_uploads", st.duplicate_uploads},
                            {"mismatched_uploads", st.mismatched_uploads},
                            {"rejected_messages", st.rejected_messages},
                            {"syncs", st.syncs},
                            {"contacts_lost", st.contacts_lost},
                            {"configs_applied", st.configs_applied},
                            {"firmware_applied", st.firmware_applied},
                            {"awake_s", st.awake_s}});

    json nodes = json::array();
    for (const Node* n : sim.nodes()) {
        const auto max_page = n->log().max_page();
        nodes.push_back({{"id", n->id()},
                         {"battery_mv", n->battery().voltage_mv()},
                         {"soc", n->battery().fraction()},
                         {"records", n->counters().records},
                         {"max_page", max_page ? json(*max_page) : json(nullptr)},
                         {"head_page", n->log().head_page_no()},
                         {"config_version", n->config_version()},
                         {"fw_version", n->fw_version()},
                         {"consumed_mj", n->energy().consumed_mj},
                         {"harvested_mj", n->energy().harvested_mj}});
    }

    return {{"scenario", sc.name},
            {"seed", sim.seed()},
            {"duration_days", sc.duration_days},
            {"node_count", sc.nodes.size()},
            {"gateway_count", sc.gateways.size()},
            {"records_logged", m.records_logged},
            {"pages_finalized", m.pages_finalized},
            {"pages_stored", m.pages_stored},
            {"page_transfers", m.page_transfers},
            {"duplicate_transfers", m.duplicate_transfers},
            {"ingest_duplicates", m.ingest_duplicates},
            {"ingest_mismatches", m.ingest_mismatches},
            {"pages_expired_reported", m.pages_expired_reported},
            {"quarantined_pages", m.quarantined_pages},
            {"causality_violations", m.causality_violations},
            {"rejected_messages", m.rejected_messages},
            {"events", m.events},
            {"latency_s", percentiles_json(m.latency_s)},
            {"config_propagation_s", percentiles_json(m.config_delay_s)},
            {"configs", configs},
            {"intercontact",
             {{"count", m.intercontacts.size()},
              {"p_le_1_day",
               m.intercontacts.empty() ? 0.0 : static_cast<double>(daily) / static_cast<double>(m.intercontacts.size())},
              {"max_days", max_days}}},
            {"sessions",
             {{"count", m.sessions.size()},
              {"contacts_lost", lost},
              {"pages", pages},
              {"transfer_s", busy_s},
              {"pages_per_transfer_s", busy_s > 0 ? static_cast<double>(pages) / busy_s : 0.0}}},
            {"conservation", {{"records", conservation_json(m.records)}, {"pages", conservation_json(m.pages)}}},
            {"gateways", gateways},
            {"nodes", nodes}};
}

void write_nodes_csv(std::ostream& out, const Metrics& m)
{
    out << "time_s,node_id,battery_mv,charge_mj,soc,records,gps_high,gps_low,max_page,pages_downloaded,in_contact\n";
    for (const auto& t : m.traces) {
        out << t.time << ',' << t.node << ',' << t.battery_mv << ',' << t.charge_mj << ',' << t.soc << ','
            << t.records << ',' << t.gps_high << ',' << t.gps_low << ',';
        if (t.max_page)
            out << *t.max_page;
        out << ',' << t.pages_downloaded << ',' << (t.in_contact ? 1 : 0) << '\n';
    }
}

void write_daily_csv(std::ostream& out, const Metrics& m)
{
    out << "day,node_id,records,gps_high,gps_low,task_starts,min_mv,max_mv,pages_finalized,pages_downloaded,"
           "harvested_mj,consumed_mj,contact\n";
    for (const auto& d : m.daily)
        out << d.day << ',' << d.node << ',' << d.records << ',' << d.gps_high << ',' << d.gps_low << ','
            << d.task_starts << ',' << d.min_mv << ',' << d.max_mv << ',' << d.pages_finalized << ','
            << d.pages_downloaded << ',' << d.harvested_mj << ',' << d.consumed_mj << ',' << (d.contact ? 1 : 0)
            << '\n';
}

void write_intercontact_csv(std::ostream& out, const Metrics& m)
{
    out << "node_id,from_day,interval_days\n";
    for (const auto& ic : m.intercontacts)
        out << ic.node << ',' << ic.from_day << ',' << ic.days << '\n';
}

void write_sessions_csv(std::ostream& out, const Metrics& m)
{
    out << "time_s,node_id,gateway_id,planned,pages,expired,elapsed_s,window_s,page_rate,contact_lost,"
           "config_applied,fw_applied,charge_before_mj,charge_after_mj\n";
    for (const auto& s : m.sessions)
        out << s.time << ',' << s.node << ',' << s.gateway << ',' << s.planned << ',' << s.pages << ',' << s.expired
            << ',' << s.elapsed_s << ',' << s.window_s << ',' << s.page_rate << ',' << s.contact_lost << ','
            << s.config_applied << ',' << s.fw_applied << ',' << s.charge_before_mj << ',' << s.charge_after_mj
            << '\n';
}

void write_gateways_csv(std::ostream& out, const Simulation& sim)
{
    out << "gateway_id,time_s,server_time_s,uptime_s,battery_mv,temp_c,free_pages\n";
    for (const Gateway* g : sim.gateways()) {
        for (const auto& h : sim.cloud().health(g->id())) {
            const auto& r = h.report;
            out << r.gateway_id << ',' << r.time << ',' << h.server_time << ',';
            if (r.uptime_s)
                out << *r.uptime_s;
            out << ',';
            if (r.battery_mv)
                out << *r.battery_mv;
            out << ',';
            if (r.temp_c)
                out << *r.temp_c;
            out << ',';
            if (r.free_pages)
                out << *r.free_pages;
            out << '\n';
        }
    }
}

RunReport run_to_directory(const Scenario& scenario, std::uint64_t seed, const std::filesystem::path& out_dir,
                           bool event_log)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

    RunReport report;
    report.scenario = scenario.name;
    report.seed = seed;
    auto path = [&](const std::string& name) {
        report.files.push_back(out_dir / name);
        return out_dir / name;
    };

    auto journal = open_out(path("journal.jsonl"));
    std::ofstream events;
    if (event_log)
        events = open_out(path("events.log"));

    Simulation sim(scenario, seed);
    sim.set_journal(&journal);
    if (event_log)
        sim.set_event_log(&events);
    sim.run();
    journal.close();
    events.close();

    {
        auto out = open_out(path("registry.json"));
        out << sim.cloud().registry().to_json().dump(2) << '\n';
    }
    {
        auto out = open_out(path("nodes.csv"));
        write_nodes_csv(out, sim.metrics());
    }
    {
        auto out = open_out(path("daily.csv"));
        write_daily_csv(out, sim.metrics());
    }
    {
        auto out = open_out(path("intercontact.csv"));
        write_intercontact_csv(out, sim.metrics());
    }
    {
        auto out = open_out(path("sessions.csv"));
        write_sessions_csv(out, sim.metrics());
    }
    {
        auto out = open_out(path("gateways.csv"));
        write_gateways_csv(out, sim);
    }
    for (const Node* n : sim.nodes()) {
        auto out = open_out(path("node_" + std::to_string(n->id()) + ".pagelog"), std::ios::out | std::ios::binary);
        n->log().dump(out);
    }

    report.summary = summary_json(sim);
    json files = json::array();
    for (const auto& f : report.files)
        files.push_back(f.filename().string());
    files.push_back("summary.json");
    report.summary["files"] = files;
    {
        auto out = open_out(path("summary.json"));
        out << report.summary.dump(2) << '\n';
    }
    return report;
}

} // namespace roost
