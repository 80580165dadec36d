#pragma once

// Run outputs. Column order of every CSV is fixed:
//
//   nodes.csv         time_s,node_id,battery_mv,charge_mj,soc,records,gps_high,gps_low,max_page,pages_downloaded,in_contact
//   daily.csv         day,node_id,records,gps_high,gps_low,task_starts,min_mv,max_mv,pages_finalized,pages_downloaded,harvested_mj,consumed_mj,contact
//   intercontact.csv  node_id,from_day,interval_days
//   sessions.csv      time_s,node_id,gateway_id,planned,pages,expired,elapsed_s,window_s,page_rate,contact_lost,config_applied,fw_applied,charge_before_mj,charge_after_mj
//   gateways.csv      gateway_id,time_s,server_time_s,uptime_s,battery_mv,temp_c,free_pages
//
// max_page is empty when the node has not finalized a page yet.

#include <roost/sim.hpp>

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace roost {

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    nlohmann::json summary;
    std::vector<std::filesystem::path> files;
};

nlohmann::json summary_json(const Simulation& sim);

void write_nodes_csv(std::ostream& out, const Metrics& m);
void write_daily_csv(std::ostream& out, const Metrics& m);
void write_intercontact_csv(std::ostream& out, const Metrics& m);
void write_sessions_csv(std::ostream& out, const Metrics& m);
void write_gateways_csv(std::ostream& out, const Simulation& sim);

/// Runs the scenario and writes every output file into out_dir (created if
/// needed). Throws Error on I/O failure.
RunReport run_to_directory(const Scenario& scenario, std::uint64_t seed, const std::filesystem::path& out_dir,
                           bool event_log);

} // namespace roost
