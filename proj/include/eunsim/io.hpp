#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "eunsim/channel_wteg.hpp"
#include "eunsim/sins.hpp"

namespace eunsim {

// Table cell; numeric cells stay typed so the JSON writer can emit numbers.
using Cell = std::variant<std::string, double, long long>;

struct ResultTable {
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

// deterministic decimal rendering used in every output file
std::string format_double(double v);

// RFC-4180: fields containing separator, quote or newline get quoted, quotes
// doubled.
std::string csv_escape(const std::string& field);

std::string to_csv(const ResultTable& table);
// one JSON object per row, assembled into an array
std::string to_json(const ResultTable& table);

// Writes <dir>/<basename>.<ext> and returns the path.
std::filesystem::path write_table(const ResultTable& table,
                                  const std::filesystem::path& dir,
                                  const std::string& basename,
                                  const std::string& format);

// IMU trace round trip. Columns:
// t_start,t_end,dthx1,dthy1,dthz1,dthx2,dthy2,dthz2,dvx1,dvy1,dvz1,dvx2,dvy2,dvz2
std::string imu_trace_to_csv(std::span<const ImuSample> trace);
std::vector<ImuSample> imu_trace_from_csv(const std::string& csv);

// Topology snapshot as an adjacency list: i,j,k,d_m,pi_s_per_bit for every
// existing link (i < j) in each slot.
ResultTable topology_table(const WtegGraph& graph);

// FNV-1a over a file's bytes; scenario fingerprint carried in result rows.
std::uint64_t hash_file(const std::filesystem::path& file);
std::string hash_hex(std::uint64_t h);

}  // namespace eunsim
