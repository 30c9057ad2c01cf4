#include "eunsim/io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eunsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<long long>(c));
}

}  // namespace

std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(table.header[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cell_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const ResultTable& table) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
      const Cell& c = row[i];
      if (const auto* s = std::get_if<std::string>(&c)) {
        obj[table.header[i]] = *s;
      } else if (const auto* d = std::get_if<double>(&c)) {
        obj[table.header[i]] = *d;
      } else {
        obj[table.header[i]] = std::get<long long>(c);
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::filesystem::path write_table(const ResultTable& table,
                                  const std::filesystem::path& dir,
                                  const std::string& basename,
                                  const std::string& format) {
  std::filesystem::create_directories(dir);
  const std::string ext = format == "json" ? ".json" : ".csv";
  const std::filesystem::path path = dir / (basename + ext);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << (format == "json" ? to_json(table) : to_csv(table));
  return path;
}

std::string imu_trace_to_csv(std::span<const ImuSample> trace) {
  std::string out =
      "t_start,t_end,dthx1,dthy1,dthz1,dthx2,dthy2,dthz2,"
      "dvx1,dvy1,dvz1,dvx2,dvy2,dvz2\n";
  char buf[64];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof(buf), "%.17g%c", v, last ? '\n' : ',');
    out += buf;
  };
  for (const ImuSample& s : trace) {
    put(s.t0, false);
    put(s.t1, false);
    for (int i = 0; i < 3; ++i) put(s.dtheta1[i], false);
    for (int i = 0; i < 3; ++i) put(s.dtheta2[i], false);
    for (int i = 0; i < 3; ++i) put(s.dvel1[i], false);
    for (int i = 0; i < 3; ++i) put(s.dvel2[i], i == 2);
  }
  return out;
}

std::vector<ImuSample> imu_trace_from_csv(const std::string& csv) {
  std::vector<ImuSample> out;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::array<double, 14> v{};
    std::istringstream ls(line);
    std::string field;
    std::size_t i = 0;
    while (std::getline(ls, field, ',') && i < v.size()) {
      v[i++] = std::stod(field);
    }
    if (i != v.size()) {
      throw std::runtime_error("malformed IMU trace row: " + line);
    }
    ImuSample s;
    s.t0 = v[0];
    s.t1 = v[1];
    s.dtheta1 = {v[2], v[3], v[4]};
    s.dtheta2 = {v[5], v[6], v[7]};
    s.dvel1 = {v[8], v[9], v[10]};
    s.dvel2 = {v[11], v[12], v[13]};
    out.push_back(s);
  }
  return out;
}

ResultTable topology_table(const WtegGraph& graph) {
  ResultTable t;
  t.kind = "topology";
  t.header = {"i", "j", "k", "d_m", "pi_s_per_bit"};
  for (int k = 0; k < 2; ++k) {
    const SlotTopology& slot = graph.slot(k);
    for (int i = 0; i < slot.uav_count(); ++i) {
      for (int j = i + 1; j < slot.uav_count(); ++j) {
        if (is_unreachable(slot.per_bit_s(i, j))) continue;
        t.add_row({static_cast<long long>(i + 1), static_cast<long long>(j + 1),
                   static_cast<long long>(k + 1), slot.dist_m(i, j),
                   slot.per_bit_s(i, j)});
      }
    }
  }
  return t;
}

std::uint64_t hash_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  std::uint64_t h = 14695981039346656037ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eunsim
