#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::scenario {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::map<std::string, Series> read_file(const fs::path& path) {
  if (!fs::exists(path)) return {};
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_series_csv(in);
}

void write_file(const fs::path& path, const std::map<std::string, Series>& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_series_csv(out, series);
}

}  // namespace

std::map<std::string, Series> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("series CSV is empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "timestamp") throw DataError("series CSV must start with a timestamp column");
  std::map<std::string, Series> out;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty() || out.count(header[c])) throw DataError("empty or duplicate series id in CSV header");
    out[header[c]];
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError("CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing text");
        out[header[c]].push_back(v);
      } catch (const std::exception&) {
        throw DataError("CSV row " + std::to_string(row) + ": bad number '" + cells[c] + "'");
      }
    }
  }
  return out;
}

void write_series_csv(std::ostream& out, const std::map<std::string, Series>& series) {
  out << "timestamp";
  std::size_t rows = 0;
  for (const auto& [id, s] : series) {
    out << ',' << id;
    rows = std::max(rows, s.size());
  }
  out << '\n';
  out.precision(17);
  for (std::size_t t = 0; t < rows; ++t) {
    out << t;
    for (const auto& [id, s] : series) {
      out << ',';
      if (t < s.size()) out << s[t];
    }
    out << '\n';
  }
}

void write_scenario(const std::string& dir, const Scenario& s) {
  s.validate();
  fs::create_directories(dir);
  nlohmann::json meta = {{"id", s.id}, {"snapshots", s.snapshots}, {"step_hours", s.step_hours}};
  std::ofstream(fs::path(dir) / "meta.json") << meta.dump(2) << '\n';
  write_file(fs::path(dir) / "capacity_factors.csv", s.capacity_factors);
  write_file(fs::path(dir) / "loads.csv", s.loads);
  write_file(fs::path(dir) / "inflows.csv", s.inflows);
  write_file(fs::path(dir) / "temperature.csv", s.daily_temperature);
}

Scenario read_scenario(const std::string& dir) {
  const fs::path meta_path = fs::path(dir) / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw DataError("missing " + meta_path.string());
  Scenario s;
  try {
    nlohmann::json meta = nlohmann::json::parse(in);
    s.id = meta.at("id").get<std::string>();
    s.snapshots = meta.at("snapshots").get<int>();
    s.step_hours = meta.at("step_hours").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  s.capacity_factors = read_file(fs::path(dir) / "capacity_factors.csv");
  s.loads = read_file(fs::path(dir) / "loads.csv");
  s.inflows = read_file(fs::path(dir) / "inflows.csv");
  s.daily_temperature = read_file(fs::path(dir) / "temperature.csv");
  s.validate();
  return s;
}

}  // namespace nearopt::scenario
