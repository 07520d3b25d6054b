#pragma once

// Map and scenario files are JSON; plans are CSV with one row per time step.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mapf/roadmap.hpp"

namespace mapf::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json map_to_json(const Roadmap& map) {
  nlohmann::json vertices = nlohmann::json::array();
  for (std::size_t i = 0; i < map.vertex_count(); ++i) {
    const Point& p = map.vertices()[i];
    vertices.push_back({{"id", i}, {"x", p.x}, {"y", p.y}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : map.edges()) edges.push_back({a, b});
  return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

inline Roadmap map_from_json(const nlohmann::json& j) {
  try {
    const auto& vs = j.at("vertices");
    std::vector<Point> points(vs.size());
    std::vector<bool> seen(vs.size(), false);
    for (const auto& v : vs) {
      const auto id = v.at("id").get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= vs.size() || seen[id]) {
        throw FormatError("map: vertex ids must be unique and dense from 0");
      }
      seen[id] = true;
      points[id] = {v.at("x").get<double>(), v.at("y").get<double>()};
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw FormatError("map: each edge must be a pair of vertex ids");
      edges.emplace_back(e[0].get<VertexId>(), e[1].get<VertexId>());
    }
    return Roadmap(std::move(points), std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("map: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline nlohmann::json scenario_to_json(const Assignment& a) {
  nlohmann::json agents = nlohmann::json::array();
  for (std::size_t i = 0; i < a.agent_count(); ++i) agents.push_back({{"start", a.starts[i]}, {"goal", a.goals[i]}});
  return {{"agents", std::move(agents)}};
}

inline Assignment scenario_from_json(const nlohmann::json& j) {
  try {
    Assignment a;
    for (const auto& agent : j.at("agents")) {
      a.starts.push_back(agent.at("start").get<VertexId>());
      a.goals.push_back(agent.at("goal").get<VertexId>());
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

inline std::string plan_to_csv(const Plan& plan) {
  std::ostringstream out;
  const std::size_t k = plan.agent_count();
  out << 't';
  for (std::size_t i = 0; i < k; ++i) out << ",agent" << i;
  out << '\n';
  for (std::size_t t = 0; t < plan.steps.size(); ++t) {
    out << t;
    for (VertexId v : plan.steps[t].positions) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

inline Plan plan_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t", 0) != 0) throw FormatError("plan: missing header row");
  const std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  Plan plan;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> parts;
    while (std::getline(cells, cell, ',')) parts.push_back(cell);
    if (parts.size() != columns + 1) throw FormatError("plan: row " + std::to_string(row) + " has wrong column count");
    try {
      if (std::stoll(parts[0]) != static_cast<long long>(row)) {
        throw FormatError("plan: time column must count up from 0");
      }
      Configuration c;
      for (std::size_t i = 1; i < parts.size(); ++i) c.positions.push_back(static_cast<VertexId>(std::stol(parts[i])));
      plan.steps.push_back(std::move(c));
    } catch (const std::logic_error&) {
      throw FormatError("plan: non-integer cell in row " + std::to_string(row));
    }
    ++row;
  }
  return plan;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + path);
  out << contents;
  if (!out) throw FileError("failed writing " + path);
}

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

inline Roadmap load_map(const std::string& path) { return map_from_json(parse_json(read_file(path), path)); }
inline Assignment load_scenario(const std::string& path) {
  return scenario_from_json(parse_json(read_file(path), path));
}
inline Plan load_plan(const std::string& path) { return plan_from_csv(read_file(path)); }

inline void save_map(const std::string& path, const Roadmap& map) { write_file(path, map_to_json(map).dump(1) + "\n"); }
inline void save_scenario(const std::string& path, const Assignment& a) {
  write_file(path, scenario_to_json(a).dump(1) + "\n");
}
inline void save_plan(const std::string& path, const Plan& plan) { write_file(path, plan_to_csv(plan)); }

}  // namespace mapf::io
