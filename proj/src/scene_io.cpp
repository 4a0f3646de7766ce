#include "drivelab/scene_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drivelab {

namespace {

using nlohmann::json;

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

void append_vec2(std::string& out, const Vec2& v) {
  out += '[';
  append_num(out, v.x);
  out += ',';
  append_num(out, v.y);
  out += ']';
}

void append_point_list(std::string& out, const std::vector<Vec2>& pts) {
  out += '[';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ',';
    append_vec2(out, pts[i]);
  }
  out += ']';
}

void append_trajectory(std::string& out, const Trajectory& traj) {
  out += "{\"sample_rate\":";
  append_num(out, traj.sample_rate_hz);
  out += ",\"waypoints\":[";
  for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
    if (i) out += ',';
    const Waypoint& w = traj.waypoints[i];
    out += '[';
    append_num(out, w.t);
    out += ',';
    append_num(out, w.pose.x);
    out += ',';
    append_num(out, w.pose.y);
    out += ',';
    append_num(out, w.pose.heading);
    out += ',';
    append_num(out, w.speed);
    out += ']';
  }
  out += "]}";
}

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out += c;
    }
  }
  out += '"';
}

// --- reading helpers -------------------------------------------------------

struct Cursor {
  const json* node;
  std::string path;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw DatasetError(line, path, what); }

  Cursor at(const std::string& key) const {
    if (!node->is_object()) fail("expected object");
    auto it = node->find(key);
    if (it == node->end()) throw DatasetError(line, path.empty() ? key : path + "." + key,
                                              "missing required field");
    return {&*it, path.empty() ? key : path + "." + key, line};
  }

  Cursor at(std::size_t idx) const {
    if (!node->is_array()) fail("expected array");
    if (idx >= node->size()) fail("index out of range");
    return {&(*node)[idx], path + "[" + std::to_string(idx) + "]", line};
  }

  std::size_t size() const {
    if (!node->is_array()) fail("expected array");
    return node->size();
  }

  double as_double() const {
    if (!node->is_number()) fail("expected number");
    return node->get<double>();
  }

  std::int64_t as_int() const {
    if (!node->is_number_integer()) fail("expected integer");
    return node->get<std::int64_t>();
  }

  std::uint64_t as_u64() const {
    if (!node->is_number_unsigned() && !node->is_number_integer()) fail("expected integer");
    return node->get<std::uint64_t>();
  }

  std::string as_string() const {
    if (!node->is_string()) fail("expected string");
    return node->get<std::string>();
  }
};

Vec2 read_vec2(const Cursor& c) {
  if (c.size() != 2) c.fail("expected [x, y]");
  return {c.at(std::size_t{0}).as_double(), c.at(std::size_t{1}).as_double()};
}

std::vector<Vec2> read_point_list(const Cursor& c) {
  std::vector<Vec2> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(read_vec2(c.at(i)));
  return out;
}

Trajectory read_trajectory(const Cursor& c) {
  Trajectory traj;
  traj.sample_rate_hz = c.at("sample_rate").as_double();
  const Cursor wps = c.at("waypoints");
  traj.waypoints.reserve(wps.size());
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const Cursor w = wps.at(i);
    if (w.size() != 5) w.fail("expected [t, x, y, heading, speed]");
    Waypoint wp;
    wp.t = w.at(std::size_t{0}).as_double();
    wp.pose.x = w.at(std::size_t{1}).as_double();
    wp.pose.y = w.at(std::size_t{2}).as_double();
    wp.pose.heading = w.at(std::size_t{3}).as_double();
    wp.speed = w.at(std::size_t{4}).as_double();
    traj.waypoints.push_back(wp);
  }
  return traj;
}

template <typename FromString>
auto read_enum(const Cursor& c, FromString from) {
  try {
    return from(c.as_string());
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
}

}  // namespace

std::string serialize_demonstration(const Demonstration& demo) {
  const Scene& s = demo.scene;
  std::string out;
  out.reserve(16384);

  out += "{\"scene_id\":";
  append_escaped(out, s.scene_id);

  out += ",\"road_map\":{\"lanes\":[";
  for (std::size_t i = 0; i < s.road_map.lanes.size(); ++i) {
    if (i) out += ',';
    const LaneSegment& l = s.road_map.lanes[i];
    out += "{\"id\":" + std::to_string(l.id);
    out += ",\"road_id\":" + std::to_string(l.road_id);
    out += ",\"class\":\"" + to_string(l.road_class) + '"';
    out += ",\"width\":";
    append_num(out, l.width);
    out += ",\"speed_limit\":";
    append_num(out, l.speed_limit);
    out += ",\"left_divider\":\"" + to_string(l.left_divider) + '"';
    out += ",\"right_divider\":\"" + to_string(l.right_divider) + '"';
    out += ",\"centerline\":";
    append_point_list(out, l.centerline);
    out += '}';
  }
  out += "],\"crosswalks\":[";
  for (std::size_t i = 0; i < s.road_map.crosswalks.size(); ++i) {
    if (i) out += ',';
    append_point_list(out, s.road_map.crosswalks[i].polygon);
  }
  out += "],\"stop_lines\":[";
  for (std::size_t i = 0; i < s.road_map.stop_lines.size(); ++i) {
    if (i) out += ',';
    const StopLine& sl = s.road_map.stop_lines[i];
    out += "{\"a\":";
    append_vec2(out, sl.a);
    out += ",\"b\":";
    append_vec2(out, sl.b);
    out += ",\"light_id\":" + std::to_string(sl.light_id) + '}';
  }
  out += "],\"drivable_area\":[";
  for (std::size_t i = 0; i < s.road_map.drivable_area.size(); ++i) {
    if (i) out += ',';
    append_point_list(out, s.road_map.drivable_area[i]);
  }
  out += "]}";

  out += ",\"agents\":[";
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    if (i) out += ',';
    const AgentTrack& a = s.agents[i];
    out += "{\"id\":" + std::to_string(a.id);
    out += ",\"class\":\"" + to_string(a.cls) + '"';
    out += ",\"length\":";
    append_num(out, a.length);
    out += ",\"width\":";
    append_num(out, a.width);
    out += ",\"states\":[";
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      if (k) out += ',';
      const AgentState& st = a.states[k];
      out += '[';
      append_num(out, st.t);
      out += ',';
      append_num(out, st.pose.x);
      out += ',';
      append_num(out, st.pose.y);
      out += ',';
      append_num(out, st.pose.heading);
      out += ',';
      append_num(out, st.speed);
      out += ']';
    }
    out += "]}";
  }
  out += ']';

  out += ",\"ego_history\":";
  append_trajectory(out, s.ego_history);

  out += ",\"nav\":{\"command\":\"" + to_string(s.nav.command) + '"';
  out += ",\"target_road_class\":\"" + to_string(s.nav.target_road_class) + '"';
  out += ",\"distance_to_intersection\":";
  append_num(out, s.nav.distance_to_intersection);
  out += ",\"route\":";
  append_point_list(out, s.nav.route);
  out += '}';

  out += ",\"traffic_light\":{\"state\":\"" + to_string(s.traffic_light.initial) + '"';
  out += ",\"stop_line_id\":" + std::to_string(s.traffic_light.stop_line_id);
  out += ",\"switch_time\":";
  append_num(out, s.traffic_light.switch_time);
  out += ",\"after\":\"" + to_string(s.traffic_light.after) + "\"}";

  out += ",\"episode_duration\":";
  append_num(out, s.episode_duration);

  out += ",\"expert_future\":";
  append_trajectory(out, demo.expert_future);

  out += ",\"scenario_label\":";
  if (s.scenario_label) {
    out += '"' + to_string(*s.scenario_label) + '"';
  } else {
    out += "null";
  }

  out += ",\"seed\":" + std::to_string(s.seed);
  out += '}';
  return out;
}

Demonstration parse_demonstration(const std::string& line, std::size_t line_no) {
  json root;
  try {
    root = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DatasetError(line_no, "", std::string("invalid JSON: ") + e.what());
  }
  const Cursor c{&root, "", line_no};

  Demonstration demo;
  Scene& s = demo.scene;
  s.scene_id = c.at("scene_id").as_string();

  const Cursor rm = c.at("road_map");
  const Cursor lanes = rm.at("lanes");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const Cursor lc = lanes.at(i);
    LaneSegment l;
    l.id = static_cast<int>(lc.at("id").as_int());
    l.road_id = static_cast<int>(lc.at("road_id").as_int());
    l.road_class = read_enum(lc.at("class"), road_class_from_string);
    l.width = lc.at("width").as_double();
    l.speed_limit = lc.at("speed_limit").as_double();
    l.left_divider = read_enum(lc.at("left_divider"), divider_style_from_string);
    l.right_divider = read_enum(lc.at("right_divider"), divider_style_from_string);
    l.centerline = read_point_list(lc.at("centerline"));
    s.road_map.lanes.push_back(std::move(l));
  }
  const Cursor cws = rm.at("crosswalks");
  for (std::size_t i = 0; i < cws.size(); ++i) {
    s.road_map.crosswalks.push_back({read_point_list(cws.at(i))});
  }
  const Cursor sls = rm.at("stop_lines");
  for (std::size_t i = 0; i < sls.size(); ++i) {
    const Cursor sc = sls.at(i);
    StopLine sl;
    sl.a = read_vec2(sc.at("a"));
    sl.b = read_vec2(sc.at("b"));
    sl.light_id = static_cast<int>(sc.at("light_id").as_int());
    s.road_map.stop_lines.push_back(sl);
  }
  const Cursor das = rm.at("drivable_area");
  for (std::size_t i = 0; i < das.size(); ++i) {
    s.road_map.drivable_area.push_back(read_point_list(das.at(i)));
  }

  const Cursor agents = c.at("agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const Cursor ac = agents.at(i);
    AgentTrack a;
    a.id = static_cast<int>(ac.at("id").as_int());
    a.cls = read_enum(ac.at("class"), agent_class_from_string);
    a.length = ac.at("length").as_double();
    a.width = ac.at("width").as_double();
    const Cursor states = ac.at("states");
    a.states.reserve(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
      const Cursor st = states.at(k);
      if (st.size() != 5) st.fail("expected [t, x, y, heading, speed]");
      AgentState as_;
      as_.t = st.at(std::size_t{0}).as_double();
      as_.pose.x = st.at(std::size_t{1}).as_double();
      as_.pose.y = st.at(std::size_t{2}).as_double();
      as_.pose.heading = st.at(std::size_t{3}).as_double();
      as_.speed = st.at(std::size_t{4}).as_double();
      a.states.push_back(as_);
    }
    s.agents.push_back(std::move(a));
  }

  s.ego_history = read_trajectory(c.at("ego_history"));

  const Cursor nav = c.at("nav");
  s.nav.command = read_enum(nav.at("command"), command_from_string);
  s.nav.target_road_class = read_enum(nav.at("target_road_class"), road_class_from_string);
  s.nav.distance_to_intersection = nav.at("distance_to_intersection").as_double();
  s.nav.route = read_point_list(nav.at("route"));

  const Cursor tl = c.at("traffic_light");
  s.traffic_light.initial = read_enum(tl.at("state"), light_state_from_string);
  s.traffic_light.stop_line_id = static_cast<int>(tl.at("stop_line_id").as_int());
  s.traffic_light.switch_time = tl.at("switch_time").as_double();
  s.traffic_light.after = read_enum(tl.at("after"), light_state_from_string);

  s.episode_duration = c.at("episode_duration").as_double();
  demo.expert_future = read_trajectory(c.at("expert_future"));

  const Cursor label = c.at("scenario_label");
  if (!label.node->is_null()) {
    s.scenario_label = read_enum(label, scenario_type_from_string);
  }
  s.seed = c.at("seed").as_u64();

  try {
    validate_demonstration(demo);
  } catch (const std::invalid_argument& e) {
    throw DatasetError(line_no, "", e.what());
  }
  return demo;
}

std::size_t write_dataset(const std::vector<Demonstration>& demos, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const Demonstration& d : demos) {
    out << serialize_demonstration(d) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
  return demos.size();
}

std::vector<Demonstration> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<Demonstration> demos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    demos.push_back(parse_demonstration(line, line_no));
  }
  return demos;
}

std::int64_t DatasetManifest::total() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : counts) n += c;
  return n;
}

std::string manifest_path_for(const std::string& dataset_path) {
  return dataset_path + ".manifest.json";
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::string out = "{\"generator_version\":\"" + manifest.generator_version + "\"";
  out += ",\"seed\":" + std::to_string(manifest.seed);
  out += ",\"total\":" + std::to_string(manifest.total());
  out += ",\"counts\":{";
  bool first = true;
  for (const auto& [name, count] : manifest.counts) {
    if (!first) out += ',';
    first = false;
    out += '"' + name + "\":" + std::to_string(count);
  }
  out += "}}\n";
  write_text_file(path, out);
}

DatasetManifest read_manifest(const std::string& path) {
  const std::string text = read_text_file(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatasetError(1, "", std::string("invalid manifest JSON: ") + e.what());
  }
  const Cursor c{&root, "", 1};
  DatasetManifest m;
  m.generator_version = c.at("generator_version").as_string();
  m.seed = c.at("seed").as_u64();
  const Cursor counts = c.at("counts");
  if (!counts.node->is_object()) counts.fail("expected object");
  for (auto it = counts.node->begin(); it != counts.node->end(); ++it) {
    m.counts[it.key()] = it.value().get<std::int64_t>();
  }
  return m;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
  return hex;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace drivelab
