#include "psst/run_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace psst {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string vector_json(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  out += "]";
  return out;
}

const char* bool_json(bool b) { return b ? "true" : "false"; }

Vector vector_from(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_num(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw Error(std::string("front.csv: bad ") + what + " field '" + s + "'");
  return v;
}

}  // namespace

std::string front_csv(const std::string& run_id,
                      const std::vector<ParetoSet>& sets, int tasks) {
  if (tasks < 1) throw ConfigError("front_csv: tasks must be >= 1");
  std::string out = "run_id,region_index,point_index";
  for (int m = 1; m <= tasks; ++m) out += ",L" + std::to_string(m);
  out += ",angle,stationarity,iters_used\n";

  for (const auto& set : sets) {
    int idx = 0;
    for (const auto& p : set.points) {
      if (p.losses.size() != tasks)
        throw DimensionError("front_csv: point with wrong task count");
      out += run_id;
      out += ',' + std::to_string(set.region_index);
      out += ',' + std::to_string(idx++);
      for (int m = 0; m < tasks; ++m) out += ',' + format_double(p.losses(m));
      out += ',' + format_double(p.angle);
      out += ',' + format_double(p.stationarity);
      out += ',' + std::to_string(p.iters_used);
      out += '\n';
    }
  }
  return out;
}

std::vector<FrontRecord> parse_front_csv(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error("front.csv: empty file");

  const std::vector<std::string> header = split(lines[0], ',');
  if (header.size() < 7 || header[0] != "run_id" ||
      header[1] != "region_index" || header[2] != "point_index" ||
      header[header.size() - 3] != "angle" ||
      header[header.size() - 2] != "stationarity" ||
      header.back() != "iters_used")
    throw Error("front.csv: unrecognized header");
  const int tasks = static_cast<int>(header.size()) - 6;

  std::vector<FrontRecord> out;
  out.reserve(lines.size() - 1);
  for (size_t li = 1; li < lines.size(); ++li) {
    const std::vector<std::string> f = split(lines[li], ',');
    if (f.size() != header.size())
      throw Error("front.csv: row with wrong field count");
    FrontRecord r;
    r.run_id = f[0];
    r.region_index = static_cast<int>(parse_num(f[1], "region_index"));
    r.point_index = static_cast<int>(parse_num(f[2], "point_index"));
    r.losses.resize(tasks);
    for (int m = 0; m < tasks; ++m)
      r.losses(m) = parse_num(f[static_cast<size_t>(3 + m)], "loss");
    r.angle = parse_num(f[f.size() - 3], "angle");
    r.stationarity = parse_num(f[f.size() - 2], "stationarity");
    r.iters_used = static_cast<int>(parse_num(f.back(), "iters_used"));
    out.push_back(std::move(r));
  }
  return out;
}

std::string manifest_json(const RunManifest& m) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"tool_version\": \"" << json_escape(m.tool_version) << "\",\n";
  o << "  \"command\": \"" << json_escape(m.command) << "\",\n";
  o << "  \"run_id\": \"" << json_escape(m.run_id) << "\",\n";
  o << "  \"problem\": {\"name\": \"" << json_escape(m.problem_name)
    << "\", \"dim\": " << m.dim << ", \"tasks\": " << m.tasks
    << ", \"hidden\": " << m.hidden << ", \"samples\": " << m.samples
    << "},\n";
  const SolverConfig& c = m.config;
  o << "  \"config\": {\"step_init\": " << format_double(c.step_init)
    << ", \"armijo_c\": " << format_double(c.armijo_c)
    << ", \"backtrack\": " << format_double(c.backtrack)
    << ", \"stationarity_tol\": " << format_double(c.stationarity_tol)
    << ", \"max_iters\": " << c.max_iters
    << ", \"active_eps\": " << format_double(c.active_eps)
    << ", \"fw_tol\": " << format_double(c.fw_tol)
    << ", \"fw_max_iters\": " << c.fw_max_iters
    << ", \"krylov_tol\": " << format_double(c.krylov_tol)
    << ", \"krylov_max_iters\": " << c.krylov_max_iters
    << ", \"expand_step\": " << format_double(c.expand_step)
    << ", \"novelty_delta\": " << format_double(c.novelty_delta)
    << ", \"k_regions\": " << c.k_regions
    << ", \"region_budget\": " << c.region_budget
    << ", \"master_seed\": " << c.master_seed
    << ", \"warm_start\": " << bool_json(c.warm_start)
    << ", \"use_regions\": " << bool_json(c.use_regions) << "},\n";
  o << "  \"balance\": {\"pi0\": " << format_double(m.pi0)
    << ", \"losses\": " << vector_json(m.balance_losses)
    << ", \"angle\": " << format_double(m.balance_angle)
    << ", \"stationarity\": " << format_double(m.balance_stationarity)
    << ", \"iters\": " << m.balance_iters << "},\n";
  o << "  \"sweep_grid\": " << m.sweep_grid << ",\n";
  o << "  \"regions\": [";
  for (size_t i = 0; i < m.regions.size(); ++i) {
    const ManifestRegion& r = m.regions[i];
    if (i) o << ", ";
    o << "{\"index\": " << r.index << ", \"lo\": " << format_double(r.lo)
      << ", \"hi\": " << format_double(r.hi)
      << ", \"descent_iters\": " << r.descent_iters
      << ", \"tangent_solves\": " << r.tangent_solves
      << ", \"points\": " << r.points
      << ", \"failed\": " << bool_json(r.failed) << "}";
  }
  o << "],\n";
  o << "  \"totals\": {\"descent_iters\": " << m.total_descent_iters
    << ", \"tangent_solves\": " << m.total_tangent_solves
    << ", \"points\": " << m.total_points << "}\n";
  o << "}\n";
  return o.str();
}

RunManifest parse_manifest_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("manifest.json: ") + e.what());
  }
  try {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.run_id = j.at("run_id").get<std::string>();
    const auto& p = j.at("problem");
    m.problem_name = p.at("name").get<std::string>();
    m.dim = p.at("dim").get<int>();
    m.tasks = p.at("tasks").get<int>();
    m.hidden = p.at("hidden").get<int>();
    m.samples = p.at("samples").get<int>();
    const auto& c = j.at("config");
    m.config.step_init = c.at("step_init").get<double>();
    m.config.armijo_c = c.at("armijo_c").get<double>();
    m.config.backtrack = c.at("backtrack").get<double>();
    m.config.stationarity_tol = c.at("stationarity_tol").get<double>();
    m.config.max_iters = c.at("max_iters").get<int>();
    m.config.active_eps = c.at("active_eps").get<double>();
    m.config.fw_tol = c.at("fw_tol").get<double>();
    m.config.fw_max_iters = c.at("fw_max_iters").get<int>();
    m.config.krylov_tol = c.at("krylov_tol").get<double>();
    m.config.krylov_max_iters = c.at("krylov_max_iters").get<int>();
    m.config.expand_step = c.at("expand_step").get<double>();
    m.config.novelty_delta = c.at("novelty_delta").get<double>();
    m.config.k_regions = c.at("k_regions").get<int>();
    m.config.region_budget = c.at("region_budget").get<int>();
    m.config.master_seed = c.at("master_seed").get<std::uint64_t>();
    m.config.warm_start = c.at("warm_start").get<bool>();
    m.config.use_regions = c.at("use_regions").get<bool>();
    const auto& b = j.at("balance");
    m.pi0 = b.at("pi0").get<double>();
    m.balance_losses = vector_from(b.at("losses"));
    m.balance_angle = b.at("angle").get<double>();
    m.balance_stationarity = b.at("stationarity").get<double>();
    m.balance_iters = b.at("iters").get<int>();
    m.sweep_grid = j.at("sweep_grid").get<int>();
    for (const auto& rj : j.at("regions")) {
      ManifestRegion r;
      r.index = rj.at("index").get<int>();
      r.lo = rj.at("lo").get<double>();
      r.hi = rj.at("hi").get<double>();
      r.descent_iters = rj.at("descent_iters").get<long>();
      r.tangent_solves = rj.at("tangent_solves").get<long>();
      r.points = rj.at("points").get<int>();
      r.failed = rj.at("failed").get<bool>();
      m.regions.push_back(r);
    }
    const auto& t = j.at("totals");
    m.total_descent_iters = t.at("descent_iters").get<long>();
    m.total_tangent_solves = t.at("tangent_solves").get<long>();
    m.total_points = t.at("points").get<int>();
    return m;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("manifest.json: ") + e.what());
  }
}

std::string best_json(const ParetoPoint& best) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"region_index\": " << best.region_index << ",\n";
  o << "  \"losses\": " << vector_json(best.losses) << ",\n";
  o << "  \"angle\": " << format_double(best.angle) << ",\n";
  o << "  \"stationarity\": " << format_double(best.stationarity) << ",\n";
  o << "  \"iters_used\": " << best.iters_used << ",\n";
  o << "  \"theta\": " << vector_json(best.theta) << "\n";
  o << "}\n";
  return o.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for write: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for read: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path);
  return buf.str();
}

RunManifest manifest_from_report(const ExplorationReport& report,
                                 const std::string& run_id,
                                 const std::string& problem_name, int dim,
                                 int tasks, int hidden, int samples,
                                 const SolverConfig& config) {
  RunManifest m;
  m.run_id = run_id;
  m.problem_name = problem_name;
  m.dim = dim;
  m.tasks = tasks;
  m.hidden = hidden;
  m.samples = samples;
  m.config = config;
  m.pi0 = report.balance.pi0;
  m.balance_losses = report.balance.point.losses;
  m.balance_angle = report.balance.point.angle;
  m.balance_stationarity = report.balance.point.stationarity;
  m.balance_iters = report.balance.point.iters_used;
  for (size_t i = 0; i < report.stats.size(); ++i) {
    ManifestRegion r;
    r.index = report.stats[i].region_index;
    if (i < report.regions.size()) {
      r.lo = report.regions[i].lo;
      r.hi = report.regions[i].hi;
    }
    r.descent_iters = report.stats[i].descent_iters;
    r.tangent_solves = report.stats[i].tangent_solves;
    r.points = report.stats[i].points_found;
    r.failed = report.stats[i].failed;
    m.regions.push_back(r);
  }
  m.total_descent_iters = report.total_descent_iters;
  m.total_tangent_solves = report.total_tangent_solves;
  m.total_points = report.total_points;
  return m;
}

}  // namespace psst
