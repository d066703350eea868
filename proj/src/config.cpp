#include "rwdpp/config.hpp"

#include <fstream>
#include <sstream>

#include "rwdpp/report.hpp"

namespace rwdpp::config {

namespace {

const char* kExperimentNames[] = {
    "env-check",  "walk",         "diffusion", "gaussianity",    "corrector", "heatkernel",
    "displacement", "distance-decay", "events",    "oracle-compare", "full-suite",
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::int64_t i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::uint64_t i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned value for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean value for '" + key + "': " + v);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : split(v, ','))
    if (!part.empty()) out.push_back(parse_double(key, part));
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<std::int64_t> out;
  for (const auto& part : split(v, ','))
    if (!part.empty()) out.push_back(parse_int(key, part));
  return out;
}

std::vector<Site> parse_sites(const std::string& key, const std::string& v) {
  std::vector<Site> out;
  for (const auto& tuple : split(v, ';')) {
    if (tuple.empty()) continue;
    const auto coords = parse_int_list(key, tuple);
    if (coords.empty() || coords.size() > kMaxDim)
      throw ConfigError("config: bad site tuple in '" + key + "': " + tuple);
    Site s;
    for (std::size_t i = 0; i < coords.size(); ++i)
      s[static_cast<int>(i)] = coords[i];
    out.push_back(s);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values, const std::string& sep,
                 std::string (*fmt)(T)) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

}  // namespace

std::string experiment_name(Experiment e) {
  return kExperimentNames[static_cast<int>(e)];
}

Experiment experiment_from_name(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(Experiment::kFullSuite); ++i)
    if (name == kExperimentNames[i]) return static_cast<Experiment>(i);
  throw ConfigError("config: unknown experiment '" + name + "'");
}

env::ProcessSpec ExperimentConfig::to_process_spec() const {
  std::array<std::int64_t, kMaxDim> per{};
  for (std::size_t i = 0; i < periods.size() && i < kMaxDim; ++i) per[i] = periods[i];
  try {
    if (kind == "bernoulli") return env::ProcessSpec::bernoulli(dimension, p);
    if (kind == "block_factor") {
      const auto r = rule == "all_below" ? env::BlockRule::kAllBelow
                     : rule == "any_below"
                         ? env::BlockRule::kAnyBelow
                         : throw ConfigError("config: unknown block rule '" + rule + "'");
      return env::ProcessSpec::block_factor(dimension, p, m, r);
    }
    if (kind == "periodic") return env::ProcessSpec::periodic(dimension, pattern, per);
    if (kind == "explicit") return env::ProcessSpec::explicit_window(dimension, pattern, per);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: invalid process spec: ") + e.what());
  }
  throw ConfigError("config: unknown process kind '" + kind + "'");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "experiment = " << experiment_name(experiment) << "\n";
  out << "dimension = " << dimension << "\n";
  out << "kind = " << kind << "\n";
  out << "p = " << report::format_double(p) << "\n";
  out << "m = " << m << "\n";
  out << "rule = " << rule << "\n";
  out << "pattern = "
      << join<std::uint8_t>(pattern, ",", +[](std::uint8_t b) {
           return std::string(b ? "1" : "0");
         })
      << "\n";
  out << "periods = "
      << join<std::int64_t>(periods, ",", +[](std::int64_t v) { return report::format_int(v); })
      << "\n";
  out << "condition_on_origin = " << (condition_on_origin ? "true" : "false") << "\n";
  out << "seed = " << seed << "\n";
  // jobs and out are execution details, not experiment identity; they are
  // accepted by the parser but never serialized, so reports are invariant
  // under worker count and output location.
  out << "n_steps = " << n_steps << "\n";
  out << "n_walks = " << n_walks << "\n";
  out << "samples = " << samples << "\n";
  out << "n_envs = " << n_envs << "\n";
  out << "torus_side = " << torus_side << "\n";
  out << "torus_ladder = "
      << join<std::int64_t>(torus_ladder, ",",
                            +[](std::int64_t v) { return report::format_int(v); })
      << "\n";
  out << "direction = "
      << join<double>(direction, ",", +[](double v) { return report::format_double(v); })
      << "\n";
  out << "epsilon = " << report::format_double(epsilon) << "\n";
  out << "lindeberg_epsilon = " << report::format_double(lindeberg_epsilon) << "\n";
  out << "theta = " << report::format_double(theta) << "\n";
  out << "lambda = " << report::format_double(lambda) << "\n";
  out << "rho = " << report::format_double(rho) << "\n";
  out << "delta = " << report::format_double(delta) << "\n";
  out << "L = " << big_l << "\n";
  out << "ell = " << ell << "\n";
  out << "u = " << u << "\n";
  out << "horizon = " << report::format_double(horizon) << "\n";
  out << "t_grid = "
      << join<double>(t_grid, ",", +[](double v) { return report::format_double(v); }) << "\n";
  out << "radii = "
      << join<double>(radii, ",", +[](double v) { return report::format_double(v); }) << "\n";
  {
    std::string s;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i) s += ";";
      for (int c = 0; c < dimension; ++c) {
        if (c) s += ",";
        s += report::format_int(sites[i][c]);
      }
    }
    out << "sites = " << s << "\n";
  }
  out << "event_n = "
      << join<std::int64_t>(event_n, ",", +[](std::int64_t v) { return report::format_int(v); })
      << "\n";
  out << "search_cap = " << search_cap << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "experiment") cfg.experiment = experiment_from_name(value);
    else if (key == "dimension") cfg.dimension = static_cast<int>(parse_int(key, value));
    else if (key == "kind") cfg.kind = value;
    else if (key == "p") cfg.p = parse_double(key, value);
    else if (key == "m") cfg.m = static_cast<int>(parse_int(key, value));
    else if (key == "rule") cfg.rule = value;
    else if (key == "pattern") {
      cfg.pattern.clear();
      for (auto v : parse_int_list(key, value)) {
        if (v != 0 && v != 1) throw ConfigError("config: pattern entries must be 0/1");
        cfg.pattern.push_back(static_cast<std::uint8_t>(v));
      }
    } else if (key == "periods") cfg.periods = parse_int_list(key, value);
    else if (key == "condition_on_origin") cfg.condition_on_origin = parse_bool(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(key, value));
    else if (key == "n_steps") cfg.n_steps = parse_int(key, value);
    else if (key == "n_walks") cfg.n_walks = parse_int(key, value);
    else if (key == "samples") cfg.samples = parse_int(key, value);
    else if (key == "n_envs") cfg.n_envs = parse_int(key, value);
    else if (key == "torus_side") cfg.torus_side = parse_int(key, value);
    else if (key == "torus_ladder") cfg.torus_ladder = parse_int_list(key, value);
    else if (key == "direction") cfg.direction = parse_double_list(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "lindeberg_epsilon") cfg.lindeberg_epsilon = parse_double(key, value);
    else if (key == "theta") cfg.theta = parse_double(key, value);
    else if (key == "lambda") cfg.lambda = parse_double(key, value);
    else if (key == "rho") cfg.rho = parse_double(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "L") cfg.big_l = parse_int(key, value);
    else if (key == "ell") cfg.ell = parse_int(key, value);
    else if (key == "u") cfg.u = parse_int(key, value);
    else if (key == "horizon") cfg.horizon = parse_double(key, value);
    else if (key == "t_grid") cfg.t_grid = parse_double_list(key, value);
    else if (key == "radii") cfg.radii = parse_double_list(key, value);
    else if (key == "sites") cfg.sites = parse_sites(key, value);
    else if (key == "event_n") cfg.event_n = parse_int_list(key, value);
    else if (key == "search_cap") cfg.search_cap = parse_int(key, value);
    else if (key == "out") cfg.out_dir = value;
    else
      throw ConfigError("config: unknown key '" + key + "'");
  }
  if (cfg.dimension < 1 || cfg.dimension > kMaxDim)
    throw ConfigError("config: dimension must be in [1," + std::to_string(kMaxDim) + "]");
  cfg.to_process_spec();  // validates the law, including (A1)
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

}  // namespace rwdpp::config
