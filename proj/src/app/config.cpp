#include "ppfa/app/config.hpp"

#include "ppfa/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ppfa::app {

namespace pt = boost::property_tree;

void SimulateSpec::validate() const
{
  if (n < 1) {
    throw config_error("simulate.n must be at least 1");
  }
  if (m < 1 || r < 1 || s < 1 || r > m) {
    throw config_error("simulate: require 1 <= r <= m and s >= 1");
  }
  if (!(sigma2 > 0.0)) {
    throw config_error("simulate.sigma2 must be positive");
  }
  if (!(max_root > 0.0 && max_root < 1.0)) {
    throw config_error("simulate.max_root must lie in (0, 1)");
  }
  if (beta) {
    if (beta->rows() != s || beta->cols() != r) {
      throw config_error("simulate.beta must hold s*r values");
    }
    for (Index i = 0; i < r; ++i) {
      if (!is_stable(beta->col(i))) {
        throw config_error("simulate.beta: latent " + std::to_string(i) +
                           " is not a stable AR process");
      }
    }
  }
  if (fault) {
    if (fault->start < 0 || fault->end <= fault->start || fault->end > n) {
      throw config_error("simulate.fault_start/fault_end must satisfy 0 <= start < end <= n");
    }
    if (fault->channels.empty()) {
      throw config_error("simulate.fault_channels must list at least one channel");
    }
    for (Index c : fault->channels) {
      if (c < 0 || c >= m) {
        throw config_error("simulate.fault_channels entry out of range");
      }
    }
  }
}

namespace {

std::string trimmed(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw)
{
  const std::string text = trimmed(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw config_error("config: invalid value for '" + key + "': '" + raw + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw config_error("config: invalid value for '" + key + "': '" + raw + "'");
    }
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw)
{
  std::vector<T> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) {
    throw config_error("config: '" + key + "' must list at least one value");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw)
{
  const std::string v = trimmed(raw);
  if (v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    return false;
  }
  throw config_error("config: invalid value for '" + key + "': '" + raw + "'");
}

// Values that need the whole file before they can be placed.
struct ParseState
{
  RunConfig cfg;
  std::optional<FaultSpec> fault;
  std::vector<double> beta_flat;
};

using Setter = std::function<void(ParseState&, const std::string& key, const std::string& value)>;

template <typename T, typename Fn>
Setter number(Fn assign)
{
  return [assign](ParseState& st, const std::string& k, const std::string& v) {
    assign(st.cfg, parse_number<T>(k, v));
  };
}

template <typename T, typename Fn>
Setter fault_number(Fn assign)
{
  return [assign](ParseState& st, const std::string& k, const std::string& v) {
    if (!st.fault) {
      st.fault.emplace();
    }
    assign(*st.fault, parse_number<T>(k, v));
  };
}

const std::map<std::string, Setter>& setters()
{
  static const std::map<std::string, Setter> table = {
    {"em.max_iterations", number<int>([](RunConfig& c, int v) { c.em.max_iterations = v; })},
    {"em.tol", number<double>([](RunConfig& c, double v) { c.em.loglik_rel_tol = v; })},
    {"em.r", number<long>([](RunConfig& c, long v) { c.em.r = v; })},
    {"em.s", number<long>([](RunConfig& c, long v) { c.em.s = v; })},
    {"em.seed", number<std::uint64_t>([](RunConfig& c, std::uint64_t v) { c.em.seed = v; })},
    {"em.update_beta",
     [](ParseState& st, const std::string& k, const std::string& v) {
       st.cfg.em.update_beta = parse_bool(k, v);
     }},
    {"ga.population_size", number<int>([](RunConfig& c, int v) { c.em.ga.population_size = v; })},
    {"ga.generations", number<int>([](RunConfig& c, int v) { c.em.ga.generations = v; })},
    {"ga.crossover_rate", number<double>([](RunConfig& c, double v) { c.em.ga.crossover_rate = v; })},
    {"ga.mutation_rate", number<double>([](RunConfig& c, double v) { c.em.ga.mutation_rate = v; })},
    {"ga.mutation_scale", number<double>([](RunConfig& c, double v) { c.em.ga.mutation_scale = v; })},
    {"ga.lambda", number<double>([](RunConfig& c, double v) { c.em.ga.lambda_penalty = v; })},
    {"ga.elitism_count", number<int>([](RunConfig& c, int v) { c.em.ga.elitism_count = v; })},
    {"ga.tournament_size", number<int>([](RunConfig& c, int v) { c.em.ga.tournament_size = v; })},
    {"ga.seed", number<std::uint64_t>([](RunConfig& c, std::uint64_t v) { c.em.ga.seed = v; })},
    {"ga.box_lo", number<double>([](RunConfig& c, double v) { c.em.ga.box_lo = v; })},
    {"ga.box_hi", number<double>([](RunConfig& c, double v) { c.em.ga.box_hi = v; })},
    {"monitor.alpha", number<double>([](RunConfig& c, double v) { c.alpha = v; })},
    {"select.r_candidates",
     [](ParseState& st, const std::string& k, const std::string& v) {
       const auto list = parse_list<long>(k, v);
       st.cfg.grid.r_candidates.assign(list.begin(), list.end());
     }},
    {"select.s_candidates",
     [](ParseState& st, const std::string& k, const std::string& v) {
       const auto list = parse_list<long>(k, v);
       st.cfg.grid.s_candidates.assign(list.begin(), list.end());
     }},
    {"select.magnitudes",
     [](ParseState& st, const std::string& k, const std::string& v) {
       st.cfg.grid.injection.magnitudes = parse_list<double>(k, v);
     }},
    {"select.onset_fraction",
     number<double>([](RunConfig& c, double v) { c.grid.injection.onset_fraction = v; })},
    {"select.split_fraction", number<double>([](RunConfig& c, double v) { c.grid.split_fraction = v; })},
    {"select.seed",
     number<std::uint64_t>([](RunConfig& c, std::uint64_t v) { c.grid.injection.seed = v; })},
    {"simulate.n", number<long>([](RunConfig& c, long v) { c.simulate.n = v; })},
    {"simulate.m", number<long>([](RunConfig& c, long v) { c.simulate.m = v; })},
    {"simulate.r", number<long>([](RunConfig& c, long v) { c.simulate.r = v; })},
    {"simulate.s", number<long>([](RunConfig& c, long v) { c.simulate.s = v; })},
    {"simulate.sigma2", number<double>([](RunConfig& c, double v) { c.simulate.sigma2 = v; })},
    {"simulate.max_root", number<double>([](RunConfig& c, double v) { c.simulate.max_root = v; })},
    {"simulate.seed", number<std::uint64_t>([](RunConfig& c, std::uint64_t v) { c.simulate.seed = v; })},
    {"simulate.beta",
     [](ParseState& st, const std::string& k, const std::string& v) {
       st.beta_flat = parse_list<double>(k, v);
     }},
    {"simulate.fault_start", fault_number<long>([](FaultSpec& f, long v) { f.start = v; })},
    {"simulate.fault_end", fault_number<long>([](FaultSpec& f, long v) { f.end = v; })},
    {"simulate.fault_channels",
     [](ParseState& st, const std::string& k, const std::string& v) {
       const auto list = parse_list<long>(k, v);
       if (!st.fault) {
         st.fault.emplace();
       }
       st.fault->channels.assign(list.begin(), list.end());
     }},
    {"simulate.fault_magnitude", fault_number<double>([](FaultSpec& f, double v) { f.magnitude = v; })},
  };
  return table;
}

} // namespace

RunConfig parse_config(const std::string& text)
{
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("config: ") + e.what());
  }

  ParseState st;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw config_error("config: key '" + section + "' must appear inside a section");
    }
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      const auto it = setters().find(key);
      if (it == setters().end()) {
        throw config_error("config: unknown key '" + key + "'");
      }
      it->second(st, key, value.data());
    }
  }

  RunConfig& cfg = st.cfg;
  cfg.simulate.fault = st.fault;
  if (!st.beta_flat.empty()) {
    const Index s = cfg.simulate.s;
    const Index r = cfg.simulate.r;
    if (static_cast<Index>(st.beta_flat.size()) != s * r) {
      throw config_error("config: 'simulate.beta' must hold s*r = " + std::to_string(s * r) +
                         " values (lag-major)");
    }
    Eigen::MatrixXd b(s, r);
    for (Index j = 0; j < s; ++j) {
      for (Index i = 0; i < r; ++i) {
        b(j, i) = st.beta_flat[static_cast<std::size_t>(j * r + i)];
      }
    }
    cfg.simulate.beta = b;
  }

  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw config_error("config: 'monitor.alpha' must lie in (0, 1)");
  }
  cfg.em.validate(0);
  cfg.grid.validate();
  cfg.simulate.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open config '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

} // namespace ppfa::app
