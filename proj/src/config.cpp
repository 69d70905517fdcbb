#include "chdyn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "chdyn/experiments.hpp"

namespace chdyn {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"type", "order", "epsilon", "delta", "sigma", "kappa"}},
      {"discretization",
       {"cells", "boundary_factor", "tau", "final_time", "ell", "initial", "initial_frequency",
        "initial_value"}},
      {"solver", {"abs_tol", "rel_tol", "max_iters", "damping"}},
      {"output", {"dir", "snapshots", "mesh"}},
      {"sweep",
       {"taus", "ells", "boundary_factors", "reference_tau", "reference_factor", "threads"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  T get(const std::string& key, T fallback) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return fallback;
    return convert<T>(key, node->data());
  }

  template <class T>
  T require(const std::string& key) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) throw ConfigError(key, "missing required key '" + key + "'");
    return convert<T>(key, node->data());
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return fallback;
    std::vector<T> out;
    std::stringstream ss(node->data());
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(convert<T>(key, item.substr(b, item.find_last_not_of(" \t") - b + 1)));
    }
    return out;
  }

 private:
  template <class T>
  static T convert(const std::string& key, const std::string& text) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw ConfigError(key, "invalid boolean for '" + key + "': " + text);
    } else {
      std::istringstream is(text);
      T value{};
      is >> value;
      if (is.fail() || !(is >> std::ws).eof()) {
        throw ConfigError(key, "invalid value for '" + key + "': " + text);
      }
      return value;
    }
  }

  const pt::ptree& tree_;
};

}  // namespace

std::function<double(Point)> RunConfig::initial_condition() const {
  if (initial == "cosine") return cosine_product(initial_frequency);
  if (initial == "constant") {
    const double c = initial_value;
    return [c](Point) { return c; };
  }
  throw ConfigError("discretization.initial", "unknown initial condition '" + initial + "'");
}

RunConfig parse_run_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) {
      throw ConfigError(section, "unknown section or top-level key '" + section + "'");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError(section + "." + key, "unknown key '" + section + "." + key + "'");
      }
    }
  }

  const Reader r(tree);
  RunConfig c;
  try {
    c.model.model = parse_model(r.require<std::string>("model.type"));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("model.type", e.what());
  }
  try {
    c.model.order = parse_order(r.get<std::string>("model.order", "first"));
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError("model.order", e.what());
  }
  c.model.epsilon = r.get("model.epsilon", c.model.epsilon);
  c.model.delta = r.get("model.delta", c.model.delta);
  c.model.sigma = r.get("model.sigma", c.model.sigma);
  c.model.kappa = r.get("model.kappa", c.model.kappa);

  c.cells = r.require<int>("discretization.cells");
  c.boundary_factor = r.get("discretization.boundary_factor", c.boundary_factor);
  c.model.tau = r.require<double>("discretization.tau");
  c.model.final_time = r.require<double>("discretization.final_time");
  c.model.ell = r.get("discretization.ell", c.model.ell);
  c.initial = r.get<std::string>("discretization.initial", c.initial);
  c.initial_frequency = r.get("discretization.initial_frequency", c.initial_frequency);
  c.initial_value = r.get("discretization.initial_value", c.initial_value);

  c.newton.abs_tol = r.get("solver.abs_tol", c.newton.abs_tol);
  c.newton.rel_tol = r.get("solver.rel_tol", c.newton.rel_tol);
  c.newton.max_iters = r.get("solver.max_iters", c.newton.max_iters);
  c.newton.damping = r.get("solver.damping", c.newton.damping);

  c.output_dir = r.get<std::string>("output.dir", c.output_dir.string());
  c.snapshot_steps = r.list<int>("output.snapshots", {});
  c.write_mesh = r.get("output.mesh", c.write_mesh);

  c.sweep.taus = r.list<double>("sweep.taus", {});
  c.sweep.ells = r.list<int>("sweep.ells", c.sweep.ells);
  c.sweep.boundary_factors = r.list<int>("sweep.boundary_factors", c.sweep.boundary_factors);
  c.sweep.reference_tau = r.get("sweep.reference_tau", c.sweep.reference_tau);
  c.sweep.reference_factor = r.get("sweep.reference_factor", c.sweep.reference_factor);
  c.threads = r.get("sweep.threads", c.threads);

  // Parameter-level validation, reported against the offending key.
  auto check = [](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, "invalid value for '" + key + "': " + msg);
  };
  check(c.cells >= 1, "discretization.cells", "must be >= 1");
  check(c.boundary_factor >= 1, "discretization.boundary_factor", "must be >= 1");
  check(c.model.ell >= 1, "discretization.ell", "must be >= 1");
  check(!(c.model.ell > 1 && c.model.order == SchemeOrder::SecondCN), "discretization.ell",
        "ell > 1 is restricted to the first-order scheme");
  check(!(c.model.ell > 1 && c.model.model != Model::AllenCahn && c.model.model != Model::LiuWu),
        "discretization.ell", "ell > 1 requires allen_cahn or liu_wu");
  check(c.threads >= 1, "sweep.threads", "must be >= 1");
  try {
    c.model.validate();
    (void)c.model.num_steps();
  } catch (const InvalidArgument& e) {
    throw ConfigError("model", e.what());
  }
  try {
    c.newton.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("solver", e.what());
  }
  (void)c.initial_condition();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  return parse_run_config(in);
}

}  // namespace chdyn
