#include "hambif/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "hambif/error.hpp"

namespace hambif {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kSections = {"system", "params", "polynomial", "symmetry",
                                         "analysis", "branch", "output", "run"};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"system", {"preset", "guess"}},
    {"polynomial", {"half_dim", "terms", "radial_c"}},
    {"symmetry", {"generators"}},
    {"analysis", {"kmax", "j0", "minimal_only", "criteria"}},
    {"branch", {"steps", "s0", "growth", "modes", "tol", "candidate"}},
    {"output", {"format", "path"}},
    {"run", {"seed"}},
};

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::ConfigParse, message); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(fmt::format("{}: '{}' is not a number", what, text));
  }
  if (used != text.size()) fail(fmt::format("{}: '{}' is not a number", what, text));
  if (!std::isfinite(v)) fail(fmt::format("{}: '{}' is not finite", what, text));
  return v;
}

long long to_integer(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    fail(fmt::format("{}: '{}' is not an integer", what, text));
  }
  if (used != text.size()) fail(fmt::format("{}: '{}' is not an integer", what, text));
  return v;
}

bool to_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(fmt::format("{}: '{}' is not a boolean", what, text));
}

std::vector<double> to_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item, what));
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_doubles(const double* data, Eigen::Index n) {
  std::string out;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out += ", ";
    out += num(data[i]);
  }
  return out;
}

// "c: e1, e2, ... | c: ..."
std::vector<Monomial> parse_terms(const std::string& text, int dim) {
  std::vector<Monomial> terms;
  for (const auto& chunk : split(text, '|')) {
    const auto colon = chunk.find(':');
    if (colon == std::string::npos) fail(fmt::format("polynomial term '{}' lacks ':'", chunk));
    Monomial m;
    m.coefficient = to_double(trim(chunk.substr(0, colon)), "polynomial coefficient");
    for (const auto& e : split(trim(chunk.substr(colon + 1)), ',')) {
      const long long v = to_integer(e, "polynomial exponent");
      if (v < 0) fail("polynomial exponents must be non-negative");
      m.exponents.push_back(static_cast<int>(v));
    }
    if (static_cast<int>(m.exponents.size()) != dim) {
      fail(fmt::format("polynomial term '{}' needs {} exponents", chunk, dim));
    }
    terms.push_back(std::move(m));
  }
  return terms;
}

// Matrices separated by '|', entries row-major separated by ','.
std::vector<Matrix> parse_generators(const std::string& text) {
  std::vector<Matrix> out;
  for (const auto& chunk : split(text, '|')) {
    const auto values = to_doubles(chunk, "generator entry");
    const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(values.size()))));
    if (n * n != static_cast<Eigen::Index>(values.size()) || n % 2 != 0) {
      fail(fmt::format("generator with {} entries is not a square matrix of even size", values.size()));
    }
    Matrix x(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) x(r, c) = values[static_cast<std::size_t>(r * n + c)];
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& section, const std::string& key) {
  const auto sec = tree.get_child_optional(section);
  if (!sec) return std::nullopt;
  const auto v = sec->get_optional<std::string>(key);
  if (!v) return std::nullopt;
  return trim(*v);
}

int ipow_exponent_count(const Monomial& m) {
  int n = 0;
  for (int e : m.exponents) n += e > 0;
  return n;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Text: return "text";
    case OutputFormat::JsonLines: return "json-lines";
    case OutputFormat::Csv: return "csv";
  }
  return "text";
}

OutputFormat output_format_from_string(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "json-lines") return OutputFormat::JsonLines;
  if (name == "csv") return OutputFormat::Csv;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown output format '{}'", name));
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(e.what());
  }
  for (const auto& [section, body] : tree) {
    if (kSections.count(section) == 0) fail(fmt::format("unknown section [{}]", section));
    if (body.empty() && !body.data().empty()) fail(fmt::format("key '{}' outside any section", section));
    const auto known = kKeys.find(section);
    if (known == kKeys.end()) continue;  // [params] accepts any key
    for (const auto& [key, value] : body) {
      if (known->second.count(key) == 0) fail(fmt::format("unknown key '{}' in [{}]", key, section));
    }
  }

  RunConfig c;
  if (auto v = get(tree, "system", "preset")) c.preset = *v;
  if (auto sec = tree.get_child_optional("params")) {
    for (const auto& [key, value] : *sec) c.params[key] = to_double(trim(value.data()), "parameter " + key);
  }
  if (tree.get_child_optional("polynomial")) {
    PolynomialSpec spec;
    const auto n = get(tree, "polynomial", "half_dim");
    if (!n) fail("[polynomial] needs half_dim");
    spec.half_dim = static_cast<int>(to_integer(*n, "half_dim"));
    if (spec.half_dim < 1) fail("half_dim must be >= 1");
    if (auto t = get(tree, "polynomial", "terms"); t && !t->empty()) spec.terms = parse_terms(*t, 2 * spec.half_dim);
    if (auto r = get(tree, "polynomial", "radial_c")) spec.radial_c = to_double(*r, "radial_c");
    c.polynomial = std::move(spec);
  }
  if (auto v = get(tree, "system", "guess"); v && !v->empty()) {
    const auto values = to_doubles(*v, "guess");
    c.guess = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (auto v = get(tree, "symmetry", "generators"); v && !v->empty()) c.generators = parse_generators(*v);

  if (auto v = get(tree, "analysis", "kmax")) c.k_max = static_cast<int>(to_integer(*v, "kmax"));
  if (auto v = get(tree, "analysis", "j0")) c.j0 = static_cast<int>(to_integer(*v, "j0"));
  if (auto v = get(tree, "analysis", "minimal_only")) c.minimal_only = to_bool(*v, "minimal_only");
  if (auto v = get(tree, "analysis", "criteria")) {
    c.criteria.clear();
    for (const auto& name : split(*v, ',')) {
      if (name.empty()) continue;
      const auto crit = criterion_from_string(name);
      if (!crit) fail(fmt::format("unknown criterion '{}'", name));
      c.criteria.insert(*crit);
    }
  }
  if (auto v = get(tree, "branch", "steps")) c.steps = static_cast<int>(to_integer(*v, "steps"));
  if (auto v = get(tree, "branch", "s0")) c.s0 = to_double(*v, "s0");
  if (auto v = get(tree, "branch", "growth")) c.growth = to_double(*v, "growth");
  if (auto v = get(tree, "branch", "modes")) c.modes = static_cast<int>(to_integer(*v, "modes"));
  if (auto v = get(tree, "branch", "tol")) c.tolerance = to_double(*v, "tol");
  if (auto v = get(tree, "branch", "candidate")) c.candidate = static_cast<int>(to_integer(*v, "candidate"));
  if (auto v = get(tree, "output", "format")) {
    try {
      c.format = output_format_from_string(*v);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (auto v = get(tree, "output", "path")) c.output_path = *v;
  if (auto v = get(tree, "run", "seed")) {
    std::size_t used = 0;
    try {
      if (!v->empty() && (*v)[0] != '-') c.seed = std::stoull(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (v->empty() || used != v->size()) fail(fmt::format("seed: '{}' is not a non-negative integer", *v));
  }

  if (c.k_max < 1) fail("kmax must be >= 1");
  if (c.j0 && *c.j0 < 1) fail("j0 is 1-based");
  if (c.steps < 1) fail("steps must be >= 1");
  if (!(c.s0 > 0.0)) fail("s0 must be positive");
  if (!(c.growth > 1.0)) fail("growth must exceed 1");
  if (c.modes < 1) fail("modes must be >= 1");
  if (c.tolerance < 0.0) fail("tol must be non-negative");
  if (c.candidate && *c.candidate < 1) fail("candidate is 1-based");
  validate(c);
  return c;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(fmt::format("cannot open '{}'", path));
  return parse_config(in);
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };

  out += "[system]\n";
  if (c.preset) line("preset", *c.preset);
  if (c.guess) line("guess", join_doubles(c.guess->data(), c.guess->size()));
  if (!c.params.empty()) {
    out += "\n[params]\n";
    for (const auto& [k, v] : c.params) line(k, num(v));
  }
  if (c.polynomial) {
    const auto& p = *c.polynomial;
    out += "\n[polynomial]\n";
    line("half_dim", std::to_string(p.half_dim));
    std::string terms;
    for (std::size_t i = 0; i < p.terms.size(); ++i) {
      if (i) terms += " | ";
      terms += num(p.terms[i].coefficient) + ":";
      for (std::size_t k = 0; k < p.terms[i].exponents.size(); ++k) {
        terms += (k ? "," : "") + std::to_string(p.terms[i].exponents[k]);
      }
    }
    line("terms", terms);
    if (p.radial_c) line("radial_c", num(*p.radial_c));
  }
  if (!c.generators.empty()) {
    out += "\n[symmetry]\n";
    std::string gens;
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const Matrix rowmajor = c.generators[g].transpose();
      if (g) gens += " | ";
      gens += join_doubles(rowmajor.data(), rowmajor.size());
    }
    line("generators", gens);
  }
  out += "\n[analysis]\n";
  line("kmax", std::to_string(c.k_max));
  if (c.j0) line("j0", std::to_string(*c.j0));
  line("minimal_only", c.minimal_only ? "true" : "false");
  std::string crit;
  for (const auto k : c.criteria) {
    if (!crit.empty()) crit += ", ";
    crit += std::string(to_string(k));
  }
  line("criteria", crit);
  out += "\n[branch]\n";
  line("steps", std::to_string(c.steps));
  line("s0", num(c.s0));
  line("growth", num(c.growth));
  line("modes", std::to_string(c.modes));
  line("tol", num(c.tolerance));
  if (c.candidate) line("candidate", std::to_string(*c.candidate));
  out += "\n[output]\n";
  line("format", std::string(to_string(c.format)));
  if (!c.output_path.empty()) line("path", c.output_path);
  out += "\n[run]\n";
  line("seed", std::to_string(c.seed));
  return out;
}

bool equivalent(const RunConfig& a, const RunConfig& b) {
  auto same_vec = [](const std::optional<Vector>& x, const std::optional<Vector>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->size() == y->size() && *x == *y);
  };
  auto same_poly = [](const std::optional<PolynomialSpec>& x, const std::optional<PolynomialSpec>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    if (x->half_dim != y->half_dim || x->radial_c != y->radial_c || x->terms.size() != y->terms.size()) return false;
    for (std::size_t i = 0; i < x->terms.size(); ++i) {
      if (x->terms[i].coefficient != y->terms[i].coefficient || x->terms[i].exponents != y->terms[i].exponents) {
        return false;
      }
    }
    return true;
  };
  if (a.generators.size() != b.generators.size()) return false;
  for (std::size_t g = 0; g < a.generators.size(); ++g) {
    if (a.generators[g].rows() != b.generators[g].rows() || a.generators[g] != b.generators[g]) return false;
  }
  return a.preset == b.preset && a.params == b.params && same_poly(a.polynomial, b.polynomial) &&
         same_vec(a.guess, b.guess) && a.k_max == b.k_max && a.j0 == b.j0 && a.minimal_only == b.minimal_only &&
         a.criteria == b.criteria && a.steps == b.steps && a.s0 == b.s0 && a.growth == b.growth &&
         a.modes == b.modes && a.tolerance == b.tolerance && a.candidate == b.candidate && a.format == b.format &&
         a.output_path == b.output_path && a.seed == b.seed;
}

void validate(const RunConfig& config) {
  if (config.preset.has_value() == config.polynomial.has_value()) {
    fail("exactly one of [system] preset and [polynomial] must be given");
  }
  if (config.polynomial) {
    const auto& p = *config.polynomial;
    if (p.radial_c && p.half_dim != 3) fail("radial_c requires half_dim = 3");
    if (p.terms.empty() && !p.radial_c) fail("polynomial has no terms");
  }
  const int dim = config.polynomial ? 2 * config.polynomial->half_dim : -1;
  for (const auto& g : config.generators) {
    if (dim > 0 && g.rows() != dim) fail(fmt::format("generator size {} does not match dimension {}", g.rows(), dim));
  }
  if (dim > 0 && config.guess && config.guess->size() != dim) fail("guess has the wrong dimension");
}

HamiltonianSystem polynomial_system(const PolynomialSpec& spec) {
  const int dim = 2 * spec.half_dim;
  for (const auto& m : spec.terms) {
    if (static_cast<int>(m.exponents.size()) != dim) {
      throw Error(ErrorCode::InvalidArgument, "monomial exponent count does not match the dimension");
    }
  }
  if (spec.radial_c && spec.half_dim != 3) throw Error(ErrorCode::InvalidArgument, "radial term needs N = 3");
  const auto terms = spec.terms;
  const auto radial = spec.radial_c;

  HamiltonianSystem sys;
  sys.half_dim = spec.half_dim;
  sys.name = "polynomial";
  sys.energy = [terms, radial](const Vector& z) {
    double h = 0.0;
    for (const auto& m : terms) {
      double t = m.coefficient;
      for (std::size_t i = 0; i < m.exponents.size(); ++i) t *= ipow(z[static_cast<Eigen::Index>(i)], m.exponents[i]);
      h += t;
    }
    if (radial) h += oblate_potential(z.head<3>(), *radial);
    return h;
  };
  sys.gradient = [terms, radial, dim](const Vector& z) {
    Vector g = Vector::Zero(dim);
    for (const auto& m : terms) {
      if (ipow_exponent_count(m) == 0) continue;
      for (int i = 0; i < dim; ++i) {
        if (m.exponents[i] == 0) continue;
        double t = m.coefficient * m.exponents[i] * ipow(z[i], m.exponents[i] - 1);
        for (int k = 0; k < dim; ++k) {
          if (k != i) t *= ipow(z[k], m.exponents[k]);
        }
        g[i] += t;
      }
    }
    if (radial) g.head<3>() += oblate_gradient(z.head<3>(), *radial);
    return g;
  };
  sys.hessian = [terms, radial, dim](const Vector& z) {
    Matrix h = Matrix::Zero(dim, dim);
    for (const auto& m : terms) {
      for (int i = 0; i < dim; ++i) {
        if (m.exponents[i] == 0) continue;
        for (int j = i; j < dim; ++j) {
          if (m.exponents[j] == 0 || (i == j && m.exponents[i] < 2)) continue;
          double t = m.coefficient;
          for (int k = 0; k < dim; ++k) {
            int e = m.exponents[k];
            if (k == i && k == j) {
              t *= e * (e - 1) * ipow(z[k], e - 2);
            } else if (k == i || k == j) {
              t *= e * ipow(z[k], e - 1);
            } else {
              t *= ipow(z[k], e);
            }
          }
          h(i, j) += t;
          if (i != j) h(j, i) += t;
        }
      }
    }
    if (radial) h.topLeftCorner<3, 3>() += oblate_hessian(z.head<3>(), *radial);
    return h;
  };
  sys.probe_center = Vector::Zero(dim);
  if (radial) {
    sys.probe_center[0] = 1.0;
    sys.probe_spread = 0.1;
  }
  return sys;
}

HamiltonianSystem build_system(const RunConfig& config) {
  validate(config);
  HamiltonianSystem sys = config.preset ? preset(*config.preset, config.params) : polynomial_system(*config.polynomial);
  if (!config.generators.empty()) {
    for (const auto& g : config.generators) {
      if (g.rows() != sys.dim()) {
        throw Error(ErrorCode::ConfigParse,
                    fmt::format("generator size {} does not match dimension {}", g.rows(), sys.dim()));
      }
    }
    sys.symmetry.generators = config.generators;
  }
  return sys;
}

Vector build_guess(const RunConfig& config) {
  if (config.guess) return *config.guess;
  if (config.preset) return preset_guess(*config.preset, config.params);
  Vector z = Vector::Zero(2 * config.polynomial->half_dim);
  if (config.polynomial->radial_c) z[0] = 1.0;
  return z;
}

AnalysisOptions analysis_options(const RunConfig& config) {
  AnalysisOptions o;
  o.k_max = config.k_max;
  o.j0 = config.j0;
  o.minimal_only = config.minimal_only;
  o.criteria = config.criteria;
  o.seed = config.seed;
  return o;
}

}  // namespace hambif
