#include "odecert/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "odecert/catalog.hpp"
#include "odecert/residual.hpp"

namespace odecert {

double ConfigValue::as_number(const std::string& key) const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("config key '" + key + "' must be a number");
}

int ConfigValue::as_int(const std::string& key) const {
  const double d = as_number(key);
  if (d != std::floor(d)) throw ConfigError("config key '" + key + "' must be an integer");
  return static_cast<int>(d);
}

bool ConfigValue::as_bool(const std::string& key) const {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError("config key '" + key + "' must be a boolean");
}

const std::string& ConfigValue::as_string(const std::string& key) const {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("config key '" + key + "' must be a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array(const std::string& key) const {
  if (const auto* a = std::get_if<std::vector<ConfigValue>>(&v)) return *a;
  throw ConfigError("config key '" + key + "' must be an array");
}

namespace {

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  void skip_ws_inline() {
    while (!eof() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + msg);
  }
};

ConfigValue parse_value(Cursor& c);

ConfigValue parse_array(Cursor& c) {
  // c.peek() == '['
  ++c.pos;
  std::vector<ConfigValue> items;
  for (;;) {
    c.skip_ws_inline();
    if (c.eof()) c.fail("unterminated array");
    if (c.peek() == '\n') {  // allow multi-line arrays
      ++c.line;
      ++c.pos;
      continue;
    }
    if (c.peek() == ']') {
      ++c.pos;
      break;
    }
    items.push_back(parse_value(c));
    c.skip_ws_inline();
    while (!c.eof() && c.peek() == '\n') {
      ++c.line;
      ++c.pos;
      c.skip_ws_inline();
    }
    if (!c.eof() && c.peek() == ',') {
      ++c.pos;
      continue;
    }
    if (!c.eof() && c.peek() == ']') {
      ++c.pos;
      break;
    }
    c.fail("expected ',' or ']' in array");
  }
  return ConfigValue{std::move(items)};
}

ConfigValue parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) c.fail("expected a value");
  const char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    ++c.pos;
    std::string out;
    while (!c.eof() && c.peek() != '"') {
      if (c.peek() == '\n') c.fail("unterminated string");
      out += c.s[c.pos++];
    }
    if (c.eof()) c.fail("unterminated string");
    ++c.pos;
    return ConfigValue{std::move(out)};
  }
  // bare word: true/false or a number
  size_t start = c.pos;
  while (!c.eof() && c.peek() != ',' && c.peek() != ']' && c.peek() != '\n' && c.peek() != '#' &&
         c.peek() != ' ' && c.peek() != '\t') {
    ++c.pos;
  }
  std::string word = c.s.substr(start, c.pos - start);
  if (word == "true") return ConfigValue{true};
  if (word == "false") return ConfigValue{false};
  try {
    size_t used = 0;
    const double d = std::stod(word, &used);
    if (used != word.size()) throw std::invalid_argument(word);
    return ConfigValue{d};
  } catch (const std::exception&) {
    c.fail("cannot parse value '" + word + "'");
  }
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  Cursor c{text};
  std::string section;
  while (!c.eof()) {
    c.skip_ws_inline();
    if (c.eof()) break;
    const char ch = c.peek();
    if (ch == '\n') {
      ++c.line;
      ++c.pos;
      continue;
    }
    if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') ++c.pos;
      continue;
    }
    if (ch == '[') {
      ++c.pos;
      size_t start = c.pos;
      while (!c.eof() && c.peek() != ']' && c.peek() != '\n') ++c.pos;
      if (c.eof() || c.peek() != ']') c.fail("unterminated section header");
      section = text.substr(start, c.pos - start);
      ++c.pos;
      continue;
    }
    // key = value
    size_t start = c.pos;
    while (!c.eof() && c.peek() != '=' && c.peek() != '\n') ++c.pos;
    if (c.eof() || c.peek() != '=') c.fail("expected 'key = value'");
    std::string key = text.substr(start, c.pos - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty()) c.fail("empty key");
    ++c.pos;  // '='
    ConfigValue value = parse_value(c);
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '#') {
      while (!c.eof() && c.peek() != '\n') ++c.pos;
    }
    const std::string dotted = section.empty() ? key : section + "." + key;
    cfg.values_[dotted] = std::move(value);
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& dotted_key) const { return values_.count(dotted_key) > 0; }

const ConfigValue& ConfigFile::get(const std::string& dotted_key) const {
  auto it = values_.find(dotted_key);
  if (it == values_.end()) throw ConfigError("missing config key '" + dotted_key + "'");
  return it->second;
}

std::vector<std::string> ConfigFile::keys_in(const std::string& section) const {
  std::vector<std::string> out;
  const std::string prefix = section + ".";
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
  }
  return out;
}

namespace {

Complex complex_from(const ConfigValue& v, const std::string& key) {
  const auto& arr = v.as_array(key);
  if (arr.size() != 2) throw ConfigError("config key '" + key + "' must be [re, im]");
  return Complex{arr[0].as_number(key), arr[1].as_number(key)};
}

ComplexRoot root_from(const ConfigValue& v, const std::string& key) {
  const auto& arr = v.as_array(key);
  if (arr.size() != 2) throw ConfigError("config key '" + key + "' must be [lambda, omega]");
  return ComplexRoot{arr[0].as_number(key), arr[1].as_number(key)};
}

Interval interval_from(const ConfigValue& v, const std::string& key) {
  const auto& arr = v.as_array(key);
  if (arr.size() != 2) throw ConfigError("config key '" + key + "' must be [t0, t1]");
  Interval iv{arr[0].as_number(key), arr[1].as_number(key)};
  validate(iv);
  return iv;
}

VectorFn wrap_scalar(const ScalarFn& fn) {
  return [fn](const Jet& t) { return std::vector<Jet>{fn(t)}; };
}

}  // namespace

LoadedCase case_config_from_text(const std::string& text) {
  const ConfigFile cfg = ConfigFile::parse(text);
  auto& cat = Catalog::instance();

  LoadedCase loaded;
  ManufacturedCase& mcase = loaded.mcase;
  OdeProblem& problem = mcase.problem;

  mcase.name = cfg.has("problem.name") ? cfg.get("problem.name").as_string("problem.name")
                                       : std::string("config-case");
  problem.domain = interval_from(cfg.get("problem.domain"), "problem.domain");
  if (cfg.has("problem.complex_state")) {
    problem.complex_state = cfg.get("problem.complex_state").as_bool("problem.complex_state");
  }

  const std::string variant = cfg.get("problem.variant").as_string("problem.variant");
  int modal_dim = 0;
  if (variant == "first_order") {
    FirstOrderConstant fo;
    fo.root = root_from(cfg.get("problem.root"), "problem.root");
    fo.u0 = complex_from(cfg.get("problem.u0"), "problem.u0");
    problem.kind = fo;
  } else if (variant == "higher_order") {
    std::vector<ComplexRoot> roots;
    for (const auto& r : cfg.get("problem.roots").as_array("problem.roots")) {
      roots.push_back(root_from(r, "problem.roots"));
    }
    std::vector<Complex> ics;
    for (const auto& ic : cfg.get("problem.ics").as_array("problem.ics")) {
      ics.push_back(complex_from(ic, "problem.ics"));
    }
    problem.kind = make_higher_order(std::move(roots), std::move(ics));
  } else if (variant == "nonconstant") {
    NonconstantFirstOrder nc;
    nc.p = cat.scalar(cfg.get("problem.p").as_string("problem.p"));
    if (cfg.has("problem.q")) nc.q = cat.scalar(cfg.get("problem.q").as_string("problem.q"));
    if (cfg.has("problem.P")) {
      nc.p_antideriv = cat.scalar(cfg.get("problem.P").as_string("problem.P"));
    }
    nc.u0 = complex_from(cfg.get("problem.u0"), "problem.u0");
    problem.kind = std::move(nc);
  } else if (variant == "system") {
    std::vector<JordanBlockSpec> blocks;
    int dim = 0;
    for (const auto& b : cfg.get("problem.blocks").as_array("problem.blocks")) {
      const auto& arr = b.as_array("problem.blocks");
      if (arr.size() != 3) throw ConfigError("blocks entries must be [lambda, omega, size]");
      JordanBlockSpec spec{ComplexRoot{arr[0].as_number("blocks"), arr[1].as_number("blocks")},
                           arr[2].as_int("blocks")};
      dim += spec.size;
      blocks.push_back(spec);
    }
    modal_dim = dim;
    const std::string modal_kind =
        cfg.has("problem.modal") ? cfg.get("problem.modal").as_string("problem.modal")
                                 : std::string("identity");
    Matrix modal;
    if (modal_kind == "identity") {
      modal = Matrix::identity(dim);
    } else if (modal_kind == "random_orthogonal") {
      const int seed = cfg.has("problem.modal_seed")
                           ? cfg.get("problem.modal_seed").as_int("problem.modal_seed")
                           : 42;
      modal = random_orthogonal(dim, static_cast<unsigned>(seed));
    } else {
      throw ConfigError("problem.modal must be 'identity' or 'random_orthogonal'");
    }
    std::vector<Complex> u0;
    if (cfg.has("problem.u0") &&
        std::holds_alternative<std::string>(cfg.get("problem.u0").v)) {
      if (cfg.get("problem.u0").as_string("problem.u0") != "modal_ones") {
        throw ConfigError("string u0 must be 'modal_ones'");
      }
      u0 = modal * std::vector<Complex>(dim, Complex{1.0, 0.0});
    } else {
      for (const auto& e : cfg.get("problem.u0").as_array("problem.u0")) {
        u0.push_back(complex_from(e, "problem.u0"));
      }
    }
    NormP p = NormP::Two;
    if (cfg.has("problem.norm_p")) {
      p = norm_p_from_string(cfg.get("problem.norm_p").as_string("problem.norm_p"));
    }
    LinearSystem sys = make_linear_system(modal, std::move(blocks), std::move(u0), p);
    // exact solutions for systems are given in the modal frame; capture M.
    if (cfg.has("problem.exact")) {
      std::vector<double> m_re(static_cast<size_t>(dim) * dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          if (sys.modal(i, j).imag() != 0.0) {
            throw ConfigError("modal-frame exact solutions need a real modal matrix");
          }
          m_re[static_cast<size_t>(i) * dim + j] = sys.modal(i, j).real();
        }
      int fn_dim = 0;
      VectorFn modal_exact =
          cat.vector(cfg.get("problem.exact").as_string("problem.exact"), &fn_dim);
      if (fn_dim != dim) throw ConfigError("exact solution dimension mismatch");
      mcase.exact = [m_re, modal_exact, dim](const Jet& t) {
        const std::vector<Jet> v = modal_exact(t);
        std::vector<Jet> u(dim, Jet(t.order()));
        for (int i = 0; i < dim; ++i) {
          Jet acc(t.order());
          for (int j = 0; j < dim; ++j) acc += m_re[static_cast<size_t>(i) * dim + j] * v[j];
          u[i] = acc;
        }
        return u;
      };
    }
    problem.kind = std::move(sys);
  } else {
    throw ConfigError("unknown problem.variant '" + variant + "'");
  }

  // Exact solution (scalar classes) and forcing resolution. When an exact
  // solution is known the forcing is always derived from it.
  if (variant != "system" && cfg.has("problem.exact")) {
    mcase.exact = wrap_scalar(cat.scalar(cfg.get("problem.exact").as_string("problem.exact")));
  }
  loaded.has_exact = static_cast<bool>(mcase.exact);
  if (loaded.has_exact) {
    auto skeleton = std::make_shared<OdeProblem>(problem);
    const VectorFn exact = mcase.exact;
    problem.forcing = [skeleton, exact](double t, std::span<Complex> out) {
      const std::vector<Jet> jets = exact(Jet::variable(t, skeleton->operator_order()));
      apply_operator(*skeleton, t, jets, out);
    };
  } else {
    if (!cfg.has("problem.forcing")) {
      throw ConfigError("config needs problem.exact or problem.forcing");
    }
    if (variant == "system") {
      throw ConfigError("system configs require problem.exact (modal frame)");
    }
    (void)modal_dim;
    const ScalarFn f = cat.scalar(cfg.get("problem.forcing").as_string("problem.forcing"));
    problem.forcing = [f](double t, std::span<Complex> out) {
      out[0] = Complex{f(Jet::variable(t, 0)).value(), 0.0};
    };
  }

  // Training hints.
  mcase.hints.sample_domain = problem.domain;
  if (cfg.has("train.sample_domain")) {
    mcase.hints.sample_domain = interval_from(cfg.get("train.sample_domain"), "train.sample_domain");
  }
  if (cfg.has("train.hidden_width")) {
    mcase.hints.hidden_width = cfg.get("train.hidden_width").as_int("train.hidden_width");
  }
  if (cfg.has("train.reparam")) {
    const std::string r = cfg.get("train.reparam").as_string("train.reparam");
    if (r == "lagaris") {
      mcase.hints.reparam = ReparamKind::LagarisLinear;
    } else if (r == "exp1") {
      mcase.hints.reparam = ReparamKind::ExpFirstOrder;
    } else if (r == "exp2") {
      mcase.hints.reparam = ReparamKind::ExpSecondOrder;
    } else {
      throw ConfigError("train.reparam must be lagaris, exp1 or exp2");
    }
  } else if (problem.operator_order() >= 2) {
    mcase.hints.reparam = ReparamKind::ExpSecondOrder;
  }

  loaded.train.sample_domain = mcase.hints.sample_domain;
  if (cfg.has("train.epochs")) {
    loaded.has_train = true;
    loaded.train.epochs = cfg.get("train.epochs").as_int("train.epochs");
  }
  if (cfg.has("train.seed")) {
    loaded.has_train = true;
    loaded.train.seed = static_cast<std::uint64_t>(cfg.get("train.seed").as_int("train.seed"));
  }
  if (cfg.has("train.learning_rate")) {
    loaded.has_train = true;
    loaded.train.learning_rate = cfg.get("train.learning_rate").as_number("train.learning_rate");
  }
  if (cfg.has("train.samples_per_epoch")) {
    loaded.has_train = true;
    loaded.train.samples_per_epoch =
        cfg.get("train.samples_per_epoch").as_int("train.samples_per_epoch");
  }
  return loaded;
}

LoadedCase load_case_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return case_config_from_text(ss.str());
}

}  // namespace odecert
