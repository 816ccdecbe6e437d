#include "enlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace enlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error(context + ": expected a number, got '" + s + "'");
  }
}

}  // namespace

bool Section::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

const Section* Section::child(const std::string& t) const {
  for (const auto& c : children)
    if (c.type == t) return &c;
  return nullptr;
}

std::vector<const Section*> Section::children_of(const std::string& t) const {
  std::vector<const Section*> out;
  for (const auto& c : children)
    if (c.type == t) out.push_back(&c);
  return out;
}

std::string Section::get_string(const std::string& key, const std::string& context) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw config_error(context + "." + key + " is required");
}

std::string Section::get_string_or(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return fallback;
}

double Section::get_double(const std::string& key, const std::string& context) const {
  return parse_double(get_string(key, context), context + "." + key);
}

double Section::get_double_or(const std::string& key, double fallback,
                              const std::string& context) const {
  if (!has(key)) return fallback;
  return parse_double(get_string(key, context), context + "." + key);
}

long Section::get_int(const std::string& key, const std::string& context) const {
  const double v = get_double(key, context);
  const long i = std::lround(v);
  if (static_cast<double>(i) != v)
    throw config_error(context + "." + key + " must be an integer");
  return i;
}

long Section::get_int_or(const std::string& key, long fallback, const std::string& context) const {
  if (!has(key)) return fallback;
  return get_int(key, context);
}

std::vector<double> Section::get_doubles(const std::string& key,
                                         const std::string& context) const {
  const auto toks = split_ws(get_string(key, context));
  std::vector<double> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(parse_double(t, context + "." + key));
  if (out.empty()) throw config_error(context + "." + key + " must not be empty");
  return out;
}

std::vector<std::string> Section::get_strings(const std::string& key,
                                              const std::string& context) const {
  auto toks = split_ws(get_string(key, context));
  if (toks.empty()) throw config_error(context + "." + key + " must not be empty");
  return toks;
}

std::vector<std::vector<double>> Section::get_double_rows(const std::string& key) const {
  std::vector<std::vector<double>> rows;
  for (const auto& [k, v] : entries) {
    if (k != key) continue;
    const auto toks = split_ws(v);
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) row.push_back(parse_double(t, key));
    rows.push_back(std::move(row));
  }
  return rows;
}

Section parse_config_text(const std::string& text) {
  Section root;
  root.type = "(root)";
  std::vector<Section*> stack{&root};

  auto open_block = [&](const std::string& head, int line_no) {
    const auto tokens = split_ws(head);
    if (tokens.empty())
      throw config_error("line " + std::to_string(line_no) + ": block needs a name");
    if (tokens.size() > 2)
      throw config_error("line " + std::to_string(line_no) + ": too many tokens before '{'");
    Section child;
    child.type = tokens[0];
    if (tokens.size() == 2) child.name = tokens[1];
    child.line = line_no;
    stack.back()->children.push_back(std::move(child));
    stack.push_back(&stack.back()->children.back());
  };

  auto statement = [&](const std::string& seg, int line_no) {
    const auto eq = seg.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(line_no) +
                         ": expected 'key = value', a block, or '}'");
    const std::string key = trim(seg.substr(0, eq));
    const std::string value = trim(seg.substr(eq + 1));
    if (key.empty() || key.find(' ') != std::string::npos)
      throw config_error("line " + std::to_string(line_no) + ": malformed key");
    if (value.empty())
      throw config_error("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    stack.back()->entries.emplace_back(key, value);
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    // Braces may share a line with statements; split at each of them.
    size_t pos = 0;
    while (pos < line.size()) {
      const size_t brace = line.find_first_of("{}", pos);
      if (brace == std::string::npos) {
        const std::string seg = trim(line.substr(pos));
        if (!seg.empty()) statement(seg, line_no);
        break;
      }
      const std::string seg = trim(line.substr(pos, brace - pos));
      if (line[brace] == '{') {
        open_block(seg, line_no);
      } else {
        if (!seg.empty()) statement(seg, line_no);
        if (stack.size() == 1)
          throw config_error("line " + std::to_string(line_no) + ": unmatched '}'");
        stack.pop_back();
      }
      pos = brace + 1;
    }
  }
  if (stack.size() != 1) throw config_error("unterminated block at end of file");
  return root;
}

Section parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

const char* to_string(CheckKind k) {
  switch (k) {
    case CheckKind::EnergyBalance: return "energy-balance";
    case CheckKind::Corollary: return "corollary";
    case CheckKind::HomoExpConv: return "homo-exp-conv";
    case CheckKind::Generalization: return "generalization";
    case CheckKind::Convergence: return "convergence";
    case CheckKind::StabilityCertificate: return "stability-certificate";
  }
  return "?";
}

CheckKind check_from_string(const std::string& s, const std::string& context) {
  for (CheckKind k : {CheckKind::EnergyBalance, CheckKind::Corollary, CheckKind::HomoExpConv,
                      CheckKind::Generalization, CheckKind::Convergence,
                      CheckKind::StabilityCertificate})
    if (s == to_string(k)) return k;
  throw config_error(context + ".checks: unknown check '" + s + "'");
}

bool check_needs_trajectory(CheckKind k) {
  return k != CheckKind::StabilityCertificate;
}

namespace {

void validate_scenario(const ScenarioConfig& sc) {
  const std::string ctx = "scenario '" + sc.name + "'";
  bool needs_dynamics = false;
  for (CheckKind k : sc.checks) needs_dynamics = needs_dynamics || check_needs_trajectory(k);

  if (needs_dynamics) {
    for (const char* block : {"signal", "potential", "dissipation", "initial", "integrator"})
      if (!sc.body.child(block))
        throw config_error(ctx + ": missing required block '" + std::string(block) + "'");
    const Section& integ = *sc.body.child("integrator");
    if (!(integ.get_double("h", ctx + ": integrator") > 0.0))
      throw config_error(ctx + ": integrator.h must be positive");
    if (!(integ.get_double("T", ctx + ": integrator") > 0.0))
      throw config_error(ctx + ": integrator.T must be positive");
    if (integ.get_int_or("sample_stride", 1, ctx + ": integrator") < 1)
      throw config_error(ctx + ": integrator.sample_stride must be >= 1");
  }
  for (CheckKind k : sc.checks) {
    if ((k == CheckKind::HomoExpConv || k == CheckKind::Generalization) &&
        !sc.body.child("quasi_period"))
      throw config_error(ctx + ": check '" + to_string(k) +
                         "' needs a quasi_period block");
    if (k == CheckKind::StabilityCertificate && !sc.body.child("system"))
      throw config_error(ctx + ": check 'stability-certificate' needs a system block");
  }
}

ExperimentConfig build_experiment(const Section& root, const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.output_dir = root.get_string_or("output_dir", "");
  cfg.seed = static_cast<std::uint64_t>(root.get_int_or("seed", 0, "config"));

  std::set<std::string> names;
  for (const auto& child : root.children) {
    if (child.type != "scenario")
      throw config_error("unexpected top-level block '" + child.type + "' (line " +
                         std::to_string(child.line) + ")");
    ScenarioConfig sc;
    sc.name = child.name;
    if (sc.name.empty())
      throw config_error("scenario at line " + std::to_string(child.line) + " needs a name");
    if (!names.insert(sc.name).second)
      throw config_error("duplicate scenario name '" + sc.name + "'");
    sc.seed = static_cast<std::uint64_t>(
        child.get_int_or("seed", static_cast<long>(cfg.seed), "scenario '" + sc.name + "'"));
    for (const auto& s : child.get_strings("checks", "scenario '" + sc.name + "'"))
      sc.checks.push_back(check_from_string(s, "scenario '" + sc.name + "'"));
    sc.body = child;
    validate_scenario(sc);
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  const Section root = parse_config_file(path);
  std::string dir = ".";
  const auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return build_experiment(root, dir);
}

ExperimentConfig experiment_config_from_text(const std::string& text, const std::string& base_dir) {
  return build_experiment(parse_config_text(text), base_dir);
}

}  // namespace enlab
