#include <fstream>
#include <sstream>

#include "l2n2/bench.hpp"

namespace l2n2 {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on commas outside parentheses.
std::vector<std::string> list_items(std::string_view value) {
  std::vector<std::string> items;
  int depth = 0;
  std::string cur;
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !items.empty()) items.push_back(trim(cur));
  return items;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::InvalidSpec, "plan line " + std::to_string(line) + ": " + msg);
}

long long parse_integer(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(line, "expected an integer, found '" + s + "'");
}

double parse_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(line, "expected a number, found '" + s + "'");
}

// "M7_Roll", "sphere(6,11)" or "cube(3)".
ManifoldSpec parse_manifold(const std::string& item, std::size_t line) {
  ManifoldSpec spec;
  const auto open = item.find('(');
  if (open == std::string::npos) {
    spec.name = item;
    return spec;
  }
  if (item.back() != ')') fail(line, "unbalanced parentheses in '" + item + "'");
  spec.name = trim(item.substr(0, open));
  const auto args = list_items(item.substr(open + 1, item.size() - open - 2));
  if (args.empty() || args.size() > 2) fail(line, "'" + item + "' takes (d) or (d,D)");
  spec.intrinsic_d = static_cast<int>(parse_integer(args[0], line));
  if (args.size() == 2) spec.ambient_D = static_cast<int>(parse_integer(args[1], line));
  return spec;
}

}  // namespace

ExperimentPlan parse_plan(std::string_view text) {
  ExperimentPlan plan;
  std::vector<ManifoldSpec> manifolds;
  std::vector<double> noise{0.0};
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto items = list_items(value);

    if (key == "manifolds") {
      for (const auto& it : items) manifolds.push_back(parse_manifold(it, line));
    } else if (key == "n") {
      for (const auto& it : items) plan.n_list.push_back(parse_integer(it, line));
    } else if (key == "repetitions") {
      plan.repetitions = static_cast<int>(parse_integer(value, line));
    } else if (key == "seed") {
      plan.seed = static_cast<std::uint64_t>(parse_integer(value, line));
    } else if (key == "methods") {
      for (const auto& it : items) {
        try {
          plan.methods.push_back(parse_method(it));
        } catch (const Error& e) {
          fail(line, e.what());
        }
      }
    } else if (key == "noise") {
      noise.clear();
      for (const auto& it : items) noise.push_back(parse_real(it, line));
    } else if (key == "calibration") {
      plan.calibration = value;
    } else if (key == "output") {
      plan.output = value;
    } else if (key == "optimize") {
      if (value != "true" && value != "false") fail(line, "optimize is true or false");
      plan.optimize = value == "true";
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  for (const auto& m : manifolds)
    for (double sigma : noise) {
      ManifoldSpec s = m;
      s.noise_sigma = sigma;
      plan.suite.push_back(s);
    }
  validate(plan);
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open plan " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentPlan plan = parse_plan(buf.str());
  // A relative calibration path is relative to the plan file; output stays relative to the cwd.
  if (!plan.calibration.empty() && plan.calibration.is_relative())
    plan.calibration = path.parent_path() / plan.calibration;
  return plan;
}

}  // namespace l2n2
