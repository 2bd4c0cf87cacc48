#include "hyperrate/instance_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hyperrate/error.hpp"
#include "hyperrate/markov.hpp"

namespace hyperrate {

using nlohmann::json;

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError(what, 0, field);
}

std::optional<Fraction> parse_fraction_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      long long n = std::stoll(s, &used);
      if (used != s.size()) return std::nullopt;
      return Fraction(n);
    }
    std::string a = s.substr(0, slash), b = s.substr(slash + 1);
    long long n = std::stoll(a, &used);
    if (used != a.size()) return std::nullopt;
    long long d = std::stoll(b, &used);
    if (used != b.size() || d == 0) return std::nullopt;
    return Fraction(n, d);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// A numeric leaf: either exact or a plain double.
struct Number {
  double value = 0.0;
  std::optional<Fraction> exact;
};

Number parse_number(const json& j, const std::string& field) {
  if (j.is_number_integer()) {
    long long v = j.get<long long>();
    return {double(v), Fraction(v)};
  }
  if (j.is_number()) return {j.get<double>(), std::nullopt};
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (auto f = parse_fraction_string(s)) return {boost::rational_cast<double>(*f), f};
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) return {v, std::nullopt};
  }
  fail(field, "expected a number or \"a/b\" fraction");
}

double parse_real(const json& j, const std::string& field) { return parse_number(j, field).value; }

std::string label_of(const json& j, const std::string& field) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number()) {
    std::ostringstream os;
    os << j.get<double>();
    return os.str();
  }
  fail(field, "symbol must be a string or number");
}

std::vector<Alphabet> parse_alphabets(const json& doc) {
  if (!doc.contains("alphabets") || !doc["alphabets"].is_array())
    fail("alphabets", "missing or not a list");
  std::vector<Alphabet> out;
  std::size_t i = 0;
  for (const auto& a : doc["alphabets"]) {
    std::string field = "alphabets[" + std::to_string(i) + "]";
    Alphabet alpha;
    const json* syms = nullptr;
    if (a.is_object()) {
      alpha.name = a.value("name", std::string(1, char('X' + i)));
      if (!a.contains("symbols")) fail(field, "missing 'symbols'");
      syms = &a["symbols"];
    } else {
      alpha.name = i == 0 ? "X" : (i == 1 ? "Y" : "Z");
      syms = &a;
    }
    if (!syms->is_array()) fail(field, "symbols must be a list");
    for (const auto& s : *syms) alpha.labels.push_back(label_of(s, field + ".symbols"));
    out.push_back(std::move(alpha));
    ++i;
  }
  return out;
}

// Flattens a nested row-major array of the given shape; leaf(j, path) is called per entry.
template <class Leaf>
void walk(const json& j, const std::vector<std::size_t>& shape, std::size_t depth,
          const std::string& field, Leaf&& leaf) {
  if (depth == shape.size()) {
    leaf(j, field);
    return;
  }
  if (!j.is_array() || j.size() != shape[depth])
    fail(field, "expected a list of length " + std::to_string(shape[depth]));
  for (std::size_t i = 0; i < j.size(); ++i)
    walk(j[i], shape, depth + 1, field + "[" + std::to_string(i) + "]", leaf);
}

JointPmf parse_pmf(const json& doc, std::vector<Alphabet> axes) {
  std::vector<std::size_t> shape;
  for (const auto& a : axes) shape.push_back(a.size());
  std::vector<Number> leaves;
  walk(doc["pmf"], shape, 0, "pmf",
       [&](const json& j, const std::string& f) { leaves.push_back(parse_number(j, f)); });
  bool exact = true;
  for (const auto& n : leaves) exact = exact && n.exact.has_value();
  if (exact) {
    std::vector<Fraction> v;
    for (const auto& n : leaves) v.push_back(*n.exact);
    return JointPmf(std::move(axes), std::move(v));
  }
  std::vector<double> v;
  for (const auto& n : leaves) v.push_back(n.value);
  return JointPmf(std::move(axes), std::move(v));
}

bool is_unspecified(const json& j) {
  return j.is_null() || (j.is_string() && j.get<std::string>() == "?");
}

FunctionTable parse_function(const json& j, std::size_t index, Setting setting,
                             const std::vector<Alphabet>& axes) {
  std::string field = "functions[" + std::to_string(index) + "]";
  if (!j.is_object()) fail(field, "function must be an object");
  FunctionTable f;
  f.name = j.value("name", "f" + std::to_string(index));
  if (j.contains("axes")) {
    for (const auto& a : j["axes"]) {
      if (!a.is_number_unsigned()) fail(field + ".axes", "axis must be a nonnegative integer");
      f.axes.push_back(a.get<std::size_t>());
    }
  } else {
    f.axes = default_function_axes(setting, index);
  }
  for (auto a : f.axes) {
    if (a >= axes.size()) fail(field + ".axes", "axis out of range");
    f.shape.push_back(axes[a].size());
  }
  std::string metric = j.value("metric", std::string("euclidean"));
  if (metric == "euclidean") f.metric = Metric::euclidean;
  else if (metric == "absolute") f.metric = Metric::absolute;
  else fail(field + ".metric", "unknown metric '" + metric + "'");
  if (!j.contains("values")) fail(field, "missing 'values'");

  std::size_t dim = 0;
  walk(j["values"], f.shape, 0, field + ".values", [&](const json& leaf, const std::string& path) {
    if (is_unspecified(leaf)) {
      f.defined.push_back(0);
      f.values.push_back(std::nan(""));  // patched once dim is known
      return;
    }
    std::vector<double> v;
    if (leaf.is_array()) {
      for (const auto& c : leaf) v.push_back(parse_real(c, path));
    } else {
      v.push_back(parse_real(leaf, path));
    }
    if (v.empty()) fail(path, "empty value vector");
    if (dim == 0) dim = v.size();
    if (v.size() != dim) fail(path, "value dimension differs from earlier entries");
    f.defined.push_back(1);
    f.values.insert(f.values.end(), v.begin(), v.end());
  });
  if (dim == 0) dim = 1;
  f.dim = dim;
  // Re-lay values now that unspecified placeholders can be widened to dim zeros.
  std::vector<double> laid;
  std::size_t pos = 0;
  for (auto d : f.defined) {
    if (d) {
      laid.insert(laid.end(), f.values.begin() + std::ptrdiff_t(pos),
                  f.values.begin() + std::ptrdiff_t(pos + dim));
      pos += dim;
    } else {
      laid.insert(laid.end(), dim, 0.0);
      pos += 1;
    }
  }
  f.values = std::move(laid);
  return f;
}

ProblemInstance from_json(const json& doc) {
  if (!doc.is_object()) fail("", "document must be an object");
  ProblemInstance inst;
  if (!doc.contains("setting") || !doc["setting"].is_string()) fail("setting", "missing");
  try {
    inst.setting = parse_setting(doc["setting"].get<std::string>());
  } catch (const ValidationError& e) {
    fail("setting", e.what());
  }
  auto axes = parse_alphabets(doc);
  inst.allow_zero_marginals = doc.value("allow_zero_marginals", false);

  if (doc.contains("markov")) {
    const auto& m = doc["markov"];
    if (!m.is_object() || !m.contains("transition")) fail("markov", "needs 'transition'");
    MarkovSpec spec;
    std::size_t r = 0;
    for (const auto& row : m["transition"]) {
      std::vector<double> out;
      for (const auto& v : row)
        out.push_back(parse_real(v, "markov.transition[" + std::to_string(r) + "]"));
      spec.transition.push_back(std::move(out));
      ++r;
    }
    spec.k = m.value("k", 1);
    inst.markov = std::move(spec);
  }

  if (doc.contains("pmf")) {
    inst.pmf = parse_pmf(doc, axes);
  } else if (inst.setting == Setting::markov && inst.markov) {
    if (axes.size() != 1 || inst.markov->transition.size() != axes[0].size())
      throw ValidationError("transition matrix must be |X| x |X|");
    inst.pmf = JointPmf(axes, stationary(inst.markov->transition));
  } else {
    fail("pmf", "missing");
  }

  if (!doc.contains("functions") || !doc["functions"].is_array()) fail("functions", "missing");
  for (std::size_t i = 0; i < doc["functions"].size(); ++i)
    inst.functions.push_back(parse_function(doc["functions"][i], i, inst.setting, axes));

  if (!doc.contains("tolerances")) fail("tolerances", "missing");
  const auto& tol = doc["tolerances"];
  if (tol.is_array()) {
    for (std::size_t i = 0; i < tol.size(); ++i)
      inst.tolerances.push_back(parse_real(tol[i], "tolerances[" + std::to_string(i) + "]"));
  } else {
    inst.tolerances.push_back(parse_real(tol, "tolerances"));
  }

  if (doc.contains("embedding")) {
    for (const auto& e : doc["embedding"]) {
      std::vector<double> pos;
      if (!e.is_null())
        for (const auto& v : e) pos.push_back(parse_real(v, "embedding"));
      inst.embedding.push_back(std::move(pos));
    }
  }
  validate(inst);
  return inst;
}

json number_json(double v) { return v; }

json fraction_json(const Fraction& f) {
  if (f.denominator() == 1) return f.numerator();
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

json nest(const std::vector<json>& flat, const std::vector<std::size_t>& shape, std::size_t depth,
          std::size_t& pos) {
  if (depth == shape.size()) return flat[pos++];
  json arr = json::array();
  for (std::size_t i = 0; i < shape[depth]; ++i) arr.push_back(nest(flat, shape, depth + 1, pos));
  return arr;
}

}  // namespace

ProblemInstance load_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte > 0 ? e.byte - 1 : 0), "");
  }
  try {
    return from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0, "");
  }
}

ProblemInstance load_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", 0, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_instance(ss.str());
}

std::string serialize_instance(const ProblemInstance& inst) {
  json doc;
  doc["setting"] = std::string(to_string(inst.setting));
  json alphas = json::array();
  for (const auto& a : inst.pmf.axes()) alphas.push_back({{"name", a.name}, {"symbols", a.labels}});
  doc["alphabets"] = alphas;

  std::vector<json> leaves;
  if (inst.pmf.exact()) {
    for (const auto& f : *inst.pmf.exact()) leaves.push_back(fraction_json(f));
  } else {
    for (double p : inst.pmf.probs()) leaves.push_back(number_json(p));
  }
  std::size_t pos = 0;
  doc["pmf"] = nest(leaves, inst.pmf.shape(), 0, pos);

  json fns = json::array();
  for (const auto& f : inst.functions) {
    std::vector<json> vals;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f.is_defined(i)) {
        vals.emplace_back("?");
        continue;
      }
      auto v = f.value(i);
      vals.emplace_back(std::vector<double>(v.begin(), v.end()));
    }
    std::size_t p = 0;
    fns.push_back({{"name", f.name},
                   {"axes", f.axes},
                   {"metric", f.metric == Metric::absolute ? "absolute" : "euclidean"},
                   {"values", nest(vals, f.shape, 0, p)}});
  }
  doc["functions"] = fns;
  doc["tolerances"] = inst.tolerances;
  doc["allow_zero_marginals"] = inst.allow_zero_marginals;
  if (!inst.embedding.empty()) doc["embedding"] = inst.embedding;
  if (inst.markov) doc["markov"] = {{"transition", inst.markov->transition}, {"k", inst.markov->k}};
  return doc.dump(1);
}

std::uint64_t instance_hash(const ProblemInstance& inst) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_instance(inst)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hyperrate
